//! Rephasing third-order optical response of multilevel electronic systems
//! coupled to Gaussian energy-gap fluctuations.
//!
//! The crate computes the rephasing (photon-echo) response over the three
//! experimental time intervals (τ, T, t) along two independent routes:
//!
//! * closed-form second-cumulant expressions built from line-broadening
//!   functions g(t) ([`cumulant`]), and
//! * numerical integration of interval-specific time-local master equations
//!   whose complex relaxation coefficients are combinations of ġ(t)
//!   ([`propagator`]).
//!
//! For purely dephasing systems the two routes agree to integrator accuracy,
//! which the [`verify`] module and the acceptance test suite check explicitly.
//! [`spectra`] turns response fields into 1D absorption and 2D
//! frequency-frequency maps, and [`cli`] drives config-based workflows with
//! deterministic CSV/PGM/JSON outputs.

pub mod bath;
pub mod cli;
pub mod config;
pub mod cumulant;
mod error;
pub mod grid;
pub mod output;
pub mod propagator;
pub mod spectra;
#[cfg(test)]
pub(crate) mod testutil;
pub mod units;
pub mod verify;

pub use error::{Error, Result};

/// Crate version recorded in output sidecars.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
