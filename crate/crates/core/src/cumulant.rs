//! Closed-form second-cumulant response functions.
//!
//! For Gaussian energy-gap fluctuations these expressions are exact; they
//! serve as the analytic reference for the master-equation propagation in
//! [`crate::propagator`]. The rephasing response between ground state g and
//! excited levels i, j reads
//!
//! ```text
//! R₂^{(ji)}(t,T,τ) = |d_i|²|d_j|² e^{−i(ω_jg·t + (ω_jg−ω_ig)·T − ω_ig·τ)}
//!                    · e^{−g*_ii(τ+T) − g_jj(T+t) + g*_ij(t+T+τ)}
//!                    · e^{−g*_ij(t) − g*_ij(τ) + g_ij(T)}
//! ```
//!
//! while a ground-state-equilibrium projector degrades it to the T-free
//! `r2_rdm` form with exponents in a single level index only.
//!
//! All frequencies are shifted into a configurable rotating frame; optical
//! carriers (~10⁴ cm⁻¹) would otherwise demand sub-fs sampling. The carrier
//! is added back on the frequency axes in [`crate::spectra`].

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::CorrelationMatrix;
use crate::grid::TimeGrid;
use crate::units::wavenumber_to_angular;
use crate::{Error, Result};

/// Electronic level structure: transition frequencies to the shared ground
/// state, transition dipole magnitudes, and the bath correlation matrix.
#[derive(Debug, Clone)]
pub struct SystemSpec {
    omega_rad_fs: Vec<f64>,
    dipole: Vec<f64>,
    correlation: CorrelationMatrix,
    rotating_frame_rad_fs: f64,
}

impl SystemSpec {
    /// `omega_cm` are transition wavenumbers in cm⁻¹, `dipole` unit-free
    /// transition dipole magnitudes; `rotating_frame_cm` is subtracted from
    /// every transition frequency in all response evaluations.
    pub fn new(
        omega_cm: &[f64],
        dipole: &[f64],
        correlation: CorrelationMatrix,
        rotating_frame_cm: f64,
    ) -> Result<Self> {
        let m = correlation.size();
        if omega_cm.len() != m || dipole.len() != m {
            return Err(Error::InvalidParameter(format!(
                "expected {m} frequencies and dipoles (correlation matrix is {m}x{m}), got {} and {}",
                omega_cm.len(),
                dipole.len()
            )));
        }
        if let Some(bad) = omega_cm.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "transition frequency must be finite, got {bad}"
            )));
        }
        if let Some(bad) = dipole.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dipole magnitudes must be >= 0, got {bad}"
            )));
        }
        if !rotating_frame_cm.is_finite() {
            return Err(Error::InvalidParameter(
                "rotating-frame frequency must be finite".into(),
            ));
        }
        Ok(SystemSpec {
            omega_rad_fs: omega_cm.iter().map(|w| wavenumber_to_angular(*w)).collect(),
            dipole: dipole.to_vec(),
            correlation,
            rotating_frame_rad_fs: wavenumber_to_angular(rotating_frame_cm),
        })
    }

    pub fn num_levels(&self) -> usize {
        self.omega_rad_fs.len()
    }

    pub fn check_level(&self, index: usize) -> Result<()> {
        if index >= self.num_levels() {
            return Err(Error::InvalidLevel {
                index,
                num_levels: self.num_levels(),
            });
        }
        Ok(())
    }

    /// Absolute transition frequency of level `i`, rad/fs.
    pub fn omega(&self, i: usize) -> f64 {
        self.omega_rad_fs[i]
    }

    /// Rotating-frame transition frequency ω_ig − ω_rf, rad/fs.
    pub fn omega_shifted(&self, i: usize) -> f64 {
        self.omega_rad_fs[i] - self.rotating_frame_rad_fs
    }

    pub fn rotating_frame(&self) -> f64 {
        self.rotating_frame_rad_fs
    }

    pub fn dipole(&self, i: usize) -> f64 {
        self.dipole[i]
    }

    pub fn bath(&self) -> &CorrelationMatrix {
        &self.correlation
    }
}

/// Level indices of the rephasing pathway: `i` is the level reached by the
/// first interaction (bra-side coherence during τ), `j` the level emitting
/// during t. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathwaySpec {
    pub i: usize,
    pub j: usize,
}

impl PathwaySpec {
    pub fn new(i: usize, j: usize) -> Self {
        PathwaySpec { i, j }
    }

    pub fn is_diagonal(&self) -> bool {
        self.i == self.j
    }

    pub fn validate(&self, sys: &SystemSpec) -> Result<()> {
        sys.check_level(self.i)?;
        sys.check_level(self.j)
    }
}

/// How a response field was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Closed-form second cumulant.
    Exact,
    /// Ground-state-projector (reduced-density-matrix) approximation.
    Rdm,
    /// Reconstructed by chaining interval master-equation propagations.
    Propagated,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Rdm => "rdm",
            Provenance::Propagated => "propagated",
        }
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Provenance::Exact),
            "rdm" => Ok(Provenance::Rdm),
            "propagated" => Ok(Provenance::Propagated),
            other => Err(Error::InvalidParameter(format!(
                "unknown provenance '{other}' (expected exact|rdm|propagated)"
            ))),
        }
    }
}

/// Complex response surface R(τ, t) at one fixed waiting time.
#[derive(Debug, Clone)]
pub struct ResponseField {
    pub tau_axis: TimeGrid,
    pub t_axis: TimeGrid,
    pub waiting_time_fs: f64,
    /// Indexed `[tau_index, t_index]`.
    pub values: Array2<C64>,
    pub provenance: Provenance,
    pub pathway: PathwaySpec,
    /// Carrier frequency the field was sampled in; added back onto
    /// spectrum axes.
    pub rotating_frame_rad_fs: f64,
}

impl ResponseField {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    for &t in times {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
    }
    Ok(())
}

/// Optical coherence ρ_ig(t) = e^{−iω_ig t − g_ii(t)} in the rotating frame.
pub fn linear_coherence(sys: &SystemSpec, i: usize, t: f64) -> Result<C64> {
    sys.check_level(i)?;
    check_times(&[t])?;
    sys.bath().check_range(t)?;
    let phase = -sys.omega_shifted(i) * t;
    Ok((C64::new(0.0, phase) - sys.bath().g(i, i, t)).exp())
}

/// Weighted coherence sum Σ_i |d_i|² ρ_ig(t) on a grid (the one-sided
/// kernel feeding the absorption transform).
pub fn linear_response_complex(sys: &SystemSpec, t_grid: &TimeGrid) -> Result<Vec<C64>> {
    sys.bath().check_range(t_grid.t_end())?;
    let m = sys.num_levels();
    t_grid
        .times()
        .map(|t| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..m {
                let d = sys.dipole(i);
                acc += linear_coherence(sys, i, t)? * (d * d);
            }
            Ok(acc)
        })
        .collect()
}

/// Real linear response Σ_i |d_i|² ρ_ig(t) + c.c.
pub fn linear_response(sys: &SystemSpec, t_grid: &TimeGrid) -> Result<Vec<f64>> {
    Ok(linear_response_complex(sys, t_grid)?
        .into_iter()
        .map(|z| 2.0 * z.re)
        .collect())
}

/// Exact second-cumulant rephasing response R₂^{(ji)}(t, T, τ).
pub fn r2_exact(sys: &SystemSpec, pw: PathwaySpec, tau: f64, t_wait: f64, t: f64) -> Result<C64> {
    pw.validate(sys)?;
    check_times(&[tau, t_wait, t])?;
    sys.bath().check_range(t + t_wait + tau)?;
    Ok(r2_exact_unchecked(sys, pw, tau, t_wait, t))
}

/// As [`r2_exact`] without argument validation; used inside grid sweeps that
/// validate once.
pub(crate) fn r2_exact_unchecked(
    sys: &SystemSpec,
    pw: PathwaySpec,
    tau: f64,
    t_wait: f64,
    t: f64,
) -> C64 {
    let (i, j) = (pw.i, pw.j);
    let w_i = sys.omega_shifted(i);
    let w_j = sys.omega_shifted(j);
    let c = sys.bath();
    let phase = -(w_j * t + (w_j - w_i) * t_wait - w_i * tau);
    let exponent = C64::new(0.0, phase) - c.g(i, i, tau + t_wait).conj()
        - c.g(j, j, t_wait + t)
        + c.g(i, j, t + t_wait + tau).conj()
        - c.g(i, j, t).conj()
        - c.g(i, j, tau).conj()
        + c.g(i, j, t_wait);
    let d2 = sys.dipole(i).powi(2) * sys.dipole(j).powi(2);
    exponent.exp() * d2
}

/// Ground-state-projector response: |d_i|⁴ e^{−iω_ig(t−τ)} e^{−g*_ii(τ)−g_ii(t)}.
///
/// Carries no waiting-time dependence; `t_wait` is accepted (and ignored) so
/// the call surface matches [`r2_exact`]. Only the diagonal pathway i = j is
/// defined — the mixed-index generalization is ambiguous and rejected.
pub fn r2_rdm(sys: &SystemSpec, pw: PathwaySpec, tau: f64, t_wait: f64, t: f64) -> Result<C64> {
    pw.validate(sys)?;
    if !pw.is_diagonal() {
        return Err(Error::UnsupportedPathway {
            i: pw.i,
            j: pw.j,
            reason: "the ground-state-projector form is defined for i = j only".into(),
        });
    }
    check_times(&[tau, t_wait, t])?;
    sys.bath().check_range(t.max(tau))?;
    Ok(r2_rdm_unchecked(sys, pw, tau, t))
}

pub(crate) fn r2_rdm_unchecked(sys: &SystemSpec, pw: PathwaySpec, tau: f64, t: f64) -> C64 {
    let i = pw.i;
    let w_i = sys.omega_shifted(i);
    let c = sys.bath();
    let phase = -(w_i * t - w_i * tau);
    let exponent = C64::new(0.0, phase) - c.g(i, i, tau).conj() - c.g(i, i, t);
    let d2 = sys.dipole(i).powi(2) * sys.dipole(pw.j).powi(2);
    exponent.exp() * d2
}

/// R₂ at t = 0: the initial condition seeding the third-interval master
/// equation.
pub fn r2_initial(sys: &SystemSpec, pw: PathwaySpec, tau: f64, t_wait: f64) -> Result<C64> {
    r2_exact(sys, pw, tau, t_wait, 0.0)
}

fn sweep_field<F>(
    sys: &SystemSpec,
    pw: PathwaySpec,
    tau_grid: &TimeGrid,
    t_grid: &TimeGrid,
    t_wait: f64,
    provenance: Provenance,
    eval: F,
) -> Result<ResponseField>
where
    F: Fn(f64, f64) -> C64 + Sync,
{
    pw.validate(sys)?;
    check_times(&[t_wait])?;
    sys.bath()
        .check_range(tau_grid.t_end() + t_wait + t_grid.t_end())?;
    let (n_tau, n_t) = (tau_grid.len(), t_grid.len());
    let mut values = Array2::from_elem((n_tau, n_t), C64::new(0.0, 0.0));
    values
        .outer_iter_mut()
        .into_par_iter()
        .enumerate()
        .for_each(|(k, mut row)| {
            let tau = tau_grid.time(k);
            for (l, cell) in row.iter_mut().enumerate() {
                *cell = eval(tau, t_grid.time(l));
            }
        });
    Ok(ResponseField {
        tau_axis: *tau_grid,
        t_axis: *t_grid,
        waiting_time_fs: t_wait,
        values,
        provenance,
        pathway: pw,
        rotating_frame_rad_fs: sys.rotating_frame(),
    })
}

/// Grid sweep of [`r2_exact`].
pub fn field_exact(
    sys: &SystemSpec,
    pw: PathwaySpec,
    tau_grid: &TimeGrid,
    t_grid: &TimeGrid,
    t_wait: f64,
) -> Result<ResponseField> {
    sweep_field(sys, pw, tau_grid, t_grid, t_wait, Provenance::Exact, |tau, t| {
        r2_exact_unchecked(sys, pw, tau, t_wait, t)
    })
}

/// Grid sweep of [`r2_rdm`]; diagonal pathways only.
pub fn field_rdm(
    sys: &SystemSpec,
    pw: PathwaySpec,
    tau_grid: &TimeGrid,
    t_grid: &TimeGrid,
    t_wait: f64,
) -> Result<ResponseField> {
    pw.validate(sys)?;
    if !pw.is_diagonal() {
        return Err(Error::UnsupportedPathway {
            i: pw.i,
            j: pw.j,
            reason: "the ground-state-projector form is defined for i = j only".into(),
        });
    }
    sweep_field(sys, pw, tau_grid, t_grid, t_wait, Provenance::Rdm, |tau, t| {
        r2_rdm_unchecked(sys, pw, tau, t)
    })
}
