//! Shared fixtures for unit tests.

use num_complex::Complex64 as C64;

use crate::bath::{CorrelationMatrix, LineBroadening, OboParams};
use crate::cumulant::SystemSpec;

/// λ = 100 cm⁻¹, τ_corr = 100 fs, 𝒯 = 300 K.
pub(crate) fn reference_obo() -> OboParams {
    OboParams::new(100.0, 100.0, 300.0).unwrap()
}

/// Single level at 10000 cm⁻¹ on the reference OBO bath.
pub(crate) fn fig1_system(rotating_frame_cm: f64) -> SystemSpec {
    let base = LineBroadening::analytic_obo(reference_obo());
    let corr = CorrelationMatrix::uncorrelated(1, base).unwrap();
    SystemSpec::new(&[10_000.0], &[1.0], corr, rotating_frame_cm).unwrap()
}

/// Bath-free levels (λ = 0).
pub(crate) fn free_system(omega_cm: &[f64], dipole: &[f64]) -> SystemSpec {
    let corr = CorrelationMatrix::uncorrelated(omega_cm.len(), LineBroadening::zero()).unwrap();
    SystemSpec::new(omega_cm, dipole, corr, 0.0).unwrap()
}

/// Two levels sharing the reference OBO base bath with cross-correlation c.
pub(crate) fn two_level_system(c: f64, rotating_frame_cm: f64) -> SystemSpec {
    let base = LineBroadening::analytic_obo(reference_obo());
    let corr = CorrelationMatrix::new(base, 2, vec![1.0, c, c, 1.0]).unwrap();
    SystemSpec::new(&[10_000.0, 10_400.0], &[1.0, 0.8], corr, rotating_frame_cm).unwrap()
}

pub(crate) fn assert_c64_close(actual: C64, re: f64, im: f64, tol: f64) {
    let expected = C64::new(re, im);
    let scale = expected.norm().max(1e-300);
    assert!(
        (actual - expected).norm() <= tol * scale,
        "got {actual}, expected {expected} (rel dev {})",
        (actual - expected).norm() / scale
    );
}
