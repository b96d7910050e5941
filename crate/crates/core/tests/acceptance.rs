#![allow(clippy::excessive_precision)] // frozen oracle constants keep full precision

//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Run with `cargo test --test acceptance` (use
//! `--release -- --nocapture` to watch the lines go by at full speed).
//!
//! Reference configuration throughout: a single transition at 10000 cm⁻¹
//! on an overdamped-Brownian-oscillator bath with λ = 100 cm⁻¹,
//! τ_corr = 100 fs, 𝒯 = 300 K, evaluated in the rotating frame at the
//! transition frequency.

use std::fs;
use std::path::PathBuf;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rephase::bath::{g_from_egcf, obo_g, CorrelationMatrix, LineBroadening, OboParams, TabulatedEgcf};
use rephase::cli::{cmd_spectrum2d, Overrides, RunContext};
use rephase::cumulant::{
    field_exact, field_rdm, r2_exact, PathwaySpec, ResponseField, SystemSpec,
};
use rephase::grid::TimeGrid;
use rephase::propagator::{coeff_i, coeff_m, k2, k3, r2_via_master};
use rephase::spectra::{absorption, lineshape_metrics, spectrum2d, Spectrum2D, Window};
use rephase::units::wavenumber_to_angular;

const OMEGA_CM: f64 = 10_000.0;
const LAMBDA_CM: f64 = 100.0;
const TAU_CORR_FS: f64 = 100.0;
const TEMPERATURE_K: f64 = 300.0;
const WAITING_TIMES: [f64; 3] = [0.0, 100.0, 500.0];

/// Exact ellipticity of the reference spectrum at T = 0 (cos² window,
/// 251-point grids at 2 fs), frozen from this implementation's moment
/// evaluation as a regression anchor.
const FROZEN_EXACT_ELLIPTICITY_T0: f64 = 0.268215807701742;

fn reference_system(lambda_cm: f64, tau_corr_fs: f64) -> SystemSpec {
    let p = OboParams::new(lambda_cm, tau_corr_fs, TEMPERATURE_K).unwrap();
    let base = LineBroadening::analytic_obo(p);
    let corr = CorrelationMatrix::uncorrelated(1, base).unwrap();
    SystemSpec::new(&[OMEGA_CM], &[1.0], corr, OMEGA_CM).unwrap()
}

fn acceptance_grid() -> TimeGrid {
    // τ, t ∈ [0, 500] fs at 2 fs.
    TimeGrid::new(2.0, 251).unwrap()
}

fn max_abs_dev(a: &ResponseField, b: &ResponseField) -> f64 {
    a.values
        .iter()
        .zip(b.values.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Max |propagated − exact| / max |exact| over all waiting times.
fn equivalence_deviation(rk_step: f64) -> f64 {
    let sys = reference_system(LAMBDA_CM, TAU_CORR_FS);
    let pw = PathwaySpec::new(0, 0);
    let grid = acceptance_grid();
    let mut worst = 0.0f64;
    for &t_wait in &WAITING_TIMES {
        let exact = field_exact(&sys, pw, &grid, &grid, t_wait).unwrap();
        let prop = r2_via_master(&sys, pw, &grid, &grid, t_wait, rk_step).unwrap();
        worst = worst.max(max_abs_dev(&exact, &prop) / exact.max_abs());
    }
    worst
}

fn pass(name: &str, detail: String) {
    println!("PASS {name}: {detail}");
}

#[test]
fn criterion_01_master_equation_exactness() {
    let dev = equivalence_deviation(1.0);
    assert!(
        dev < 1e-4,
        "FAIL master_equation_exactness: relative deviation {dev:.3e} >= 1e-4"
    );
    pass(
        "master_equation_exactness",
        format!("max relative deviation {dev:.3e} < 1e-4 over T ∈ {WAITING_TIMES:?}"),
    );
}

#[test]
fn criterion_02_convergence_order() {
    let dev_h = equivalence_deviation(1.0);
    let dev_half = equivalence_deviation(0.5);
    assert!(
        dev_half <= (dev_h / 8.0).max(1e-12),
        "FAIL convergence_order: {dev_h:.3e} -> {dev_half:.3e} under step halving (need ≥ 8×)"
    );
    pass(
        "convergence_order",
        format!(
            "halving 1 fs → 0.5 fs reduced deviation {dev_h:.3e} → {dev_half:.3e} (×{:.1})",
            dev_h / dev_half
        ),
    );
}

#[test]
fn criterion_03_algebraic_identities() {
    let sys = reference_system(LAMBDA_CM, TAU_CORR_FS);
    let pw = PathwaySpec::new(0, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let mut worst_k2 = 0.0f64;
    let mut worst_k3 = 0.0f64;
    for _ in 0..10_000 {
        let t = rng.random_range(0.0..700.0);
        let t_wait = rng.random_range(0.0..700.0);
        let tau = rng.random_range(0.0..700.0);
        worst_k2 = worst_k2.max(k2(&sys, pw, t_wait, tau).unwrap().norm());
        let sum = k3(&sys, pw, t, t_wait, tau).unwrap()
            + coeff_i(&sys, 0, t, t_wait, tau).unwrap()
            + coeff_m(&sys, 0, t).unwrap();
        worst_k3 = worst_k3.max(sum.norm());
    }
    assert!(
        worst_k2 <= 1e-12,
        "FAIL algebraic_identities: max |K2(ii)| = {worst_k2:.3e} > 1e-12"
    );
    assert!(
        worst_k3 <= 1e-12,
        "FAIL algebraic_identities: max |K3 + I + M| = {worst_k3:.3e} > 1e-12"
    );
    pass(
        "algebraic_identities",
        format!("10^4 triples: max |K2(ii)| = {worst_k2:.1e}, max |K3+I+M| = {worst_k3:.1e}"),
    );
}

#[test]
fn criterion_04_bath_round_trip() {
    let p = OboParams::new(LAMBDA_CM, TAU_CORR_FS, TEMPERATURE_K).unwrap();
    let step = 0.5;
    let n = 2001; // [0, 1000] fs
    let egcf = TabulatedEgcf::from_obo(&p, step, n + 100).unwrap();
    let grid = TimeGrid::new(step, n).unwrap();
    let lb = g_from_egcf(&egcf, &grid).unwrap();
    let mut max_rel = 0.0f64;
    for t in grid.times().skip(1) {
        let reference = obo_g(&p, t).unwrap();
        max_rel = max_rel.max((lb.g(t) - reference).norm() / reference.norm());
    }
    assert!(
        max_rel < 1e-6,
        "FAIL bath_round_trip: max relative error {max_rel:.3e} >= 1e-6"
    );
    pass(
        "bath_round_trip",
        format!("double quadrature vs closed form: max relative error {max_rel:.3e} < 1e-6"),
    );
}

#[test]
fn criterion_05_degenerate_limit() {
    let sys = reference_system(0.0, TAU_CORR_FS);
    let pw = PathwaySpec::new(0, 0);
    let grid = acceptance_grid();
    let mut worst_pair = 0.0f64;
    let mut worst_flatness = 0.0f64;
    for &t_wait in &WAITING_TIMES {
        let exact = field_exact(&sys, pw, &grid, &grid, t_wait).unwrap();
        let rdm = field_rdm(&sys, pw, &grid, &grid, t_wait).unwrap();
        let prop = r2_via_master(&sys, pw, &grid, &grid, t_wait, 1.0).unwrap();
        worst_pair = worst_pair.max(max_abs_dev(&exact, &rdm));
        worst_pair = worst_pair.max(max_abs_dev(&exact, &prop));
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for v in exact.values.iter() {
            lo = lo.min(v.norm());
            hi = hi.max(v.norm());
        }
        worst_flatness = worst_flatness.max(hi - lo);
    }
    assert!(
        worst_pair <= 1e-13,
        "FAIL degenerate_limit: fields differ by {worst_pair:.3e}"
    );
    assert!(
        worst_flatness <= 1e-13,
        "FAIL degenerate_limit: |R2| varies by {worst_flatness:.3e} over the grid"
    );
    pass(
        "degenerate_limit",
        format!(
            "λ=0: exact/rdm/propagated agree to {worst_pair:.1e}, |R2| flat to {worst_flatness:.1e}"
        ),
    );
}

#[test]
fn criterion_06_log_derivative_cross_check() {
    let sys = reference_system(LAMBDA_CM, TAU_CORR_FS);
    let pw = PathwaySpec::new(0, 0);
    let w_j = sys.omega_shifted(0);
    let mut min_order = f64::INFINITY;
    for &(t, t_wait, tau) in &[
        (50.0, 0.0, 75.0),
        (120.0, 100.0, 40.0),
        (260.0, 500.0, 180.0),
        (400.0, 100.0, 300.0),
    ] {
        let coeff = C64::new(0.0, -w_j) + k3(&sys, pw, t, t_wait, tau).unwrap();
        let err = |h: f64| {
            let plus = r2_exact(&sys, pw, tau, t_wait, t + h).unwrap();
            let minus = r2_exact(&sys, pw, tau, t_wait, t - h).unwrap();
            ((plus / minus).ln() / (2.0 * h) - coeff).norm()
        };
        let order = (err(0.5) / err(0.25)).log2();
        min_order = min_order.min(order);
    }
    assert!(
        min_order >= 1.9,
        "FAIL log_derivative_cross_check: observed order {min_order:.2} < 1.9"
    );
    pass(
        "log_derivative_cross_check",
        format!("finite difference of log R2 matches −iω + K3 at order {min_order:.2} ≥ 1.9"),
    );
}

/// Independent brute-force moment evaluation over the ≥ 50% region of the
/// magnitude map, mirroring the metric definition with separate code.
fn brute_force_ellipticity(spec: &Spectrum2D) -> f64 {
    let (n_tau, n_t) = spec.magnitude.dim();
    let mut peak = f64::NEG_INFINITY;
    let (mut pk, mut pl) = (0, 0);
    for k in 0..n_tau {
        for l in 0..n_t {
            if spec.magnitude[[k, l]] > peak {
                peak = spec.magnitude[[k, l]];
                pk = k;
                pl = l;
            }
        }
    }
    let (w0, t0) = (spec.omega_tau.value(pk), spec.omega_t.value(pl));
    let (mut sw, mut su, mut sv) = (0.0, 0.0, 0.0);
    for k in 0..n_tau {
        for l in 0..n_t {
            let v = spec.magnitude[[k, l]];
            if v >= 0.5 * peak {
                let du = spec.omega_t.value(l) - t0 + spec.omega_tau.value(k) - w0;
                let dv = spec.omega_t.value(l) - t0 - (spec.omega_tau.value(k) - w0);
                sw += v;
                su += v * du * du / 2.0;
                sv += v * dv * dv / 2.0;
            }
        }
    }
    (su - sv) / (su + sv).max(f64::MIN_POSITIVE) * sw.signum()
}

#[test]
fn criterion_07_lineshape_contrast() {
    let sys = reference_system(LAMBDA_CM, TAU_CORR_FS);
    let pw = PathwaySpec::new(0, 0);
    let grid = acceptance_grid();

    let mut exact_ellipticities = Vec::new();
    for &t_wait in &WAITING_TIMES {
        let field = field_exact(&sys, pw, &grid, &grid, t_wait).unwrap();
        let spec = spectrum2d(&field, Window::Cos2).unwrap();
        let metrics = lineshape_metrics(&spec).unwrap();
        if t_wait == 0.0 {
            let brute = brute_force_ellipticity(&spec);
            assert!(
                (metrics.ellipticity - brute).abs() < 1e-12,
                "FAIL lineshape_contrast: metric {} disagrees with brute-force {brute}",
                metrics.ellipticity
            );
            assert!(
                (metrics.ellipticity - FROZEN_EXACT_ELLIPTICITY_T0).abs() < 1e-6,
                "FAIL lineshape_contrast: ellipticity {} drifted from frozen {}",
                metrics.ellipticity,
                FROZEN_EXACT_ELLIPTICITY_T0
            );
        }
        exact_ellipticities.push(metrics.ellipticity);
    }

    let rdm_field = field_rdm(&sys, pw, &grid, &grid, 0.0).unwrap();
    let rdm = lineshape_metrics(&spectrum2d(&rdm_field, Window::Cos2).unwrap()).unwrap();
    assert!(
        rdm.ellipticity.abs() <= 0.05,
        "FAIL lineshape_contrast: |rdm ellipticity| = {} > 0.05",
        rdm.ellipticity.abs()
    );
    assert!(
        exact_ellipticities[0] - rdm.ellipticity >= 0.2,
        "FAIL lineshape_contrast: contrast {} < 0.2",
        exact_ellipticities[0] - rdm.ellipticity
    );
    assert!(
        exact_ellipticities[0] > exact_ellipticities[1]
            && exact_ellipticities[1] > exact_ellipticities[2],
        "FAIL lineshape_contrast: ellipticity not decreasing over T: {exact_ellipticities:?}"
    );
    pass(
        "lineshape_contrast",
        format!(
            "exact {:.4} vs rdm {:.4} at T=0; decay over T: {:.4} → {:.4} → {:.4}",
            exact_ellipticities[0],
            rdm.ellipticity,
            exact_ellipticities[0],
            exact_ellipticities[1],
            exact_ellipticities[2]
        ),
    );
}

#[test]
fn criterion_08_photon_echo() {
    // Slow bath: τ_corr = 10 ps; the rephasing maximum sits at t ≈ τ.
    let sys = reference_system(LAMBDA_CM, 10_000.0);
    let pw = PathwaySpec::new(0, 0);
    let grid = acceptance_grid();
    let tau = 200.0;
    let mut best = (0usize, f64::NEG_INFINITY);
    for (l, t) in grid.times().enumerate() {
        let v = r2_exact(&sys, pw, tau, 0.0, t).unwrap().norm();
        if v > best.1 {
            best = (l, v);
        }
    }
    let t_peak = grid.time(best.0);
    assert!(
        (t_peak - tau).abs() <= 2.0 * grid.step_fs(),
        "FAIL photon_echo: |R2| peaks at t = {t_peak} fs, expected within 2 steps of {tau} fs"
    );
    pass(
        "photon_echo",
        format!("|R2(t, T=0, τ=200)| peaks at t = {t_peak} fs (grid step {} fs)", grid.step_fs()),
    );
}

#[test]
fn criterion_09_absorption_sanity() {
    // λ = 0: peak in the bin containing the transition. The carrier sits
    // 100 cm⁻¹ below so the line is resolvable on the grid.
    let p = OboParams::new(0.0, TAU_CORR_FS, TEMPERATURE_K).unwrap();
    let corr = CorrelationMatrix::uncorrelated(1, LineBroadening::analytic_obo(p)).unwrap();
    let free = SystemSpec::new(&[OMEGA_CM], &[1.0], corr, OMEGA_CM - 100.0).unwrap();
    let grid = TimeGrid::new(1.0, 2048).unwrap();
    let spec = absorption(&free, &grid, Window::Cos2).unwrap();
    let omega_ig = wavenumber_to_angular(OMEGA_CM);
    let dev_free = (spec.peak_omega() - omega_ig).abs();
    assert!(
        dev_free <= spec.axis.step(),
        "FAIL absorption_sanity: λ=0 peak off by {dev_free:.3e} rad/fs (> one bin)"
    );

    let sys = reference_system(LAMBDA_CM, TAU_CORR_FS);
    let spec_obo = absorption(&sys, &grid, Window::Cos2).unwrap();
    let lambda = wavenumber_to_angular(LAMBDA_CM);
    let dev_obo = (spec_obo.peak_omega() - omega_ig).abs();
    assert!(
        dev_obo <= lambda,
        "FAIL absorption_sanity: OBO peak displaced by {dev_obo:.3e} > λ = {lambda:.3e}"
    );
    pass(
        "absorption_sanity",
        format!(
            "λ=0 peak within one bin ({dev_free:.1e} rad/fs); OBO displacement {dev_obo:.3e} ≤ λ"
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.toml");
    let out_dir = dir.path().join("out");
    fs::write(
        &config_path,
        format!(
            r#"
[system]
omega_cm = [{OMEGA_CM}]
dipole = [1.0]
rotating_frame_cm = {OMEGA_CM}

[bath]
model = "obo"
lambda_cm = {LAMBDA_CM}
tau_corr_fs = {TAU_CORR_FS}
temperature_k = {TEMPERATURE_K}

[grids]
tau_step_fs = 4.0
tau_count = 64
t_step_fs = 4.0
t_count = 64
waiting_times_fs = [0.0, 100.0]

[run]
out_dir = "{}"
"#,
            out_dir.display()
        ),
    )
    .unwrap();

    let run = || -> Vec<(PathBuf, Vec<u8>)> {
        let ctx = RunContext::prepare(&config_path, &Overrides::default()).unwrap();
        let mut files = cmd_spectrum2d(&ctx).unwrap();
        files.sort();
        files
            .into_iter()
            .map(|p| {
                let bytes = fs::read(&p).unwrap();
                (p, bytes)
            })
            .collect()
    };

    let first = run();
    let second = run();
    assert_eq!(first.len(), second.len());
    for ((path_a, bytes_a), (path_b, bytes_b)) in first.iter().zip(&second) {
        assert_eq!(path_a, path_b);
        assert!(
            bytes_a == bytes_b,
            "FAIL determinism: {} differs between runs",
            path_a.display()
        );
    }
    pass(
        "determinism",
        format!("{} output files byte-identical across reruns", first.len()),
    );
}
