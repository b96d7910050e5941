//! C ABI over the rephase engine.
//!
//! Conventions:
//! * An engine is built once from system + bath parameters and then queried;
//!   it is an opaque handle, freed with [`rp_engine_free`].
//! * Every function returns an [`RpStatus`]; results come back through out
//!   pointers. No function panics across the boundary — panics are caught
//!   and surfaced as `RP_STATUS_INTERNAL`.
//! * Level and pathway indices are 1-based, matching the config format of
//!   the CLI. Frequencies are wavenumbers in cm⁻¹, times are fs.
//!
//! The header `include/rephase.h` is regenerated by cbindgen on every
//! build.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use num_complex::Complex64 as C64;
use rephase::bath::{obo_g, obo_gdot, CorrelationMatrix, LineBroadening, OboParams};
use rephase::cumulant::{
    field_exact, field_rdm, linear_coherence, r2_exact, r2_rdm, PathwaySpec, SystemSpec,
};
use rephase::grid::TimeGrid;
use rephase::propagator::{k2, k3, r2_via_master};
use rephase::Error;

/// Status code returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Parameter validation failed (bad sizes, indices, negative values…).
    InvalidArgument = 2,
    /// Arguments outside the mathematical domain (negative times, table
    /// range exceeded).
    OutOfDomain = 3,
    /// The requested quantity is not defined for this pathway.
    UnsupportedPathway = 4,
    /// An internal invariant failed; report this as a bug.
    Internal = 5,
}

/// Which route produces a response field.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpProvenance {
    /// Closed-form second-cumulant expression.
    Exact = 0,
    /// Ground-state-projector approximation (diagonal pathways only).
    Rdm = 1,
    /// Master-equation propagation (fixed-step RK4).
    Propagated = 2,
}

/// Opaque engine handle.
pub struct RpEngine {
    system: SystemSpec,
    pathway: PathwaySpec,
}

fn status_of(err: &Error) -> RpStatus {
    match err {
        Error::NegativeTime(_) | Error::OutOfRange { .. } => RpStatus::OutOfDomain,
        Error::UnsupportedPathway { .. } => RpStatus::UnsupportedPathway,
        Error::InvalidParameter(_)
        | Error::InvalidLevel { .. }
        | Error::BadGrid(_)
        | Error::BadStep(_)
        | Error::BadTable(_)
        | Error::Config(_)
        | Error::AxisMismatch(_)
        | Error::PeakOnBoundary
        | Error::AmbiguousPeak => RpStatus::InvalidArgument,
        Error::Io { .. } => RpStatus::Internal,
    }
}

/// Run a closure, translating panics into `RP_STATUS_INTERNAL`.
fn guarded<F: FnOnce() -> RpStatus>(f: F) -> RpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => RpStatus::Internal,
    }
}

unsafe fn write_complex(re: *mut f64, im: *mut f64, z: C64) -> RpStatus {
    if re.is_null() || im.is_null() {
        return RpStatus::NullPointer;
    }
    *re = z.re;
    *im = z.im;
    RpStatus::Ok
}

/// Build an engine for a multilevel system on an overdamped-Brownian-
/// oscillator bath.
///
/// `omega_cm` and `dipole` are arrays of `n_levels` entries. `correlation`
/// may be null (uncorrelated levels) or an `n_levels²` row-major matrix of
/// coefficients in [−1, 1] with unit diagonal. `pathway_i` / `pathway_j`
/// are 1-based level indices of the rephasing pathway. `lambda_cm = 0`
/// gives the bath-free limit.
///
/// # Safety
/// `omega_cm` and `dipole` must point to `n_levels` doubles;
/// `correlation`, when non-null, to `n_levels * n_levels` doubles. On
/// success `*out` owns the engine and must be released with
/// [`rp_engine_free`].
#[no_mangle]
pub unsafe extern "C" fn rp_engine_new_obo(
    omega_cm: *const f64,
    dipole: *const f64,
    n_levels: usize,
    correlation: *const f64,
    pathway_i: usize,
    pathway_j: usize,
    lambda_cm: f64,
    tau_corr_fs: f64,
    temperature_k: f64,
    rotating_frame_cm: f64,
    out: *mut *mut RpEngine,
) -> RpStatus {
    guarded(|| {
        if omega_cm.is_null() || dipole.is_null() || out.is_null() {
            return RpStatus::NullPointer;
        }
        if n_levels == 0 {
            return RpStatus::InvalidArgument;
        }
        let omegas = slice::from_raw_parts(omega_cm, n_levels);
        let dipoles = slice::from_raw_parts(dipole, n_levels);

        let params = match OboParams::new(lambda_cm, tau_corr_fs, temperature_k) {
            Ok(p) => p,
            Err(e) => return status_of(&e),
        };
        let base = LineBroadening::analytic_obo(params);
        let matrix = if correlation.is_null() {
            CorrelationMatrix::uncorrelated(n_levels, base)
        } else {
            let coeffs = slice::from_raw_parts(correlation, n_levels * n_levels).to_vec();
            CorrelationMatrix::new(base, n_levels, coeffs)
        };
        let matrix = match matrix {
            Ok(m) => m,
            Err(e) => return status_of(&e),
        };
        let system = match SystemSpec::new(omegas, dipoles, matrix, rotating_frame_cm) {
            Ok(s) => s,
            Err(e) => return status_of(&e),
        };
        if pathway_i == 0 || pathway_j == 0 || pathway_i > n_levels || pathway_j > n_levels {
            return RpStatus::InvalidArgument;
        }
        let engine = Box::new(RpEngine {
            system,
            pathway: PathwaySpec::new(pathway_i - 1, pathway_j - 1),
        });
        *out = Box::into_raw(engine);
        RpStatus::Ok
    })
}

/// Release an engine. Passing null is a no-op.
///
/// # Safety
/// `engine` must be null or a pointer obtained from an engine constructor
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn rp_engine_free(engine: *mut RpEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

macro_rules! deref_engine {
    ($engine:expr) => {
        match $engine.as_ref() {
            Some(e) => e,
            None => return RpStatus::NullPointer,
        }
    };
}

/// Optical coherence ρ_ig(t) of `level` (1-based).
///
/// # Safety
/// `engine` must be a live engine; `re`/`im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_engine_linear_coherence(
    engine: *const RpEngine,
    level: usize,
    t_fs: f64,
    re: *mut f64,
    im: *mut f64,
) -> RpStatus {
    guarded(|| {
        let e = deref_engine!(engine);
        if level == 0 {
            return RpStatus::InvalidArgument;
        }
        match linear_coherence(&e.system, level - 1, t_fs) {
            Ok(z) => write_complex(re, im, z),
            Err(err) => status_of(&err),
        }
    })
}

/// Exact rephasing response R₂(t, T, τ) for the engine's pathway.
///
/// # Safety
/// `engine` must be a live engine; `re`/`im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_engine_r2_exact(
    engine: *const RpEngine,
    tau_fs: f64,
    t_wait_fs: f64,
    t_fs: f64,
    re: *mut f64,
    im: *mut f64,
) -> RpStatus {
    guarded(|| {
        let e = deref_engine!(engine);
        match r2_exact(&e.system, e.pathway, tau_fs, t_wait_fs, t_fs) {
            Ok(z) => write_complex(re, im, z),
            Err(err) => status_of(&err),
        }
    })
}

/// Ground-state-projector response; defined for diagonal pathways only.
///
/// # Safety
/// `engine` must be a live engine; `re`/`im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_engine_r2_rdm(
    engine: *const RpEngine,
    tau_fs: f64,
    t_wait_fs: f64,
    t_fs: f64,
    re: *mut f64,
    im: *mut f64,
) -> RpStatus {
    guarded(|| {
        let e = deref_engine!(engine);
        match r2_rdm(&e.system, e.pathway, tau_fs, t_wait_fs, t_fs) {
            Ok(z) => write_complex(re, im, z),
            Err(err) => status_of(&err),
        }
    })
}

/// Second-interval relaxation coefficient 𝒦₂(T, τ), rad/fs.
///
/// # Safety
/// `engine` must be a live engine; `re`/`im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_engine_k2(
    engine: *const RpEngine,
    t_wait_fs: f64,
    tau_fs: f64,
    re: *mut f64,
    im: *mut f64,
) -> RpStatus {
    guarded(|| {
        let e = deref_engine!(engine);
        match k2(&e.system, e.pathway, t_wait_fs, tau_fs) {
            Ok(z) => write_complex(re, im, z),
            Err(err) => status_of(&err),
        }
    })
}

/// Third-interval relaxation coefficient 𝒦₃(t, T, τ), rad/fs.
///
/// # Safety
/// `engine` must be a live engine; `re`/`im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_engine_k3(
    engine: *const RpEngine,
    t_fs: f64,
    t_wait_fs: f64,
    tau_fs: f64,
    re: *mut f64,
    im: *mut f64,
) -> RpStatus {
    guarded(|| {
        let e = deref_engine!(engine);
        match k3(&e.system, e.pathway, t_fs, t_wait_fs, tau_fs) {
            Ok(z) => write_complex(re, im, z),
            Err(err) => status_of(&err),
        }
    })
}

/// Sweep the response over a (τ, t) grid at one waiting time, filling the
/// caller's `tau_count * t_count` buffers row-major (τ outer, t inner).
/// `rk_step_fs` only matters for `RP_PROVENANCE_PROPAGATED`.
///
/// # Safety
/// `engine` must be a live engine; `out_re` and `out_im` must point to
/// `tau_count * t_count` writable doubles each.
#[no_mangle]
pub unsafe extern "C" fn rp_engine_response_field(
    engine: *const RpEngine,
    provenance: RpProvenance,
    tau_step_fs: f64,
    tau_count: usize,
    t_step_fs: f64,
    t_count: usize,
    t_wait_fs: f64,
    rk_step_fs: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RpStatus {
    guarded(|| {
        let e = deref_engine!(engine);
        if out_re.is_null() || out_im.is_null() {
            return RpStatus::NullPointer;
        }
        let tau_grid = match TimeGrid::new(tau_step_fs, tau_count) {
            Ok(g) => g,
            Err(err) => return status_of(&err),
        };
        let t_grid = match TimeGrid::new(t_step_fs, t_count) {
            Ok(g) => g,
            Err(err) => return status_of(&err),
        };
        let field = match provenance {
            RpProvenance::Exact => field_exact(&e.system, e.pathway, &tau_grid, &t_grid, t_wait_fs),
            RpProvenance::Rdm => field_rdm(&e.system, e.pathway, &tau_grid, &t_grid, t_wait_fs),
            RpProvenance::Propagated => r2_via_master(
                &e.system,
                e.pathway,
                &tau_grid,
                &t_grid,
                t_wait_fs,
                rk_step_fs,
            ),
        };
        let field = match field {
            Ok(f) => f,
            Err(err) => return status_of(&err),
        };
        let re = slice::from_raw_parts_mut(out_re, tau_count * t_count);
        let im = slice::from_raw_parts_mut(out_im, tau_count * t_count);
        for (k, z) in field.values.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        RpStatus::Ok
    })
}

/// Line-broadening function g(t) of the OBO model (standalone, no engine).
///
/// # Safety
/// `re`/`im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_obo_g(
    lambda_cm: f64,
    tau_corr_fs: f64,
    temperature_k: f64,
    t_fs: f64,
    re: *mut f64,
    im: *mut f64,
) -> RpStatus {
    guarded(|| {
        let params = match OboParams::new(lambda_cm, tau_corr_fs, temperature_k) {
            Ok(p) => p,
            Err(e) => return status_of(&e),
        };
        match obo_g(&params, t_fs) {
            Ok(z) => write_complex(re, im, z),
            Err(e) => status_of(&e),
        }
    })
}

/// First derivative ġ(t) of the OBO line-broadening function, rad/fs.
///
/// # Safety
/// `re`/`im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rp_obo_gdot(
    lambda_cm: f64,
    tau_corr_fs: f64,
    temperature_k: f64,
    t_fs: f64,
    re: *mut f64,
    im: *mut f64,
) -> RpStatus {
    guarded(|| {
        let params = match OboParams::new(lambda_cm, tau_corr_fs, temperature_k) {
            Ok(p) => p,
            Err(e) => return status_of(&e),
        };
        match obo_gdot(&params, t_fs) {
            Ok(z) => write_complex(re, im, z),
            Err(e) => status_of(&e),
        }
    })
}

/// Static human-readable description of a status code.
#[no_mangle]
pub extern "C" fn rp_status_message(status: RpStatus) -> *const c_char {
    let bytes: &'static [u8] = match status {
        RpStatus::Ok => b"ok\0",
        RpStatus::NullPointer => b"null pointer argument\0",
        RpStatus::InvalidArgument => b"invalid argument\0",
        RpStatus::OutOfDomain => b"argument outside mathematical domain\0",
        RpStatus::UnsupportedPathway => b"operation undefined for this pathway\0",
        RpStatus::Internal => b"internal error\0",
    };
    bytes.as_ptr().cast()
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn rp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// Engines may be shared across caller threads.
#[allow(dead_code)]
fn assert_engine_thread_safe() {
    fn check<T: Send + Sync>() {}
    check::<RpEngine>();
}
