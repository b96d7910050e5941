#![allow(clippy::excessive_precision)] // frozen oracle constants keep full precision

//! Exercises the C ABI from Rust: lifecycle, status codes, and numerical
//! agreement with the underlying library.

use std::ffi::CStr;
use std::ptr;

use rephase_ffi::*;

unsafe fn reference_engine() -> *mut RpEngine {
    let omega = [10_000.0f64];
    let dipole = [1.0f64];
    let mut engine: *mut RpEngine = ptr::null_mut();
    let status = rp_engine_new_obo(
        omega.as_ptr(),
        dipole.as_ptr(),
        1,
        ptr::null(),
        1,
        1,
        100.0,
        100.0,
        300.0,
        10_000.0,
        &mut engine,
    );
    assert_eq!(status, RpStatus::Ok);
    assert!(!engine.is_null());
    engine
}

#[test]
fn engine_lifecycle_and_r2() {
    unsafe {
        let engine = reference_engine();
        let (mut re, mut im) = (0.0f64, 0.0f64);
        let status = rp_engine_r2_exact(engine, 100.0, 0.0, 100.0, &mut re, &mut im);
        assert_eq!(status, RpStatus::Ok);
        // Frozen from tools/highprec_oracle.py (same values the core tests
        // pin down).
        assert!((re - 0.060685600640320109703).abs() < 1e-12);
        assert!((im - 0.056837068424631334298).abs() < 1e-12);
        rp_engine_free(engine);
        rp_engine_free(ptr::null_mut()); // no-op
    }
}

#[test]
fn null_and_domain_errors() {
    unsafe {
        let engine = reference_engine();
        let (mut re, mut im) = (0.0f64, 0.0f64);
        assert_eq!(
            rp_engine_r2_exact(ptr::null(), 0.0, 0.0, 0.0, &mut re, &mut im),
            RpStatus::NullPointer
        );
        assert_eq!(
            rp_engine_r2_exact(engine, 0.0, 0.0, 0.0, ptr::null_mut(), &mut im),
            RpStatus::NullPointer
        );
        assert_eq!(
            rp_engine_r2_exact(engine, -1.0, 0.0, 0.0, &mut re, &mut im),
            RpStatus::OutOfDomain
        );
        rp_engine_free(engine);
    }
}

#[test]
fn constructor_validation() {
    unsafe {
        let omega = [10_000.0f64, 10_400.0];
        let dipole = [1.0f64, 1.0];
        let mut engine: *mut RpEngine = ptr::null_mut();
        // Pathway index out of range.
        let status = rp_engine_new_obo(
            omega.as_ptr(),
            dipole.as_ptr(),
            2,
            ptr::null(),
            3,
            1,
            100.0,
            100.0,
            300.0,
            0.0,
            &mut engine,
        );
        assert_eq!(status, RpStatus::InvalidArgument);
        // Negative correlation time.
        let status = rp_engine_new_obo(
            omega.as_ptr(),
            dipole.as_ptr(),
            2,
            ptr::null(),
            1,
            1,
            100.0,
            -5.0,
            300.0,
            0.0,
            &mut engine,
        );
        assert_eq!(status, RpStatus::InvalidArgument);
        // Correlation matrix with a bad diagonal.
        let bad_corr = [0.5f64, 0.0, 0.0, 1.0];
        let status = rp_engine_new_obo(
            omega.as_ptr(),
            dipole.as_ptr(),
            2,
            bad_corr.as_ptr(),
            1,
            1,
            100.0,
            100.0,
            300.0,
            0.0,
            &mut engine,
        );
        assert_eq!(status, RpStatus::InvalidArgument);
    }
}

#[test]
fn rdm_pathway_restriction() {
    unsafe {
        let omega = [10_000.0f64, 10_400.0];
        let dipole = [1.0f64, 1.0];
        let mut engine: *mut RpEngine = ptr::null_mut();
        let status = rp_engine_new_obo(
            omega.as_ptr(),
            dipole.as_ptr(),
            2,
            ptr::null(),
            1,
            2,
            100.0,
            100.0,
            300.0,
            10_000.0,
            &mut engine,
        );
        assert_eq!(status, RpStatus::Ok);
        let (mut re, mut im) = (0.0f64, 0.0f64);
        assert_eq!(
            rp_engine_r2_rdm(engine, 10.0, 0.0, 10.0, &mut re, &mut im),
            RpStatus::UnsupportedPathway
        );
        // K2 is defined for the mixed pathway.
        assert_eq!(
            rp_engine_k2(engine, 100.0, 100.0, &mut re, &mut im),
            RpStatus::Ok
        );
        rp_engine_free(engine);
    }
}

#[test]
fn propagated_field_matches_exact_field() {
    unsafe {
        let engine = reference_engine();
        let n = 32usize;
        let mut exact_re = vec![0.0f64; n * n];
        let mut exact_im = vec![0.0f64; n * n];
        let mut prop_re = vec![0.0f64; n * n];
        let mut prop_im = vec![0.0f64; n * n];
        let status = rp_engine_response_field(
            engine,
            RpProvenance::Exact,
            4.0,
            n,
            4.0,
            n,
            100.0,
            1.0,
            exact_re.as_mut_ptr(),
            exact_im.as_mut_ptr(),
        );
        assert_eq!(status, RpStatus::Ok);
        let status = rp_engine_response_field(
            engine,
            RpProvenance::Propagated,
            4.0,
            n,
            4.0,
            n,
            100.0,
            1.0,
            prop_re.as_mut_ptr(),
            prop_im.as_mut_ptr(),
        );
        assert_eq!(status, RpStatus::Ok);
        let mut max_dev = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..n * n {
            let dre = exact_re[k] - prop_re[k];
            let dim = exact_im[k] - prop_im[k];
            max_dev = max_dev.max((dre * dre + dim * dim).sqrt());
            scale = scale.max((exact_re[k].powi(2) + exact_im[k].powi(2)).sqrt());
        }
        assert!(max_dev / scale < 1e-4, "relative deviation {}", max_dev / scale);
        rp_engine_free(engine);
    }
}

#[test]
fn obo_helpers_and_strings() {
    unsafe {
        let (mut re, mut im) = (0.0f64, 0.0f64);
        assert_eq!(rp_obo_g(100.0, 100.0, 300.0, 100.0, &mut re, &mut im), RpStatus::Ok);
        assert!((re - 2.721663727816697497).abs() < 1e-12);
        assert!((im + 0.6929566859432924158).abs() < 1e-12);
        assert_eq!(
            rp_obo_gdot(100.0, 100.0, 300.0, 0.0, &mut re, &mut im),
            RpStatus::Ok
        );
        assert_eq!((re, im), (0.0, 0.0));
        assert_eq!(
            rp_obo_g(-1.0, 100.0, 300.0, 0.0, &mut re, &mut im),
            RpStatus::InvalidArgument
        );

        for status in [
            RpStatus::Ok,
            RpStatus::NullPointer,
            RpStatus::InvalidArgument,
            RpStatus::OutOfDomain,
            RpStatus::UnsupportedPathway,
            RpStatus::Internal,
        ] {
            let msg = rp_status_message(status);
            assert!(!msg.is_null());
            assert!(!CStr::from_ptr(msg).to_str().unwrap().is_empty());
        }
        let version = CStr::from_ptr(rp_version()).to_str().unwrap();
        assert_eq!(version, env!("CARGO_PKG_VERSION"));
    }
}
