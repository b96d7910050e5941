//! Deterministic output writers: CSV grids, NetPBM (P5) heatmaps, and JSON
//! sidecars.
//!
//! Floats are formatted with Rust's shortest round-trip representation, so
//! identical inputs produce byte-identical files. Every data file gets a
//! `<name>.json` sidecar carrying provenance (config hash, code version,
//! units, parameters); sidecar JSON uses sorted keys.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::cumulant::ResponseField;
use crate::grid::TimeGrid;
use crate::spectra::{Spectrum1D, Spectrum2D};
use crate::units::angular_to_wavenumber;
use crate::{Error, Result};

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io("create directory", parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io("write", path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    write_bytes(path, text.as_bytes())
}

/// Write `value` as pretty JSON with a trailing newline. Maps in
/// `serde_json::Value` iterate in sorted key order, keeping output stable.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

/// Sidecar path for a data file: `<file>.json` alongside it.
pub fn sidecar_path(data_path: &Path) -> PathBuf {
    let mut s = data_path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// `t_fs,value` series.
pub fn series_csv(grid: &TimeGrid, values: &[f64]) -> String {
    let mut out = String::with_capacity(values.len() * 24);
    out.push_str("t_fs,value\n");
    for (t, v) in grid.times().zip(values) {
        let _ = writeln!(out, "{t},{v}");
    }
    out
}

/// `tau_fs,t_fs,re,im` rows, τ outer, t inner.
pub fn response_csv(field: &ResponseField) -> String {
    let (n_tau, n_t) = field.values.dim();
    let mut out = String::with_capacity(n_tau * n_t * 48);
    out.push_str("tau_fs,t_fs,re,im\n");
    for k in 0..n_tau {
        let tau = field.tau_axis.time(k);
        for l in 0..n_t {
            let t = field.t_axis.time(l);
            let z = field.values[[k, l]];
            let _ = writeln!(out, "{tau},{t},{},{}", z.re, z.im);
        }
    }
    out
}

/// `omega_radfs,omega_cm,value` rows.
pub fn spectrum1d_csv(spec: &Spectrum1D) -> String {
    let mut out = String::with_capacity(spec.values.len() * 40);
    out.push_str("omega_radfs,omega_cm,value\n");
    for (w, v) in spec.axis.values().zip(&spec.values) {
        let _ = writeln!(out, "{w},{},{v}", angular_to_wavenumber(w));
    }
    out
}

/// `omega_tau_radfs,omega_t_radfs,value` rows, ω_τ outer, ω_t inner.
pub fn spectrum2d_csv(spec: &Spectrum2D) -> String {
    let (n_tau, n_t) = spec.values.dim();
    let mut out = String::with_capacity(n_tau * n_t * 48);
    out.push_str("omega_tau_radfs,omega_t_radfs,value\n");
    for k in 0..n_tau {
        let wtau = spec.omega_tau.value(k);
        for l in 0..n_t {
            let _ = writeln!(out, "{wtau},{},{}", spec.omega_t.value(l), spec.values[[k, l]]);
        }
    }
    out
}

/// 8-bit grayscale NetPBM (P5) heatmap of the displayed (real-part) map.
///
/// Linear amplitude mapping: pixel = round(255·(v − min)/(max − min)), with
/// a flat map rendered black. Rows run top to bottom along descending ω_t,
/// columns left to right along ascending ω_τ. Returns the raw bytes and the
/// (min, max) used, for recording in the sidecar.
pub fn spectrum2d_pgm(spec: &Spectrum2D) -> (Vec<u8>, f64, f64) {
    let (n_tau, n_t) = spec.values.dim();
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for v in spec.values.iter() {
        min = min.min(*v);
        max = max.max(*v);
    }
    if !min.is_finite() || !max.is_finite() {
        (min, max) = (0.0, 0.0);
    }
    let span = max - min;
    let mut bytes = format!("P5\n{} {}\n255\n", n_tau, n_t).into_bytes();
    bytes.reserve(n_tau * n_t);
    for row in 0..n_t {
        let l = n_t - 1 - row;
        for k in 0..n_tau {
            let v = spec.values[[k, l]];
            let pixel = if span > 0.0 {
                ((v - min) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            };
            bytes.push(pixel);
        }
    }
    (bytes, min, max)
}
