//! Uniform time grids and frequency axes.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A uniform time grid starting at t = 0 fs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    step_fs: f64,
    len: usize,
}

impl TimeGrid {
    pub fn new(step_fs: f64, len: usize) -> Result<Self> {
        if !(step_fs.is_finite() && step_fs > 0.0) {
            return Err(Error::BadGrid(format!("step must be positive, got {step_fs} fs")));
        }
        if len == 0 {
            return Err(Error::BadGrid("grid needs at least one point".into()));
        }
        Ok(TimeGrid { step_fs, len })
    }

    pub fn step_fs(&self) -> f64 {
        self.step_fs
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of the k-th grid point, k·Δt.
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step_fs
    }

    /// Last grid point.
    pub fn t_end(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.time(k))
    }
}

/// A uniform angular-frequency axis (rad/fs).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqAxis {
    start: f64,
    step: f64,
    len: usize,
}

impl FreqAxis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) || !start.is_finite() || len == 0 {
            return Err(Error::BadGrid(format!(
                "bad frequency axis: start {start}, step {step}, len {len}"
            )));
        }
        Ok(FreqAxis { start, step, len })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.value(k))
    }

    /// Index of the axis point closest to `omega`.
    pub fn nearest_index(&self, omega: f64) -> usize {
        let k = ((omega - self.start) / self.step).round();
        (k.max(0.0) as usize).min(self.len - 1)
    }

    pub fn approx_eq(&self, other: &FreqAxis, tol: f64) -> bool {
        self.len == other.len
            && (self.start - other.start).abs() <= tol
            && (self.step - other.step).abs() <= tol
    }
}
