//! Energy-gap correlation functions, line-broadening functions and their
//! time derivatives.
//!
//! Two backing models are supported. The overdamped Brownian oscillator has
//! the closed form
//!
//! ```text
//! g(t) = (λ·θ·τ² − iλτ)·(e^{−t/τ} − 1 + t/τ),      θ = k_B𝒯/ħ
//! ```
//!
//! with λ and θ in rad/fs and τ the correlation time in fs. A tabulated
//! correlation function C(t) is integrated numerically,
//! ġ(t) = ∫₀ᵗ C and g(t) = ∫₀ᵗ ġ, with a cumulative quadratic rule of
//! global order ≥ 2, and evaluated between nodes by local cubic
//! interpolation.
//!
//! Cross-correlations between levels use a single shared base model scaled
//! by coefficients c_ij ∈ [−1, 1]: g_ij(t) = c_ij·g(t). This is the most
//! restrictive structure that still supports every response formula in this
//! crate; anything richer would require microscopic input we do not model.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::units::{thermal_angular, wavenumber_to_angular, WAVENUMBER_TO_RAD_FS};
use crate::{grid::TimeGrid, Error, Result};

/// Parameters of the overdamped-Brownian-oscillator correlation function.
///
/// `lambda_cm` is the reorganization energy in cm⁻¹ (0 is the legal "no
/// bath" degenerate case), `tau_corr_fs` the bath correlation time in fs,
/// `temperature_k` the absolute temperature in K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OboParams {
    lambda_cm: f64,
    tau_corr_fs: f64,
    temperature_k: f64,
}

impl OboParams {
    pub fn new(lambda_cm: f64, tau_corr_fs: f64, temperature_k: f64) -> Result<Self> {
        if !lambda_cm.is_finite() || lambda_cm < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "reorganization energy must be >= 0, got {lambda_cm} cm^-1"
            )));
        }
        if !tau_corr_fs.is_finite() || tau_corr_fs <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "correlation time must be > 0, got {tau_corr_fs} fs"
            )));
        }
        if !temperature_k.is_finite() || temperature_k <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "temperature must be > 0, got {temperature_k} K"
            )));
        }
        Ok(OboParams {
            lambda_cm,
            tau_corr_fs,
            temperature_k,
        })
    }

    pub fn lambda_cm(&self) -> f64 {
        self.lambda_cm
    }

    pub fn tau_corr_fs(&self) -> f64 {
        self.tau_corr_fs
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    /// Reorganization energy as an angular frequency, rad/fs.
    pub fn lambda_rad_fs(&self) -> f64 {
        wavenumber_to_angular(self.lambda_cm)
    }

    /// Thermal frequency θ = k_B𝒯/ħ, rad/fs.
    pub fn theta_rad_fs(&self) -> f64 {
        thermal_angular(self.temperature_k)
    }

    /// Complex prefactor λθτ² − iλτ of g(t); dimensionless.
    fn g_prefactor(&self) -> C64 {
        let lam = self.lambda_rad_fs();
        let tau = self.tau_corr_fs;
        C64::new(lam * self.theta_rad_fs() * tau * tau, -lam * tau)
    }
}

/// e^{−x} − 1 + x without cancellation for small x.
fn decay_bracket(x: f64) -> f64 {
    if x < 1e-4 {
        // Taylor: x²/2 − x³/6 + x⁴/24 − x⁵/120
        x * x * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0)
    } else {
        (-x).exp_m1() + x
    }
}

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// Line-broadening function of the overdamped Brownian oscillator,
/// g(t) = (λθτ² − iλτ)(e^{−t/τ} − 1 + t/τ). Dimensionless; g(0) = 0.
pub fn obo_g(params: &OboParams, t: f64) -> Result<C64> {
    check_time(t)?;
    Ok(params.g_prefactor() * decay_bracket(t / params.tau_corr_fs))
}

/// First derivative ġ(t) = (λθτ − iλ)(1 − e^{−t/τ}) in rad/fs.
pub fn obo_gdot(params: &OboParams, t: f64) -> Result<C64> {
    check_time(t)?;
    let lam = params.lambda_rad_fs();
    let pref = C64::new(lam * params.theta_rad_fs() * params.tau_corr_fs, -lam);
    Ok(pref * (-(-(t / params.tau_corr_fs)).exp_m1()))
}

/// Energy-gap correlation function C(t) = g̈(t) = (λθ − iλ/τ)·e^{−t/τ}
/// in rad²/fs² (ħ = 1).
pub fn egcf_from_obo(params: &OboParams, t: f64) -> Result<C64> {
    check_time(t)?;
    let lam = params.lambda_rad_fs();
    let pref = C64::new(lam * params.theta_rad_fs(), -lam / params.tau_corr_fs);
    Ok(pref * (-t / params.tau_corr_fs).exp())
}

/// A correlation function sampled on a uniform grid starting at t = 0.
/// Values are in rad²/fs²; conversion from cm⁻² happens at load time.
#[derive(Debug, Clone)]
pub struct TabulatedEgcf {
    step_fs: f64,
    values: Vec<C64>,
}

impl TabulatedEgcf {
    /// Build from explicit sample times and values, validating uniformity.
    pub fn new(times_fs: &[f64], values: Vec<C64>) -> Result<Self> {
        if times_fs.len() != values.len() {
            return Err(Error::BadTable(format!(
                "{} times but {} values",
                times_fs.len(),
                values.len()
            )));
        }
        if times_fs.len() < 4 {
            return Err(Error::BadTable("need at least 4 samples".into()));
        }
        if times_fs[0] != 0.0 {
            return Err(Error::BadTable(format!(
                "table must start at t = 0, got {}",
                times_fs[0]
            )));
        }
        let step = times_fs[1] - times_fs[0];
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::BadTable("times must be strictly increasing".into()));
        }
        for (k, w) in times_fs.windows(2).enumerate() {
            let d = w[1] - w[0];
            if (d - step).abs() > 1e-9 * step.max(1.0) {
                return Err(Error::BadTable(format!(
                    "non-uniform spacing at row {}: {} vs step {}",
                    k + 1,
                    d,
                    step
                )));
            }
        }
        if values[0].re < 0.0 {
            return Err(Error::BadTable(format!(
                "C(0) must have non-negative real part, got {}",
                values[0].re
            )));
        }
        Ok(TabulatedEgcf {
            step_fs: step,
            values,
        })
    }

    /// Sample an analytic OBO model onto a uniform table (mainly for tests
    /// and round-trip verification).
    pub fn from_obo(params: &OboParams, step_fs: f64, len: usize) -> Result<Self> {
        let grid = TimeGrid::new(step_fs, len.max(3))?;
        let values: Result<Vec<C64>> = grid.times().map(|t| egcf_from_obo(params, t)).collect();
        Ok(TabulatedEgcf {
            step_fs,
            values: values?,
        })
    }

    /// Load from a CSV file with header `t_fs,re,im` plus a JSON sidecar
    /// (`<file>.json`) declaring the value units:
    /// `{"units": "cm-2"}` (values in (cm⁻¹)², converted on load) or
    /// `{"units": "rad2/fs2"}`. A list of per-column unit strings is also
    /// accepted but must be homogeneous; mixed units are rejected.
    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io("read", path, e))?;
        let sidecar_path = sidecar_path_for(path);
        let sidecar_text = fs::read_to_string(&sidecar_path)
            .map_err(|e| Error::io("read units sidecar", &sidecar_path, e))?;
        let scale = parse_units_sidecar(&sidecar_text)?;

        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "t_fs,re,im" => {}
            Some((_, header)) => {
                return Err(Error::BadTable(format!(
                    "expected header 't_fs,re,im', got '{}'",
                    header.trim()
                )))
            }
            None => return Err(Error::BadTable("empty file".into())),
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut next_f64 = |name: &str| -> Result<f64> {
                fields
                    .next()
                    .ok_or_else(|| {
                        Error::BadTable(format!("line {}: missing {name}", lineno + 1))
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::BadTable(format!("line {}: bad {name}: {e}", lineno + 1)))
            };
            let t = next_f64("t_fs")?;
            let re = next_f64("re")?;
            let im = next_f64("im")?;
            if fields.next().is_some() {
                return Err(Error::BadTable(format!(
                    "line {}: too many columns",
                    lineno + 1
                )));
            }
            times.push(t);
            values.push(C64::new(re, im) * scale);
        }
        TabulatedEgcf::new(&times, values)
    }

    pub fn step_fs(&self) -> f64 {
        self.step_fs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step_fs
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }
}

fn sidecar_path_for(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    s.into()
}

/// Parse the sidecar and return the multiplicative conversion to rad²/fs².
fn parse_units_sidecar(text: &str) -> Result<f64> {
    let v: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::BadTable(format!("bad units sidecar: {e}")))?;
    let units = v
        .get("units")
        .ok_or_else(|| Error::BadTable("units sidecar lacks a 'units' key".into()))?;
    let unit_str = match units {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(items) => {
            let strs: Vec<&str> = items.iter().filter_map(|x| x.as_str()).collect();
            if strs.len() != items.len() || strs.is_empty() {
                return Err(Error::BadTable("units list must hold strings".into()));
            }
            if strs.iter().any(|s| *s != strs[0]) {
                return Err(Error::BadTable(format!("mixed units rejected: {strs:?}")));
            }
            strs[0].to_string()
        }
        other => return Err(Error::BadTable(format!("bad units value: {other}"))),
    };
    match unit_str.as_str() {
        "cm-2" => Ok(WAVENUMBER_TO_RAD_FS * WAVENUMBER_TO_RAD_FS),
        "rad2/fs2" => Ok(1.0),
        other => Err(Error::BadTable(format!(
            "unknown units '{other}' (expected 'cm-2' or 'rad2/fs2')"
        ))),
    }
}

/// Cumulative integral of uniformly sampled values, local cubic rule.
///
/// Each subinterval is integrated under the cubic through the four nearest
/// nodes (one-sided stencils at the ends), locally O(h⁵) and globally
/// fourth order; well above the required global order ≥ 2. Short tables
/// fall back to lower-order rules.
pub(crate) fn cumulative_integral(values: &[C64], h: f64) -> Vec<C64> {
    let n = values.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    match n {
        0 | 1 => return out,
        2 => {
            out[1] = (values[0] + values[1]) * (0.5 * h);
            return out;
        }
        3 => {
            // Quadratic through all three nodes.
            let twelfth = h / 12.0;
            out[1] = (values[0] * 5.0 + values[1] * 8.0 - values[2]) * twelfth;
            out[2] = out[1] + (values[2] * 5.0 + values[1] * 8.0 - values[0]) * twelfth;
            return out;
        }
        _ => {}
    }
    let c = h / 24.0;
    // First interval: cubic through nodes 0..3.
    out[1] = (values[0] * 9.0 + values[1] * 19.0 - values[2] * 5.0 + values[3]) * c;
    for k in 1..n - 2 {
        let seg =
            (values[k] * 13.0 + values[k + 1] * 13.0 - values[k - 1] - values[k + 2]) * c;
        out[k + 1] = out[k] + seg;
    }
    // Last interval: cubic through the final four nodes.
    let seg = (values[n - 1] * 9.0 + values[n - 2] * 19.0 - values[n - 3] * 5.0 + values[n - 4]) * c;
    out[n - 1] = out[n - 2] + seg;
    out
}

/// Evaluator for g(t) and ġ(t).
#[derive(Debug, Clone)]
pub struct LineBroadening {
    model: BroadeningModel,
}

#[derive(Debug, Clone)]
enum BroadeningModel {
    AnalyticObo(OboParams),
    Tabulated {
        step_fs: f64,
        g: Arc<[C64]>,
        gdot: Arc<[C64]>,
    },
}

impl LineBroadening {
    /// Closed-form OBO evaluator; valid for all t ≥ 0.
    pub fn analytic_obo(params: OboParams) -> Self {
        LineBroadening {
            model: BroadeningModel::AnalyticObo(params),
        }
    }

    /// Zero bath: g ≡ 0. Implemented as an OBO with λ = 0.
    pub fn zero() -> Self {
        LineBroadening::analytic_obo(OboParams::new(0.0, 1.0, 1.0).expect("valid"))
    }

    pub fn model_tag(&self) -> &'static str {
        match self.model {
            BroadeningModel::AnalyticObo(_) => "analytic-obo",
            BroadeningModel::Tabulated { .. } => "tabulated-quadrature",
        }
    }

    /// Largest time (in fs) at which g may be evaluated.
    pub fn t_max(&self) -> f64 {
        match &self.model {
            BroadeningModel::AnalyticObo(_) => f64::INFINITY,
            BroadeningModel::Tabulated { step_fs, g, .. } => (g.len() - 1) as f64 * step_fs,
        }
    }

    pub fn check_range(&self, t: f64) -> Result<()> {
        check_time(t)?;
        let t_max = self.t_max();
        // Tiny slack for times assembled from sums of grid points.
        if t > t_max * (1.0 + 1e-12) {
            return Err(Error::OutOfRange { t, t_max });
        }
        Ok(())
    }

    /// g(t). Panics if t is negative or beyond the tabulated range; callers
    /// validate ranges once per run via [`LineBroadening::check_range`].
    pub fn g(&self, t: f64) -> C64 {
        match &self.model {
            BroadeningModel::AnalyticObo(p) => {
                assert!(t >= 0.0, "g(t) evaluated at negative t = {t}");
                p.g_prefactor() * decay_bracket(t / p.tau_corr_fs())
            }
            BroadeningModel::Tabulated { step_fs, g, .. } => interp_cubic(g, *step_fs, t),
        }
    }

    /// ġ(t) in rad/fs. Same domain rules as [`LineBroadening::g`].
    pub fn gdot(&self, t: f64) -> C64 {
        match &self.model {
            BroadeningModel::AnalyticObo(p) => {
                assert!(t >= 0.0, "gdot(t) evaluated at negative t = {t}");
                let lam = p.lambda_rad_fs();
                let pref = C64::new(lam * p.theta_rad_fs() * p.tau_corr_fs(), -lam);
                pref * (-(-(t / p.tau_corr_fs())).exp_m1())
            }
            BroadeningModel::Tabulated { step_fs, gdot, .. } => interp_cubic(gdot, *step_fs, t),
        }
    }
}

/// Double cumulative quadrature of a tabulated correlation function:
/// ġ(t) = ∫₀ᵗ C(t″) dt″ and g(t) = ∫₀ᵗ ġ(t′) dt′ on the table grid.
///
/// `t_grid` declares the range the caller intends to evaluate; times beyond
/// the tabulated range are rejected here rather than at evaluation time.
pub fn g_from_egcf(egcf: &TabulatedEgcf, t_grid: &TimeGrid) -> Result<LineBroadening> {
    if t_grid.t_end() > egcf.t_end() * (1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            t: t_grid.t_end(),
            t_max: egcf.t_end(),
        });
    }
    let gdot = cumulative_integral(egcf.values(), egcf.step_fs());
    let g = cumulative_integral(&gdot, egcf.step_fs());
    Ok(LineBroadening {
        model: BroadeningModel::Tabulated {
            step_fs: egcf.step_fs(),
            g: g.into(),
            gdot: gdot.into(),
        },
    })
}

/// Local cubic (4-point Lagrange) interpolation on a uniform table.
/// Node queries return node values exactly.
fn interp_cubic(table: &[C64], h: f64, t: f64) -> C64 {
    let n = table.len();
    let t_max = (n - 1) as f64 * h;
    assert!(
        t >= 0.0 && t <= t_max * (1.0 + 1e-12),
        "t = {t} fs outside tabulated range [0, {t_max} fs]"
    );
    let x = (t / h).min((n - 1) as f64);
    let k = (x.floor() as usize).min(n - 2);
    let frac = x - k as f64;
    if frac == 0.0 {
        return table[k];
    }
    // Stencil k-1..k+2, shifted at the edges; tables carry >= 4 nodes.
    let i0 = k.saturating_sub(1).min(n - 4);
    let u = x - i0 as f64;
    let (f0, f1, f2, f3) = (table[i0], table[i0 + 1], table[i0 + 2], table[i0 + 3]);
    // Lagrange basis on nodes 0,1,2,3 in units of h.
    let l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
    let l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
    let l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
    let l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
    f0 * l0 + f1 * l1 + f2 * l2 + f3 * l3
}

/// Symmetric matrix of line-broadening functions g_ij(t) = c_ij·g(t) built
/// from one shared base model and correlation coefficients c_ij ∈ [−1, 1]
/// with unit diagonal.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    size: usize,
    coeffs: Vec<f64>,
    base: LineBroadening,
}

impl CorrelationMatrix {
    /// All cross-correlations zero (identity coefficient matrix).
    pub fn uncorrelated(size: usize, base: LineBroadening) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("need at least one level".into()));
        }
        let mut coeffs = vec![0.0; size * size];
        for i in 0..size {
            coeffs[i * size + i] = 1.0;
        }
        Ok(CorrelationMatrix { size, coeffs, base })
    }

    /// Build from an explicit coefficient matrix (row-major, size²).
    pub fn new(base: LineBroadening, size: usize, coeffs: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("need at least one level".into()));
        }
        if coeffs.len() != size * size {
            return Err(Error::InvalidParameter(format!(
                "correlation matrix must be {size}x{size}, got {} entries",
                coeffs.len()
            )));
        }
        for i in 0..size {
            if coeffs[i * size + i] != 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "correlation diagonal must be exactly 1, got c[{i}][{i}] = {}",
                    coeffs[i * size + i]
                )));
            }
            for j in 0..size {
                let c = coeffs[i * size + j];
                if !(c.is_finite() && (-1.0..=1.0).contains(&c)) {
                    return Err(Error::InvalidParameter(format!(
                        "correlation coefficients must lie in [-1, 1], got c[{i}][{j}] = {c}"
                    )));
                }
                if (c - coeffs[j * size + i]).abs() > 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "correlation matrix must be symmetric, c[{i}][{j}] != c[{j}][{i}]"
                    )));
                }
            }
        }
        Ok(CorrelationMatrix { size, coeffs, base })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn base(&self) -> &LineBroadening {
        &self.base
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.size && j < self.size);
        self.coeffs[i * self.size + j]
    }

    pub fn g(&self, i: usize, j: usize, t: f64) -> C64 {
        self.base.g(t) * self.coeff(i, j)
    }

    pub fn gdot(&self, i: usize, j: usize, t: f64) -> C64 {
        self.base.gdot(t) * self.coeff(i, j)
    }

    pub fn t_max(&self) -> f64 {
        self.base.t_max()
    }

    pub fn check_range(&self, t: f64) -> Result<()> {
        self.base.check_range(t)
    }
}
