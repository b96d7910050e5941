//! TOML experiment configuration.
//!
//! Parsing is strict: unknown keys are fatal, so a typo cannot silently
//! change the physics. All frequencies in config files are wavenumbers in
//! cm⁻¹ and all times are fs; conversion to internal units happens exactly
//! once, inside [`ExperimentConfig::build`].
//!
//! ```toml
//! [system]
//! omega_cm = [10000.0]          # transition wavenumbers, one per level
//! dipole = [1.0]                # transition dipole magnitudes
//! rotating_frame_cm = 10000.0   # optional carrier, default 0
//!
//! [pathway]                     # optional, default i = j = 1 (1-based)
//! i = 1
//! j = 1
//!
//! [bath]
//! model = "obo"                 # "obo" | "tabulated"
//! lambda_cm = 100.0             # obo
//! tau_corr_fs = 100.0           # obo
//! temperature_k = 300.0         # obo
//! # egcf_csv = "egcf.csv"       # tabulated: CSV + <file>.json units sidecar
//! # correlation = [[1.0]]       # optional c_ij matrix, default identity
//!
//! [grids]
//! tau_step_fs = 2.0
//! tau_count = 251
//! t_step_fs = 2.0
//! t_count = 251
//! waiting_times_fs = [0.0, 100.0, 500.0]
//!
//! [run]                         # optional block, all keys optional
//! rk_step_fs = 1.0
//! window = "cos2"               # "none" | "cos2"
//! out_dir = "out"
//! formats = ["csv", "pgm"]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bath::{g_from_egcf, CorrelationMatrix, LineBroadening, OboParams, TabulatedEgcf};
use crate::cumulant::{PathwaySpec, SystemSpec};
use crate::grid::TimeGrid;
use crate::spectra::Window;
use crate::{Error, Result};

pub const DEFAULT_RK_STEP_FS: f64 = 1.0;
pub const DEFAULT_WINDOW: &str = "cos2";
pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pathway: Option<PathwayBlock>,
    pub bath: BathBlock,
    pub grids: GridsBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run: Option<RunBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub omega_cm: Vec<f64>,
    pub dipole: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotating_frame_cm: Option<f64>,
}

/// 1-based level indices, matching the usual labeling of excited states.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathwayBlock {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathBlock {
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_cm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_corr_fs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub egcf_csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsBlock {
    pub tau_step_fs: f64,
    pub tau_count: usize,
    pub t_step_fs: f64,
    pub t_count: usize,
    pub waiting_times_fs: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rk_step_fs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<String>>,
}

/// Which output files the spectrum command emits.
#[derive(Debug, Clone, Copy)]
pub struct OutputFormats {
    pub csv: bool,
    pub pgm: bool,
}

/// Everything needed to run a workflow, in internal units.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub system: SystemSpec,
    pub pathway: PathwaySpec,
    pub tau_grid: TimeGrid,
    pub t_grid: TimeGrid,
    pub waiting_times_fs: Vec<f64>,
    pub rk_step_fs: f64,
    pub window: Window,
    pub out_dir: PathBuf,
    pub formats: OutputFormats,
    /// Present when the bath is the analytic OBO model; used by
    /// verification checks that need the closed form.
    pub obo: Option<OboParams>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io("read config", path, e))?;
        Self::from_toml(&text)
    }

    /// Parse from TOML text. Error messages carry line/column positions.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// The configuration with every default filled in; serializing and
    /// reloading it reproduces the same [`Experiment`].
    pub fn effective(&self) -> ExperimentConfig {
        let mut cfg = self.clone();
        cfg.system.rotating_frame_cm = Some(self.system.rotating_frame_cm.unwrap_or(0.0));
        cfg.pathway = Some(self.pathway.unwrap_or(PathwayBlock { i: 1, j: 1 }));
        let run = self.run.clone().unwrap_or_default();
        cfg.run = Some(RunBlock {
            rk_step_fs: Some(run.rk_step_fs.unwrap_or(DEFAULT_RK_STEP_FS)),
            window: Some(run.window.unwrap_or_else(|| DEFAULT_WINDOW.to_string())),
            out_dir: Some(run.out_dir.unwrap_or_else(|| DEFAULT_OUT_DIR.into())),
            formats: Some(
                run.formats
                    .unwrap_or_else(|| vec!["csv".to_string(), "pgm".to_string()]),
            ),
        });
        if cfg.bath.correlation.is_none() {
            cfg.bath.correlation = Some(identity_matrix(self.system.omega_cm.len()));
        }
        cfg
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Validate and convert into an [`Experiment`]. `base_dir` anchors
    /// relative paths (normally the config file's directory).
    pub fn build(&self, base_dir: &Path) -> Result<Experiment> {
        let m = self.system.omega_cm.len();
        if m == 0 {
            return Err(Error::Config("system block lists no levels".into()));
        }
        if self.system.dipole.len() != m {
            return Err(Error::Config(format!(
                "system block: {} frequencies but {} dipoles",
                m,
                self.system.dipole.len()
            )));
        }

        let base = self.build_base_broadening(base_dir)?;
        let coeffs = match &self.bath.correlation {
            None => None,
            Some(rows) => {
                if rows.len() != m || rows.iter().any(|r| r.len() != m) {
                    return Err(Error::Config(format!(
                        "bath.correlation must be a {m}x{m} matrix"
                    )));
                }
                Some(rows.iter().flatten().copied().collect::<Vec<f64>>())
            }
        };
        let correlation = match coeffs {
            None => CorrelationMatrix::uncorrelated(m, base)?,
            Some(flat) => CorrelationMatrix::new(base, m, flat)?,
        };

        let system = SystemSpec::new(
            &self.system.omega_cm,
            &self.system.dipole,
            correlation,
            self.system.rotating_frame_cm.unwrap_or(0.0),
        )?;

        let pw_block = self.pathway.unwrap_or(PathwayBlock { i: 1, j: 1 });
        if pw_block.i == 0 || pw_block.j == 0 || pw_block.i > m || pw_block.j > m {
            return Err(Error::Config(format!(
                "pathway indices must lie in 1..={m}, got i={}, j={}",
                pw_block.i, pw_block.j
            )));
        }
        let pathway = PathwaySpec::new(pw_block.i - 1, pw_block.j - 1);

        let tau_grid = TimeGrid::new(self.grids.tau_step_fs, self.grids.tau_count)?;
        let t_grid = TimeGrid::new(self.grids.t_step_fs, self.grids.t_count)?;
        if self.grids.waiting_times_fs.is_empty() {
            return Err(Error::Config("grids.waiting_times_fs is empty".into()));
        }
        for &t_wait in &self.grids.waiting_times_fs {
            if !t_wait.is_finite() || t_wait < 0.0 {
                return Err(Error::Config(format!(
                    "waiting times must be non-negative, got {t_wait}"
                )));
            }
        }
        let t_wait_max = self
            .grids
            .waiting_times_fs
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        // The response needs g out to the sum of all three intervals.
        system
            .bath()
            .check_range(tau_grid.t_end() + t_wait_max + t_grid.t_end())?;

        let run = self.run.clone().unwrap_or_default();
        let rk_step_fs = run.rk_step_fs.unwrap_or(DEFAULT_RK_STEP_FS);
        if !(rk_step_fs.is_finite() && rk_step_fs > 0.0) {
            return Err(Error::BadStep(rk_step_fs));
        }
        let window: Window = run.window.as_deref().unwrap_or(DEFAULT_WINDOW).parse()?;
        let formats = parse_formats(run.formats.as_deref())?;
        let out_dir = run.out_dir.unwrap_or_else(|| DEFAULT_OUT_DIR.into());

        let obo = match self.bath.model.as_str() {
            "obo" => Some(self.obo_params()?),
            _ => None,
        };

        Ok(Experiment {
            system,
            pathway,
            tau_grid,
            t_grid,
            waiting_times_fs: self.grids.waiting_times_fs.clone(),
            rk_step_fs,
            window,
            out_dir,
            formats,
            obo,
        })
    }

    fn obo_params(&self) -> Result<OboParams> {
        let need = |field: Option<f64>, name: &str| {
            field.ok_or_else(|| Error::Config(format!("bath block: model \"obo\" needs {name}")))
        };
        OboParams::new(
            need(self.bath.lambda_cm, "lambda_cm")?,
            need(self.bath.tau_corr_fs, "tau_corr_fs")?,
            need(self.bath.temperature_k, "temperature_k")?,
        )
    }

    fn build_base_broadening(&self, base_dir: &Path) -> Result<LineBroadening> {
        match self.bath.model.as_str() {
            "obo" => Ok(LineBroadening::analytic_obo(self.obo_params()?)),
            "tabulated" => {
                let rel = self.bath.egcf_csv.as_ref().ok_or_else(|| {
                    Error::Config("bath block: model \"tabulated\" needs egcf_csv".into())
                })?;
                let path = if rel.is_absolute() {
                    rel.clone()
                } else {
                    base_dir.join(rel)
                };
                let egcf = TabulatedEgcf::load_csv(&path)?;
                // Integrate over the full tabulated range; span coverage is
                // checked against the grids in build().
                let full = TimeGrid::new(egcf.step_fs(), egcf.len())?;
                g_from_egcf(&egcf, &full)
            }
            other => Err(Error::Config(format!(
                "bath block: unknown model \"{other}\" (expected \"obo\" or \"tabulated\")"
            ))),
        }
    }
}

fn identity_matrix(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn parse_formats(list: Option<&[String]>) -> Result<OutputFormats> {
    let items: &[String] = match list {
        None => {
            return Ok(OutputFormats {
                csv: true,
                pgm: true,
            })
        }
        Some(items) => items,
    };
    let mut formats = OutputFormats {
        csv: false,
        pgm: false,
    };
    for item in items {
        match item.as_str() {
            "csv" => formats.csv = true,
            "pgm" => formats.pgm = true,
            other => {
                return Err(Error::Config(format!(
                    "run.formats: unknown format \"{other}\" (expected csv|pgm)"
                )))
            }
        }
    }
    if !formats.csv && !formats.pgm {
        return Err(Error::Config("run.formats selects no outputs".into()));
    }
    Ok(formats)
}
