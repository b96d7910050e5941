//! Config-driven workflows behind the command-line front end.
//!
//! Every command loads a TOML config, applies command-line overrides,
//! writes the fully-defaulted effective config into the output directory,
//! and emits data files paired with JSON sidecars carrying the config hash,
//! code version, parameters and units. Identical config + code version
//! produce byte-identical outputs.

use std::path::{Path, PathBuf};

use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{Experiment, ExperimentConfig};
use crate::cumulant::{field_exact, field_rdm, linear_response, Provenance, ResponseField};
use crate::output;
use crate::propagator::r2_via_master;
use crate::spectra::{
    absorption, compare, lineshape_metrics, spectrum2d, LineshapeMetrics, Spectrum2D, Window,
};
use crate::verify::{run_verification, VerificationReport};
use crate::{Error, Result, VERSION};

/// Command-line overrides applied on top of the config's run block.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub window: Option<Window>,
    pub rk_step_fs: Option<f64>,
}

/// A loaded, validated experiment plus the provenance strings shared by all
/// output sidecars.
#[derive(Debug)]
pub struct RunContext {
    pub exp: Experiment,
    pub effective: ExperimentConfig,
    pub effective_toml: String,
    pub config_sha256: String,
}

impl RunContext {
    pub fn prepare(config_path: &Path, overrides: &Overrides) -> Result<Self> {
        let cfg = ExperimentConfig::load(config_path)?;
        let mut effective = cfg.effective();
        {
            let run = effective.run.as_mut().expect("effective run block");
            if let Some(out) = &overrides.out_dir {
                run.out_dir = Some(out.clone());
            }
            if let Some(w) = overrides.window {
                run.window = Some(w.as_str().to_string());
            }
            if let Some(h) = overrides.rk_step_fs {
                run.rk_step_fs = Some(h);
            }
        }
        let base_dir = config_path.parent().unwrap_or(Path::new("."));
        let exp = effective.build(base_dir)?;
        let effective_toml = effective.to_toml_string()?;
        let config_sha256 = hex_digest(effective_toml.as_bytes());
        Ok(RunContext {
            exp,
            effective,
            effective_toml,
            config_sha256,
        })
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.exp.out_dir.join(name)
    }

    /// Write `effective_config.toml`; reloading it reproduces this run.
    fn write_effective_config(&self, written: &mut Vec<PathBuf>) -> Result<()> {
        let path = self.out_path("effective_config.toml");
        output::write_text(&path, &self.effective_toml)?;
        written.push(path);
        Ok(())
    }

    fn sidecar_base(&self, kind: &str) -> serde_json::Value {
        json!({
            "kind": kind,
            "code_version": VERSION,
            "config_sha256": self.config_sha256,
            "config": serde_json::to_value(&self.effective).unwrap_or_default(),
        })
    }

    fn write_with_sidecar(
        &self,
        name: &str,
        bytes: &[u8],
        mut sidecar: serde_json::Value,
        written: &mut Vec<PathBuf>,
    ) -> Result<()> {
        let path = self.out_path(name);
        output::write_bytes(&path, bytes)?;
        sidecar["file"] = json!(name);
        let sc_path = output::sidecar_path(&path);
        output::write_json(&sc_path, &sidecar)?;
        written.push(path);
        written.push(sc_path);
        Ok(())
    }

    fn field(&self, provenance: Provenance, t_wait: f64) -> Result<ResponseField> {
        let exp = &self.exp;
        match provenance {
            Provenance::Exact => {
                field_exact(&exp.system, exp.pathway, &exp.tau_grid, &exp.t_grid, t_wait)
            }
            Provenance::Rdm => {
                field_rdm(&exp.system, exp.pathway, &exp.tau_grid, &exp.t_grid, t_wait)
            }
            Provenance::Propagated => r2_via_master(
                &exp.system,
                exp.pathway,
                &exp.tau_grid,
                &exp.t_grid,
                t_wait,
                exp.rk_step_fs,
            ),
        }
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Compact waiting-time label for filenames ("0", "100", "2.5").
fn t_label(t_wait: f64) -> String {
    format!("{t_wait}")
}

/// Linear response time series plus absorption spectrum.
pub fn cmd_linear(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let exp = &ctx.exp;
    let mut written = Vec::new();
    ctx.write_effective_config(&mut written)?;

    let series = linear_response(&exp.system, &exp.t_grid)?;
    let mut sidecar = ctx.sidecar_base("linear_response");
    sidecar["units"] = json!({"t_fs": "fs", "value": "dimensionless"});
    ctx.write_with_sidecar(
        "linear_response.csv",
        output::series_csv(&exp.t_grid, &series).as_bytes(),
        sidecar,
        &mut written,
    )?;

    let spec = absorption(&exp.system, &exp.t_grid, exp.window)?;
    let mut sidecar = ctx.sidecar_base("absorption");
    sidecar["units"] = json!({"omega_radfs": "rad/fs", "omega_cm": "cm^-1", "value": "arbitrary"});
    sidecar["window"] = json!(exp.window.as_str());
    ctx.write_with_sidecar(
        "absorption.csv",
        output::spectrum1d_csv(&spec).as_bytes(),
        sidecar,
        &mut written,
    )?;
    Ok(written)
}

/// Response field CSV per waiting time, for one provenance.
pub fn cmd_response(ctx: &RunContext, provenance: Provenance) -> Result<Vec<PathBuf>> {
    let exp = &ctx.exp;
    let mut written = Vec::new();
    ctx.write_effective_config(&mut written)?;
    for &t_wait in &exp.waiting_times_fs {
        let field = ctx.field(provenance, t_wait)?;
        let name = format!("response_{}_T{}.csv", provenance.as_str(), t_label(t_wait));
        let mut sidecar = ctx.sidecar_base("response_field");
        sidecar["provenance"] = json!(provenance.as_str());
        sidecar["waiting_time_fs"] = json!(t_wait);
        sidecar["units"] = json!({"tau_fs": "fs", "t_fs": "fs", "re": "arbitrary", "im": "arbitrary"});
        if provenance == Provenance::Propagated {
            sidecar["rk_step_fs"] = json!(exp.rk_step_fs);
        }
        ctx.write_with_sidecar(
            &name,
            output::response_csv(&field).as_bytes(),
            sidecar,
            &mut written,
        )?;
    }
    Ok(written)
}

/// Metrics for a spectrum; an identically-zero map reports zero metrics
/// rather than a peak-finding error.
fn metrics_or_zero(spec: &Spectrum2D) -> Result<LineshapeMetrics> {
    let max_mag = spec.magnitude.iter().fold(0.0f64, |m, v| m.max(*v));
    if max_mag == 0.0 {
        return Ok(LineshapeMetrics {
            peak_omega_tau_rad_fs: 0.0,
            peak_omega_t_rad_fs: 0.0,
            peak_amplitude: 0.0,
            diagonal_width_rad_fs: 0.0,
            antidiagonal_width_rad_fs: 0.0,
            ellipticity: 0.0,
        });
    }
    lineshape_metrics(spec)
}

/// 2D spectra (CSV + PGM + metrics JSON) per waiting time, for the exact
/// and — on diagonal pathways — the projector-approximation fields.
pub fn cmd_spectrum2d(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let exp = &ctx.exp;
    let mut written = Vec::new();
    ctx.write_effective_config(&mut written)?;

    let mut provenances = vec![Provenance::Exact];
    if exp.pathway.is_diagonal() {
        provenances.push(Provenance::Rdm);
    } else {
        log::info!("pathway has i ≠ j; the projector-approximation spectrum is not defined");
    }

    for &t_wait in &exp.waiting_times_fs {
        for &prov in &provenances {
            let field = ctx.field(prov, t_wait)?;
            let spec = spectrum2d(&field, exp.window)?;
            let spec_plain = spectrum2d(&field, Window::None)?;
            let stem = format!("spectrum2d_{}_T{}", prov.as_str(), t_label(t_wait));

            if exp.formats.csv {
                let mut sidecar = ctx.sidecar_base("spectrum2d");
                sidecar["provenance"] = json!(prov.as_str());
                sidecar["waiting_time_fs"] = json!(t_wait);
                sidecar["window"] = json!(exp.window.as_str());
                sidecar["units"] =
                    json!({"omega_tau_radfs": "rad/fs", "omega_t_radfs": "rad/fs", "value": "arbitrary"});
                ctx.write_with_sidecar(
                    &format!("{stem}.csv"),
                    output::spectrum2d_csv(&spec).as_bytes(),
                    sidecar,
                    &mut written,
                )?;
            }

            if exp.formats.pgm {
                let (bytes, min, max) = output::spectrum2d_pgm(&spec);
                let mut sidecar = ctx.sidecar_base("spectrum2d_heatmap");
                sidecar["provenance"] = json!(prov.as_str());
                sidecar["waiting_time_fs"] = json!(t_wait);
                sidecar["window"] = json!(exp.window.as_str());
                sidecar["amplitude_mapping"] = json!({
                    "kind": "linear",
                    "min": min,
                    "max": max,
                    "note": "pixel = round(255*(value-min)/(max-min)); flat maps render black",
                });
                sidecar["layout"] = json!({
                    "rows": "omega_t descending (top row = highest omega_t)",
                    "columns": "omega_tau ascending",
                });
                ctx.write_with_sidecar(&format!("{stem}.pgm"), &bytes, sidecar, &mut written)?;
            }

            let metrics = json!({
                "kind": "spectrum2d_metrics",
                "code_version": VERSION,
                "config_sha256": ctx.config_sha256,
                "provenance": prov.as_str(),
                "waiting_time_fs": t_wait,
                "window": exp.window.as_str(),
                "metrics_windowed": serde_json::to_value(metrics_or_zero(&spec)?)
                    .unwrap_or_default(),
                "metrics_unwindowed": serde_json::to_value(metrics_or_zero(&spec_plain)?)
                    .unwrap_or_default(),
            });
            let path = ctx.out_path(&format!("metrics_{}_T{}.json", prov.as_str(), t_label(t_wait)));
            output::write_json(&path, &metrics)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Exact-vs-projector comparison report per waiting time.
pub fn cmd_compare(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let exp = &ctx.exp;
    if !exp.pathway.is_diagonal() {
        return Err(Error::UnsupportedPathway {
            i: exp.pathway.i,
            j: exp.pathway.j,
            reason: "comparison needs the projector form, defined for i = j only".into(),
        });
    }
    let mut written = Vec::new();
    ctx.write_effective_config(&mut written)?;
    for &t_wait in &exp.waiting_times_fs {
        let exact_field = ctx.field(Provenance::Exact, t_wait)?;
        let rdm_field = ctx.field(Provenance::Rdm, t_wait)?;
        let windowed = compare(
            &spectrum2d(&exact_field, exp.window)?,
            &spectrum2d(&rdm_field, exp.window)?,
        )?;
        let unwindowed = compare(
            &spectrum2d(&exact_field, Window::None)?,
            &spectrum2d(&rdm_field, Window::None)?,
        )?;
        let report = json!({
            "kind": "spectrum2d_comparison",
            "code_version": VERSION,
            "config_sha256": ctx.config_sha256,
            "waiting_time_fs": t_wait,
            "window": exp.window.as_str(),
            "windowed": serde_json::to_value(&windowed).unwrap_or_default(),
            "unwindowed": serde_json::to_value(&unwindowed).unwrap_or_default(),
        });
        let path = ctx.out_path(&format!("comparison_T{}.json", t_label(t_wait)));
        output::write_json(&path, &report)?;
        written.push(path);
    }
    Ok(written)
}

/// Run all verification checks; the report is written even when checks
/// fail, and the caller turns `report.passed` into the exit code.
pub fn cmd_verify(ctx: &RunContext) -> Result<(VerificationReport, Vec<PathBuf>)> {
    let mut written = Vec::new();
    ctx.write_effective_config(&mut written)?;
    let report = run_verification(&ctx.exp)?;
    let mut value = serde_json::to_value(&report)
        .map_err(|e| Error::Config(format!("serializing report: {e}")))?;
    value["kind"] = json!("verification_report");
    value["code_version"] = json!(VERSION);
    value["config_sha256"] = json!(ctx.config_sha256);
    let path = ctx.out_path("verification_report.json");
    output::write_json(&path, &value)?;
    written.push(path);
    Ok((report, written))
}
