use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rephase::cli::{
    cmd_compare, cmd_linear, cmd_response, cmd_spectrum2d, cmd_verify, Overrides, RunContext,
};
use rephase::cumulant::Provenance;

/// Third-order rephasing response of multilevel systems with Gaussian
/// energy-gap fluctuations: exact cumulant evaluation, master-equation
/// propagation, and 2D spectra.
#[derive(Parser)]
#[command(name = "rephase", version, about)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides run.out_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for field sweeps (default: number of cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Apodization window: none | cos2 (overrides run.window).
    #[arg(long)]
    window: Option<String>,
    /// RK4 integrator step in fs (overrides run.rk_step_fs).
    #[arg(long = "rk-step")]
    rk_step: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Linear response time series and absorption spectrum.
    Linear(CommonOpts),
    /// Rephasing response field R(τ, t) per waiting time.
    Response {
        #[command(flatten)]
        common: CommonOpts,
        /// exact | rdm | propagated
        #[arg(long)]
        provenance: String,
    },
    /// 2D frequency-frequency spectra with heatmaps and peak metrics.
    Spectrum2d(CommonOpts),
    /// Run the verification checks; exit 1 if any fails.
    Verify(CommonOpts),
    /// Exact-vs-projector lineshape comparison per waiting time.
    Compare(CommonOpts),
}

impl Command {
    fn common(&self) -> &CommonOpts {
        match self {
            Command::Linear(c)
            | Command::Spectrum2d(c)
            | Command::Verify(c)
            | Command::Compare(c) => c,
            Command::Response { common, .. } => common,
        }
    }
}

fn run(cli: CliArgs) -> rephase::Result<u8> {
    let common = cli.command.common();
    let overrides = Overrides {
        out_dir: common.out.clone(),
        window: common.window.as_deref().map(str::parse).transpose()?,
        rk_step_fs: common.rk_step,
    };
    let ctx = RunContext::prepare(&common.config, &overrides)?;

    let mut exit = 0u8;
    let written = match &cli.command {
        Command::Linear(_) => cmd_linear(&ctx)?,
        Command::Response { provenance, .. } => {
            cmd_response(&ctx, provenance.parse::<Provenance>()?)?
        }
        Command::Spectrum2d(_) => cmd_spectrum2d(&ctx)?,
        Command::Compare(_) => cmd_compare(&ctx)?,
        Command::Verify(_) => {
            let (report, written) = cmd_verify(&ctx)?;
            for check in &report.checks {
                println!("{}", check.summary_line());
            }
            if !report.passed {
                exit = 1;
            }
            written
        }
    };
    for path in &written {
        println!("wrote {}", path.display());
    }
    Ok(exit)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = CliArgs::parse();
    let jobs = cli.command.common().jobs;

    let body = || match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    };

    match jobs {
        Some(n) if n > 0 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(body),
            Err(err) => {
                eprintln!("error: building worker pool: {err}");
                ExitCode::from(2)
            }
        },
        _ => body(),
    }
}
