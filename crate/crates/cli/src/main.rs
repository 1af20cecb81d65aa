//! `cfc`: experiment runner and coefficient analyzer.
//!
//! Exit codes: 0 success, 1 other runtime failure, 2 configuration error,
//! 3 cap breach or non-convergence (rows are still written).

mod config;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use cfc::analysis::AnalysisReport;
use cfc::CfcError;
use clap::{Parser, Subcommand};

use config::{AnalysisSection, ConfigFile, Experiment, Profile};
use experiment::{run_experiment, RunOptions};

#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Cap(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(anyhow::anyhow!(msg.into()))
    }

    /// Library errors raised while validating input.
    pub fn from_core(err: CfcError) -> Self {
        match err {
            CfcError::IndexSetTooLarge { .. } => Failure::Cap(err.into()),
            CfcError::Io(_) => Failure::Runtime(err.into()),
            _ => Failure::Config(err.into()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Config(_) => 2,
            Failure::Cap(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "cfc", version, about = "Compressive Fourier collocation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the [experiment] grid of a config and write runs.csv, summary.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Sets the number of runs per m (fast = 5, paper = 25), overriding `runs`.
        #[arg(long, value_enum)]
        profile: Option<Profile>,
        /// Base seed, overriding `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Write one solver trace per cell into OUT/trace.
        #[arg(long)]
        trace: bool,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Report Riesz constants, the sufficient condition and sample-complexity estimates.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Print build information and the random generator in use.
    Version,
}

fn analyze(config: PathBuf, json: bool) -> Result<(), Failure> {
    let file = ConfigFile::load(&config)?;
    let a = file.problem.diffusion_coefficient().map_err(Failure::from_core)?;
    let opts = file.analysis.unwrap_or_default();
    let AnalysisSection { n, sparsities, eps_values, c0 } = opts;
    let report = AnalysisReport::new(&a, file.problem.rho, n, &sparsities, &eps_values, c0)
        .map_err(Failure::from_core)?;
    if json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Runtime(e.into()))?;
        println!("{text}");
    } else {
        print!("{report}");
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    config: PathBuf,
    profile: Option<Profile>,
    seed: Option<u64>,
    out: PathBuf,
    trace: bool,
    jobs: Option<usize>,
) -> Result<(), Failure> {
    let file = ConfigFile::load(&config)?;
    let exp = Experiment::from_file(&file, profile, seed)?;
    if jobs == Some(0) {
        return Err(Failure::config("--jobs must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Runtime(e.into()))?;
    let opts = RunOptions { out, trace };
    let cells = pool.install(|| run_experiment(&exp, &opts))?;
    let capped: Vec<_> = cells.iter().filter(|c| c.hit_cap()).collect();
    eprintln!(
        "{} cells written to {}",
        cells.len(),
        opts.out.display()
    );
    if let Some(first) = capped.first() {
        return Err(Failure::Cap(anyhow::anyhow!(
            "{} of {} cells stopped early (first: m = {}, run = {}, status {})",
            capped.len(),
            cells.len(),
            first.m,
            first.run,
            first.status
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            profile,
            seed,
            out,
            trace,
            jobs,
        } => run(config, profile, seed, out, trace, jobs),
        Command::Analyze { config, json } => analyze(config, json),
        Command::Version => {
            println!("cfc {}", env!("CARGO_PKG_VERSION"));
            println!("target  {}-{}", std::env::consts::ARCH, std::env::consts::OS);
            let profile = if cfg!(debug_assertions) { "debug" } else { "release" };
            println!("build   {profile}");
            println!("prng    {}", cfc::rng::PRNG_NAME);
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (kind, err) = match &f {
                Failure::Config(e) => ("configuration error", e),
                Failure::Cap(e) => ("cap reached", e),
                Failure::Runtime(e) => ("error", e),
            };
            eprintln!("cfc: {kind}: {err:#}");
            ExitCode::from(f.exit_code())
        }
    }
}
