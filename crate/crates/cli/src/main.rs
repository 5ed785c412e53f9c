//! `scatfit`: batch front end for profile-parameter extraction from
//! Mueller-matrix scatterometry signatures.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use scatfit_core::pipeline::Method;

use commands::Study;
use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "scatfit",
    about = "Nanostructure profile extraction from Mueller-matrix signatures",
    version
)]
struct Cli {
    /// Run-configuration TOML file.
    #[arg(short, long, global = true, default_value = "scatfit.toml")]
    config: PathBuf,

    /// Worker threads for parallel simulation (also: SCATFIT_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the per-parameter sub-range classifiers and save the bundle.
    Train {
        /// Also write the labeled training sets as TSV files.
        #[arg(long)]
        write_training_sets: bool,
    },
    /// Extract profile parameters from a signature file.
    Fit(FitArgs),
    /// Simulate a signature at explicit parameter values.
    Simulate {
        /// Parameter value as name=nm; repeat for each parameter.
        #[arg(long = "param", value_parser = parse_assignment, required = true)]
        params: Vec<(String, f64)>,
        /// Inject the configured measurement errors.
        #[arg(long)]
        noisy: bool,
        /// Output file (default: <output dir>/signature.txt).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named batch study and write its plot data.
    Bench {
        #[arg(long, value_enum)]
        study: StudyArg,
    },
}

#[derive(Args)]
struct FitArgs {
    /// Signature file to fit.
    #[arg(long)]
    signature: PathBuf,
    /// Classifier bundle directory (default: <output dir>/bundle).
    #[arg(long)]
    bundle: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Explicit initialization as name=nm; repeat per parameter
    /// (lm_only; default: rough-range medians).
    #[arg(long = "init", value_parser = parse_assignment)]
    init: Vec<(String, f64)>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    #[value(name = "svm_lm")]
    SvmLm,
    #[value(name = "lm_only")]
    LmOnly,
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyArg {
    #[value(name = "svm_vs_lm")]
    SvmVsLm,
    #[value(name = "kernel_sweep")]
    KernelSweep,
    #[value(name = "noise_sweep")]
    NoiseSweep,
    #[value(name = "training_size")]
    TrainingSize,
}

fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got '{s}'"))?;
    let v: f64 = value
        .parse()
        .map_err(|e| format!("bad value in '{s}': {e}"))?;
    Ok((name.trim().to_string(), v))
}

fn run(cli: &Cli) -> scatfit_core::Result<()> {
    let workers = cli.workers.or_else(|| {
        std::env::var("SCATFIT_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = workers {
        // Ignore the error if a global pool already exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }

    let loaded = RunConfig::load(&cli.config)?;
    match &cli.command {
        Command::Train {
            write_training_sets,
        } => commands::cmd_train(&loaded, *write_training_sets),
        Command::Fit(args) => commands::cmd_fit(
            &loaded,
            &args.signature,
            args.bundle.as_ref(),
            match args.method {
                MethodArg::SvmLm => Method::SvmLm,
                MethodArg::LmOnly => Method::LmOnly,
            },
            &args.init,
        ),
        Command::Simulate { params, noisy, out } => {
            commands::cmd_simulate(&loaded, params, *noisy, out.as_ref())
        }
        Command::Bench { study } => commands::cmd_bench(
            &loaded,
            match study {
                StudyArg::SvmVsLm => Study::SvmVsLm,
                StudyArg::KernelSweep => Study::KernelSweep,
                StudyArg::NoiseSweep => Study::NoiseSweep,
                StudyArg::TrainingSize => Study::TrainingSize,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::FAILURE
        }
    }
}
