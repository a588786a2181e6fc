use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fmala_cli::config::ConfigError;
use fmala_cli::{parse_config, run_experiment, write_csv, Experiment, RunError};

/// Runs one sampler experiment from a TOML config and writes CSV.
#[derive(Debug, Parser)]
#[command(name = "fmala", version)]
struct Args {
    experiment: Experiment,
    #[arg(long)]
    config: PathBuf,
    /// Output path; defaults to the config's `out`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn run(args: Args) -> Result<(), RunError> {
    let mut cfg = parse_config(&args.config)?;
    if cfg.experiment != args.experiment {
        return Err(ConfigError::Invalid {
            field: "experiment".into(),
            message: format!(
                "config is for `{}` but `{}` was requested",
                cfg.experiment.name(),
                args.experiment.name()
            ),
        }
        .into());
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError::Invalid {
                field: "--threads".into(),
                message: e.to_string(),
            })?;
    }
    let report = run_experiment(&cfg)?;
    match args.out.or(cfg.out.clone()) {
        Some(path) => write_csv(&report, &path).map_err(|source| RunError::Write { path, source }),
        None => {
            print!("{}", report.to_text());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
