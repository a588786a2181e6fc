//! Experiment drivers. Each returns structured results plus a `CsvReport` view of them.

mod acf;
mod asymptotic;
mod ergodicity;
mod single;
mod sweep;
mod transient;

pub use acf::{acf_compare, run_acf_compare, AcfResult};
pub use asymptotic::{asymptotic_constants, run_asymptotic, AsymptoticRow};
pub use ergodicity::{ergodicity_probes, run_ergodicity_probe, ProbeOutcome};
pub use single::run_single;
pub use sweep::{efficiency_sweep, run_efficiency_sweep, SweepPoint};
pub use transient::{run_transient_trace, transient_traces, TransientResult, ZOOM_WINDOW};

use fmala_core::error::{DiagnosticsError, SamplerError, TargetError};
use thiserror::Error;

use crate::config::{ConfigError, Experiment, ExperimentConfig};
use crate::report::CsvReport;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// Process exit code: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(_) => 3,
            Self::Write { .. } => 1,
        }
    }
}

impl From<SamplerError> for RunError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::Step { .. } => Self::Numerical(e.to_string()),
            other => Self::Config(ConfigError::Invalid {
                field: "variants".into(),
                message: other.to_string(),
            }),
        }
    }
}

impl From<TargetError> for RunError {
    fn from(e: TargetError) -> Self {
        Self::Config(ConfigError::Invalid {
            field: "target".into(),
            message: e.to_string(),
        })
    }
}

impl From<DiagnosticsError> for RunError {
    fn from(e: DiagnosticsError) -> Self {
        Self::Numerical(e.to_string())
    }
}

/// Prefix of the metadata lines that echo the config file.
pub const CONFIG_ECHO: &str = "config: ";

/// Deterministic seed for one sub-run, derived from the base seed and a coordinate tuple.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    parts.iter().fold(splitmix(base), |acc, &p| splitmix(acc ^ p))
}

fn add_metadata(report: &mut CsvReport, cfg: &ExperimentConfig) {
    let mut meta = vec![
        format!("build: fmala-cli {}", env!("CARGO_PKG_VERSION")),
        format!("experiment: {}", cfg.experiment.name()),
        format!("seed: {}", cfg.seed),
    ];
    meta.extend(cfg.overrides().into_iter().map(|o| format!("override: {o}")));
    meta.extend(cfg.source.lines().map(|l| format!("{CONFIG_ECHO}{l}")));
    meta.append(&mut report.metadata);
    report.metadata = meta;
}

/// Recovers the echoed config text from a rendered report.
pub fn echoed_config(csv_text: &str) -> String {
    let prefix = format!("# {CONFIG_ECHO}");
    let lines: Vec<&str> = csv_text
        .lines()
        .filter_map(|l| l.strip_prefix(&prefix).or_else(|| (l == prefix.trim_end()).then_some("")))
        .collect();
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CsvReport, RunError> {
    let mut report = match cfg.experiment {
        Experiment::EfficiencySweep => run_efficiency_sweep(cfg)?,
        Experiment::TransientTrace => run_transient_trace(cfg)?,
        Experiment::AcfCompare => run_acf_compare(cfg)?,
        Experiment::Asymptotic => run_asymptotic(cfg)?,
        Experiment::ErgodicityProbe => run_ergodicity_probe(cfg)?,
        Experiment::SingleRun => run_single(cfg)?,
    };
    add_metadata(&mut report, cfg);
    Ok(report)
}
