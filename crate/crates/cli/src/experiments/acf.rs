use fmala_core::diagnostics::{acf, acf_standard_error};
use fmala_core::sampler::{run_parallel, RunConfig};

use super::RunError;
use crate::config::ExperimentConfig;
use crate::report::CsvReport;

#[derive(Debug, Clone, PartialEq)]
pub struct AcfResult {
    pub variant: String,
    /// First-coordinate autocorrelations at lags `0..=max_lag`.
    pub acf: Vec<f64>,
    pub std_error: Vec<f64>,
    pub n: usize,
    pub acceptance: f64,
}

pub fn acf_compare(cfg: &ExperimentConfig) -> Result<Vec<AcfResult>, RunError> {
    let d = cfg.dim()?;
    let target = cfg.target_at(d)?;
    let runs: Vec<RunConfig> = cfg
        .variants
        .iter()
        .map(|v| {
            let mut run = RunConfig::new(target.clone(), v.kernel(d, None)?, cfg.n_steps);
            run.start = cfg.start.rule(d);
            run.burn_in = cfg.burn_in;
            run.stride = cfg.stride;
            run.seed = cfg.seed;
            Ok(run)
        })
        .collect::<Result<_, RunError>>()?;
    let traces = run_parallel(&runs);
    cfg.variants
        .iter()
        .zip(traces)
        .map(|(v, trace)| {
            let t = trace?;
            let kept = &t.first_coord[(cfg.burn_in / cfg.stride).min(t.first_coord.len())..];
            let rho = acf(kept, cfg.max_lag)?;
            let n = kept.len();
            let std_error = (0..rho.len()).map(|k| acf_standard_error(&rho, k, n)).collect();
            Ok(AcfResult {
                variant: v.label.clone(),
                acf: rho,
                std_error,
                n,
                acceptance: t.counted_accepted as f64 / t.counted_steps.max(1) as f64,
            })
        })
        .collect()
}

pub fn run_acf_compare(cfg: &ExperimentConfig) -> Result<CsvReport, RunError> {
    let results = acf_compare(cfg)?;
    let mut report = CsvReport::new(&["variant", "lag", "acf", "std_error"]);
    for r in &results {
        report.meta(format!("{}: acceptance {}, n {}", r.variant, r.acceptance, r.n));
    }
    for r in &results {
        for (lag, (&a, &se)) in r.acf.iter().zip(&r.std_error).enumerate() {
            report.push(vec![r.variant.clone().into(), lag.into(), a.into(), se.into()]);
        }
    }
    Ok(report)
}
