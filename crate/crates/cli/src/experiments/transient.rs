use fmala_core::sampler::{run_parallel, RunConfig};
use fmala_core::target::TargetSpec;

use super::RunError;
use crate::config::ExperimentConfig;
use crate::report::{Cell, CsvReport};

/// Steps flagged for the close-up view of the start of each trace.
pub const ZOOM_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct TransientResult {
    pub variant: String,
    /// `steps[k]` is the step index of `sq_norm[k]`; index 0 is the start.
    pub steps: Vec<usize>,
    pub sq_norm: Vec<f64>,
    pub accepted: Vec<Option<bool>>,
    /// Acceptance over the first `ZOOM_WINDOW` proposals.
    pub window_acceptance: f64,
    /// First step at which `||X||^2` lies in the stationary three-sigma band, if one is known.
    pub band_entry: Option<usize>,
}

/// `E||X||^2 ± 3 sd` under a Gaussian product target.
pub fn sq_norm_band(target: &TargetSpec) -> Option<(f64, f64)> {
    match *target {
        TargetSpec::Gaussian { dim, precision } => {
            let d = dim as f64;
            let mean = d / precision;
            let sd = (2.0 * d).sqrt() / precision;
            Some((mean - 3.0 * sd, mean + 3.0 * sd))
        }
        _ => None,
    }
}

/// Every variant from the configured start, recording each step. Burn-in is not applied.
pub fn transient_traces(cfg: &ExperimentConfig) -> Result<Vec<TransientResult>, RunError> {
    let d = cfg.dim()?;
    let target = cfg.target_at(d)?;
    let band = sq_norm_band(&target);
    let runs: Vec<RunConfig> = cfg
        .variants
        .iter()
        .map(|v| {
            let mut run = RunConfig::new(target.clone(), v.kernel(d, None)?, cfg.n_steps);
            run.start = cfg.start.rule(d);
            run.burn_in = 0;
            run.stride = 1;
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
            let window = t.accepted.len().min(ZOOM_WINDOW);
            let window_acceptance = if window == 0 {
                f64::NAN
            } else {
                t.accepted[..window].iter().filter(|&&a| a).count() as f64 / window as f64
            };
            let mut sq_norm = vec![t.initial_sq_norm];
            sq_norm.extend_from_slice(&t.sq_norm);
            let mut accepted = vec![None];
            accepted.extend(t.accepted.iter().map(|&a| Some(a)));
            let band_entry = band.and_then(|(lo, hi)| sq_norm.iter().position(|&s| s >= lo && s <= hi));
            Ok(TransientResult {
                variant: v.label.clone(),
                steps: (0..sq_norm.len()).collect(),
                sq_norm,
                accepted,
                window_acceptance,
                band_entry,
            })
        })
        .collect()
}

pub fn run_transient_trace(cfg: &ExperimentConfig) -> Result<CsvReport, RunError> {
    let results = transient_traces(cfg)?;
    let mut report = CsvReport::new(&["variant", "step", "sq_norm", "accepted", "zoom"]);
    if let Some((lo, hi)) = sq_norm_band(&cfg.target_at(cfg.dim()?)?) {
        report.meta(format!("stationary sq_norm band: [{lo}, {hi}]"));
    }
    for r in &results {
        report.meta(format!(
            "{}: acceptance over first {ZOOM_WINDOW} steps {}, band entry step {}",
            r.variant,
            r.window_acceptance,
            r.band_entry.map_or("none".to_string(), |s| s.to_string())
        ));
    }
    for r in &results {
        for k in 0..r.steps.len() {
            report.push(vec![
                r.variant.clone().into(),
                r.steps[k].into(),
                r.sq_norm[k].into(),
                r.accepted[k].map_or(Cell::Empty, Cell::from),
                (r.steps[k] <= ZOOM_WINDOW).into(),
            ]);
        }
    }
    Ok(report)
}
