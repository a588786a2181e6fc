use fmala_core::diagnostics::{acceptance_rate, first_order_efficiency};
use fmala_core::sampler::{run_chain, RunConfig};

use super::RunError;
use crate::config::ExperimentConfig;
use crate::report::CsvReport;

/// One chain; rows are the states after every `stride`-th step, burn-in included.
pub fn run_single(cfg: &ExperimentConfig) -> Result<CsvReport, RunError> {
    let d = cfg.dim()?;
    let v = &cfg.variants[0];
    let mut run = RunConfig::new(cfg.target_at(d)?, v.kernel(d, None)?, cfg.n_steps);
    run.start = cfg.start.rule(d);
    run.burn_in = cfg.burn_in;
    run.stride = cfg.stride;
    run.seed = cfg.seed;
    let trace = run_chain(&run)?;

    let mut report = CsvReport::new(&["step", "first_coord", "sq_norm", "accepted"]);
    report.meta(format!("variant: {}", v.label));
    if trace.counted_steps > 0 {
        report.meta(format!("acceptance: {}", acceptance_rate(&trace)?));
        report.meta(format!(
            "efficiency: {}",
            first_order_efficiency(&trace, cfg.efficiency)?
        ));
    }
    for k in 0..trace.len() {
        report.push(vec![
            ((k + 1) * cfg.stride).into(),
            trace.first_coord[k].into(),
            trace.sq_norm[k].into(),
            trace.accepted[k].into(),
        ]);
    }
    Ok(report)
}
