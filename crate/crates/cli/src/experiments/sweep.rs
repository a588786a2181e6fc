use fmala_core::diagnostics::EfficiencyPoint;
use fmala_core::sampler::{run_parallel, RunConfig};

use super::{derive_seed, RunError};
use crate::config::{ConfigError, ExperimentConfig, StepSize};
use crate::report::{Cell, CsvReport};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub variant: String,
    pub d: usize,
    pub ell: f64,
    pub h: f64,
    pub exponent: f64,
    /// Efficiency summary, or the sampler error that ended the run.
    pub result: Result<EfficiencyPoint, String>,
}

impl SweepPoint {
    pub fn status(&self) -> String {
        match &self.result {
            Ok(_) => "ok".into(),
            Err(e) => format!("failed: {e}"),
        }
    }
}

/// Runs every (variant, d, ell) point. Points sharing `(d, ell)` share a seed.
pub fn efficiency_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepPoint>, RunError> {
    let mut points = Vec::new();
    let mut runs = Vec::new();
    for (vi, v) in cfg.variants.iter().enumerate() {
        let comp = &v.components[0];
        let grid: Vec<f64> = match &comp.step {
            StepSize::Grid(g) => g.clone(),
            StepSize::Ell(l) => vec![*l],
            StepSize::Explicit(_) => {
                return Err(ConfigError::Invalid {
                    field: format!("variants[{vi}]"),
                    message: "sweeps need `ell` values, not an explicit `h`".into(),
                }
                .into())
            }
        };
        for &d in &cfg.dims {
            let target = cfg.target_at(d)?;
            for &ell in &grid {
                let kernel = v.kernel(d, Some(ell))?;
                let mut run = RunConfig::new(target.clone(), kernel, cfg.n_steps);
                run.start = cfg.start.rule(d);
                run.burn_in = cfg.burn_in;
                run.stride = cfg.stride;
                run.seed = derive_seed(cfg.seed, &[d as u64, ell.to_bits()]);
                points.push((v.label.clone(), d, ell, comp.h(d, Some(ell)), comp.exponent));
                runs.push(run);
            }
        }
    }
    let traces = run_parallel(&runs);
    Ok(points
        .into_iter()
        .zip(traces)
        .map(|((variant, d, ell, h, exponent), trace)| {
            let result = trace
                .map_err(|e| e.to_string())
                .and_then(|t| EfficiencyPoint::from_trace(&t, ell, exponent, cfg.efficiency).map_err(|e| e.to_string()));
            SweepPoint {
                variant,
                d,
                ell,
                h,
                exponent,
                result,
            }
        })
        .collect())
}

pub fn run_efficiency_sweep(cfg: &ExperimentConfig) -> Result<CsvReport, RunError> {
    let points = efficiency_sweep(cfg)?;
    let mut report = CsvReport::new(&[
        "variant",
        "d",
        "ell",
        "h",
        "exponent",
        "status",
        "acceptance",
        "efficiency",
        "scaled_efficiency",
    ]);
    report.meta(format!("efficiency: {:?}, scaled by d^(1/5)", cfg.efficiency));
    for p in &points {
        let (acc, eff, scaled) = match &p.result {
            Ok(e) => (Cell::Float(e.acceptance), Cell::Float(e.efficiency), Cell::Float(e.scaled_efficiency)),
            Err(_) => (Cell::Empty, Cell::Empty, Cell::Empty),
        };
        report.push(vec![
            p.variant.clone().into(),
            p.d.into(),
            p.ell.into(),
            p.h.into(),
            p.exponent.into(),
            p.status().into(),
            acc,
            eff,
            scaled,
        ]);
    }
    Ok(report)
}
