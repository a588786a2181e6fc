use fmala_core::diagnostics::stationary_moments;
use fmala_core::error::{ProposalError, SamplerError};
use fmala_core::sampler::{Chain, KernelSpec};
use fmala_core::target::TargetSpec;
use rayon::prelude::*;

use super::{derive_seed, RunError};
use crate::config::{Classification, ConfigError, ErgodicitySection, ExperimentConfig, ProbeSpec};
use crate::report::{Cell, CsvReport};

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome {
    pub variant: String,
    pub beta: f64,
    pub gamma: f64,
    pub h: f64,
    pub start: f64,
    pub classification: Classification,
    pub expected: Option<Classification>,
    pub steps_run: usize,
    pub acceptance: f64,
    pub max_abs: f64,
    pub min_abs: f64,
    /// Number of moves from outside into `[mean - 2 sd, mean + 2 sd]`.
    pub band_entries: usize,
    pub sigma_hat: f64,
    pub note: String,
}

fn probe(spec: &ProbeSpec, start: f64, section: &ErgodicitySection, n_steps: usize, seed: u64) -> Result<ProbeOutcome, RunError> {
    let target_spec = TargetSpec::ExponentialClass {
        beta: spec.beta,
        gamma: spec.gamma,
        r_pi: spec.r_pi,
    };
    let target = target_spec.build()?;
    let g = target_spec.potential()?.expect("exponential class has a potential");
    let (mean, var) = stationary_moments(g.as_ref())?;
    let sigma = var.sqrt();
    let inside = |x: f64| (x - mean).abs() <= 2.0 * sigma;

    let kernel = KernelSpec::single(spec.variant, spec.h)?;
    let mut chain = Chain::new(target.as_ref(), &kernel, vec![start], seed);
    let (mut accepted, mut steps) = (0usize, 0usize);
    let (mut max_abs, mut min_abs) = (start.abs(), start.abs());
    let mut was_inside = inside(start);
    let mut entries = 0;
    let mut diverged = false;
    let mut note = String::new();
    let mut scale_failure = false;
    for _ in 0..n_steps {
        match chain.step() {
            Ok(out) => {
                steps += 1;
                accepted += out.accepted as usize;
                let x = chain.x()[0];
                if !x.is_finite() || x.abs() > section.escape_radius {
                    max_abs = x.abs();
                    diverged = true;
                    break;
                }
                max_abs = max_abs.max(x.abs());
                min_abs = min_abs.min(x.abs());
                let now = inside(x);
                if now && !was_inside {
                    entries += 1;
                }
                was_inside = now;
            }
            Err(SamplerError::Step {
                source: ProposalError::ScaleNotPositive(msg),
                ..
            }) => {
                scale_failure = true;
                note = msg;
                break;
            }
            Err(e) => {
                note = e.to_string();
                break;
            }
        }
    }
    let acceptance = if steps == 0 { 0.0 } else { accepted as f64 / steps as f64 };
    let classification = if diverged {
        Classification::Diverged
    } else if scale_failure {
        Classification::ScaleFailure
    } else if !note.is_empty() {
        Classification::Inconclusive
    } else if acceptance < section.acceptance_floor && min_abs >= spec.r_pi {
        Classification::Stuck
    } else if entries >= section.min_entries {
        Classification::Stable
    } else {
        Classification::Inconclusive
    };
    Ok(ProbeOutcome {
        variant: spec.variant.to_string(),
        beta: spec.beta,
        gamma: spec.gamma,
        h: spec.h,
        start,
        classification,
        expected: spec.expected,
        steps_run: steps,
        acceptance,
        max_abs,
        min_abs,
        band_entries: entries,
        sigma_hat: sigma,
        note,
    })
}

/// Classifies every (probe, start) pair.
///
/// diverged: `|x|` passes the escape radius. stuck: acceptance below the floor and `|x|`
/// never below `r_pi`. stable: at least `min_entries` entries into the two-sigma band.
pub fn ergodicity_probes(cfg: &ExperimentConfig) -> Result<Vec<ProbeOutcome>, RunError> {
    let section = cfg.ergodicity.as_ref().ok_or_else(|| ConfigError::Invalid {
        field: "ergodicity".into(),
        message: "missing section".into(),
    })?;
    let jobs: Vec<(usize, usize)> = section
        .probes
        .iter()
        .enumerate()
        .flat_map(|(i, p)| (0..p.starts.len()).map(move |j| (i, j)))
        .collect();
    jobs.into_par_iter()
        .map(|(i, j)| {
            let p = &section.probes[i];
            probe(p, p.starts[j], section, cfg.n_steps, derive_seed(cfg.seed, &[i as u64, j as u64]))
        })
        .collect()
}

pub fn run_ergodicity_probe(cfg: &ExperimentConfig) -> Result<CsvReport, RunError> {
    let outcomes = ergodicity_probes(cfg)?;
    let section = cfg.ergodicity.as_ref().expect("checked above");
    let mut report = CsvReport::new(&[
        "variant",
        "beta",
        "gamma",
        "h",
        "start",
        "classification",
        "expected",
        "matches",
        "steps_run",
        "acceptance",
        "max_abs",
        "min_abs",
        "band_entries",
        "sigma_hat",
        "note",
    ]);
    report.meta(format!(
        "escape radius {}, acceptance floor {}, band entries needed {}, steps {}",
        section.escape_radius, section.acceptance_floor, section.min_entries, cfg.n_steps
    ));
    for o in &outcomes {
        report.push(vec![
            o.variant.clone().into(),
            o.beta.into(),
            o.gamma.into(),
            o.h.into(),
            o.start.into(),
            o.classification.name().into(),
            o.expected.map_or(Cell::Empty, |e| e.name().into()),
            o.expected.map_or(Cell::Empty, |e| (e == o.classification).into()),
            o.steps_run.into(),
            o.acceptance.into(),
            o.max_abs.into(),
            o.min_abs.into(),
            o.band_entries.into(),
            o.sigma_hat.into(),
            o.note.clone().into(),
        ]);
    }
    Ok(report)
}
