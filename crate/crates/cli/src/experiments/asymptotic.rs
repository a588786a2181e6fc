use fmala_core::diagnostics::{k_constant, limit_acceptance, limit_speed, optimal_ell, AsymptoticConstants};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{derive_seed, RunError};
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{Cell, CsvReport};

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticRow {
    pub potential: String,
    pub constants: AsymptoticConstants,
    /// Speed-maximizing `ell` and the limiting acceptance there; `None` when `K = 0`.
    pub optimum: Option<(f64, f64)>,
}

pub fn asymptotic_constants(cfg: &ExperimentConfig) -> Result<Vec<AsymptoticRow>, RunError> {
    let section = cfg.asymptotic.as_ref().ok_or_else(|| ConfigError::Invalid {
        field: "asymptotic".into(),
        message: "missing section".into(),
    })?;
    let mut jobs = Vec::new();
    for (pi, p) in section.potentials.iter().enumerate() {
        let g = p.target().potential()?.expect("one-dimensional potential");
        for (vi, &v) in section.variants.iter().enumerate() {
            jobs.push((p.label(), g.clone(), v, derive_seed(cfg.seed, &[pi as u64, vi as u64])));
        }
    }
    jobs.into_par_iter()
        .map(|(label, g, v, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let constants = k_constant(v, g.as_ref(), section.n_samples, &mut rng)?;
            let optimum = optimal_ell(constants.k_value).ok();
            Ok(AsymptoticRow {
                potential: label,
                constants,
                optimum,
            })
        })
        .collect()
}

pub fn run_asymptotic(cfg: &ExperimentConfig) -> Result<CsvReport, RunError> {
    let rows = asymptotic_constants(cfg)?;
    let ells = &cfg.asymptotic.as_ref().expect("checked above").ells;
    let mut report = CsvReport::new(&[
        "kind",
        "variant",
        "potential",
        "status",
        "k",
        "k_std_error",
        "ell_star",
        "acceptance_at_star",
        "ell",
        "acceptance",
        "speed",
        "speed_normalization",
    ]);
    report.meta("speed_normalization = 1 / speed(ell_star); multiply speed by it to rescale the curve to a unit maximum");
    for r in &rows {
        let c = &r.constants;
        let status = if r.optimum.is_some() { "ok" } else { "degenerate" };
        let (ell_star, acc_star) = match r.optimum {
            Some((l, a)) => (Cell::Float(l), Cell::Float(a)),
            None => (Cell::Empty, Cell::Empty),
        };
        let norm = r.optimum.map(|(l, _)| 1.0 / limit_speed(l, c.k_value));
        report.push(vec![
            "constant".into(),
            c.variant.label().into(),
            r.potential.clone().into(),
            status.into(),
            c.k_value.into(),
            c.mc_std_error.into(),
            ell_star.clone(),
            acc_star.clone(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
            norm.into(),
        ]);
        for &ell in ells {
            report.push(vec![
                "curve".into(),
                c.variant.label().into(),
                r.potential.clone().into(),
                status.into(),
                c.k_value.into(),
                c.mc_std_error.into(),
                ell_star.clone(),
                acc_star.clone(),
                ell.into(),
                limit_acceptance(ell, c.k_value).into(),
                limit_speed(ell, c.k_value).into(),
                norm.into(),
            ]);
        }
    }
    Ok(report)
}
