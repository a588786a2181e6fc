//! TOML experiment configuration.
//!
//! A file names one experiment, a target, a list of proposal variants with step-size rules
//! and the run lengths. Step sizes are either explicit (`h`) or scaled (`ell`, giving
//! `h = ell^2 d^(-exponent)` with the variant's own exponent unless `exponent` is set).

use std::fs;
use std::path::{Path, PathBuf};

use fmala_core::diagnostics::{step_size, AsymptoticVariant, CoordMode};
use fmala_core::proposal::{GbomaParams, Method, ProposalVariant};
use fmala_core::sampler::{KernelComponent, KernelSpec, StartRule};
use fmala_core::target::TargetSpec;
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Syntax(String),
    #[error("invalid config field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    EfficiencySweep,
    TransientTrace,
    AcfCompare,
    Asymptotic,
    ErgodicityProbe,
    SingleRun,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::EfficiencySweep => "efficiency-sweep",
            Self::TransientTrace => "transient-trace",
            Self::AcfCompare => "acf-compare",
            Self::Asymptotic => "asymptotic",
            Self::ErgodicityProbe => "ergodicity-probe",
            Self::SingleRun => "single-run",
        }
    }

    fn default_steps(&self) -> usize {
        match self {
            Self::EfficiencySweep | Self::AcfCompare => 200_000,
            _ => 10_000,
        }
    }

    fn default_start(&self) -> StartChoice {
        match self {
            Self::AcfCompare => StartChoice::Warmstart { steps: 10_000 },
            _ => StartChoice::Origin,
        }
    }
}

/// How a chain's first state is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StartChoice {
    Origin,
    /// Exact `N(0, I)` draw.
    StandardNormal,
    /// Endpoint of an RWM chain at `h = 2.38^2 / d` run from the origin.
    Warmstart { steps: usize },
}

impl StartChoice {
    pub fn rule(&self, d: usize) -> StartRule {
        match *self {
            Self::Origin => StartRule::Origin,
            Self::StandardNormal => StartRule::StandardNormal,
            Self::Warmstart { steps } => StartRule::StationaryWarmstart {
                n_warm: steps,
                kernel: KernelSpec::single(
                    ProposalVariant::adjusted(Method::Rwm).expect("RWM is always valid"),
                    2.38 * 2.38 / d as f64,
                )
                .expect("RWM warm-start kernel is valid"),
            },
        }
    }
}

/// Step-size rule of one kernel component.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSize {
    Explicit(f64),
    Ell(f64),
    /// Scaled rule whose `ell` comes from a sweep grid.
    Grid(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpec {
    pub variant: ProposalVariant,
    pub step: StepSize,
    pub exponent: f64,
    /// `exponent` differs from the variant's scaling exponent.
    pub exponent_override: bool,
    pub weight: f64,
}

impl ComponentSpec {
    /// Step size in dimension `d`, with `ell` used for grid rules.
    pub fn h(&self, d: usize, ell: Option<f64>) -> f64 {
        match &self.step {
            StepSize::Explicit(h) => *h,
            StepSize::Ell(l) => step_size(*l, d, self.exponent),
            StepSize::Grid(_) => step_size(ell.expect("grid rule needs an ell value"), d, self.exponent),
        }
    }

    pub fn ell(&self) -> Option<f64> {
        match self.step {
            StepSize::Ell(l) => Some(l),
            _ => None,
        }
    }
}

/// A named kernel: one proposal, or a random mixture of several.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantSpec {
    pub label: String,
    pub components: Vec<ComponentSpec>,
}

impl VariantSpec {
    pub fn kernel(&self, d: usize, ell: Option<f64>) -> Result<KernelSpec, fmala_core::error::SamplerError> {
        KernelSpec::new(
            self.components
                .iter()
                .map(|c| KernelComponent {
                    variant: c.variant,
                    h: c.h(d, ell),
                    weight: c.weight,
                })
                .collect(),
        )
    }

    /// Sweep grid of a single-component variant.
    pub fn grid(&self) -> Option<&[f64]> {
        match self.components.as_slice() {
            [ComponentSpec {
                step: StepSize::Grid(g),
                ..
            }] => Some(g),
            _ => None,
        }
    }
}

/// One-dimensional potential for the asymptotic constants.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Gaussian {
        #[serde(default = "one_f64")]
        precision: f64,
    },
    DoubleWell,
    ExponentialClass {
        beta: f64,
        gamma: f64,
        #[serde(default)]
        r_pi: f64,
    },
}

impl PotentialSpec {
    pub fn target(&self) -> TargetSpec {
        match *self {
            Self::Gaussian { precision } => TargetSpec::Gaussian { dim: 1, precision },
            Self::DoubleWell => TargetSpec::DoubleWell { dim: 1 },
            Self::ExponentialClass { beta, gamma, r_pi } => TargetSpec::ExponentialClass { beta, gamma, r_pi },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Gaussian { precision } => format!("gaussian(precision={precision})"),
            Self::DoubleWell => "double-well".into(),
            Self::ExponentialClass { beta, gamma, r_pi } => {
                format!("exponential-class(beta={beta},gamma={gamma},r_pi={r_pi})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticSection {
    pub variants: Vec<AsymptoticVariant>,
    pub potentials: Vec<PotentialSpec>,
    pub n_samples: usize,
    pub ells: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Stable,
    Stuck,
    Diverged,
    Inconclusive,
    ScaleFailure,
}

impl Classification {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Stable => "stable",
            Self::Stuck => "stuck",
            Self::Diverged => "diverged",
            Self::Inconclusive => "inconclusive",
            Self::ScaleFailure => "scale-failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSpec {
    pub variant: ProposalVariant,
    pub beta: f64,
    pub gamma: f64,
    pub r_pi: f64,
    pub h: f64,
    pub starts: Vec<f64>,
    pub expected: Option<Classification>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicitySection {
    pub escape_radius: f64,
    pub acceptance_floor: f64,
    pub min_entries: usize,
    pub probes: Vec<ProbeSpec>,
}

/// A validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub n_steps: usize,
    pub burn_in: usize,
    pub stride: usize,
    pub start: StartChoice,
    pub target: Option<TargetSpec>,
    pub dims: Vec<usize>,
    pub variants: Vec<VariantSpec>,
    pub efficiency: CoordMode,
    pub max_lag: usize,
    pub asymptotic: Option<AsymptoticSection>,
    pub ergodicity: Option<ErgodicitySection>,
    pub out: Option<PathBuf>,
    /// Verbatim file contents, echoed into report metadata.
    pub source: String,
}

impl ExperimentConfig {
    /// Human-readable notes on every step-size rule that departs from the default exponent.
    pub fn overrides(&self) -> Vec<String> {
        let mut out = Vec::new();
        for v in &self.variants {
            for c in &v.components {
                if c.exponent_override {
                    out.push(format!(
                        "{} {} exponent {} (default {})",
                        v.label,
                        c.variant,
                        c.exponent,
                        c.variant.method().scaling_exponent()
                    ));
                }
            }
        }
        out
    }

    /// Target in dimension `d`.
    pub fn target_at(&self, d: usize) -> Result<TargetSpec, ConfigError> {
        self.target
            .as_ref()
            .map(|t| t.with_dim(d))
            .ok_or_else(|| invalid("target", "this experiment needs a target"))
    }

    pub fn dim(&self) -> Result<usize, ConfigError> {
        self.dims
            .first()
            .copied()
            .ok_or_else(|| invalid("dims", "no dimension given"))
    }
}

fn one_f64() -> f64 {
    1.0
}

fn default_burn_in() -> usize {
    1000
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum RawStart {
    Origin,
    StandardNormal,
    Warmstart,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    proposal: String,
    params: Option<GbomaParams>,
    h: Option<f64>,
    ell: Option<f64>,
    exponent: Option<f64>,
    #[serde(default = "one_f64")]
    weight: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVariant {
    label: Option<String>,
    proposal: Option<String>,
    params: Option<GbomaParams>,
    h: Option<f64>,
    ell: Option<f64>,
    exponent: Option<f64>,
    ells: Option<Vec<f64>>,
    components: Option<Vec<RawComponent>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawAsymptoticVariant {
    Name(String),
    Full(AsymptoticVariant),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAsymptotic {
    variants: Vec<RawAsymptoticVariant>,
    potentials: Vec<PotentialSpec>,
    #[serde(default)]
    n_samples: Option<usize>,
    ells: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbe {
    proposal: String,
    params: Option<GbomaParams>,
    beta: f64,
    gamma: f64,
    #[serde(default)]
    r_pi: f64,
    h: f64,
    starts: Option<Vec<f64>>,
    expected: Option<Classification>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawErgodicity {
    escape_radius: Option<f64>,
    acceptance_floor: Option<f64>,
    min_entries: Option<usize>,
    starts: Option<Vec<f64>>,
    probes: Vec<RawProbe>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Experiment,
    #[serde(default)]
    seed: u64,
    n_steps: Option<usize>,
    #[serde(default = "default_burn_in")]
    burn_in: usize,
    #[serde(default = "default_stride")]
    stride: usize,
    start: Option<RawStart>,
    warmstart_steps: Option<usize>,
    target: Option<TargetSpec>,
    #[serde(default)]
    dims: Vec<usize>,
    #[serde(default)]
    ells: Vec<f64>,
    efficiency: Option<CoordMode>,
    max_lag: Option<usize>,
    #[serde(default)]
    variants: Vec<RawVariant>,
    asymptotic: Option<RawAsymptotic>,
    ergodicity: Option<RawErgodicity>,
    out: Option<PathBuf>,
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    validate(raw, text)
}

fn parse_variant(name: &str, params: Option<GbomaParams>, field: &str) -> Result<ProposalVariant, ConfigError> {
    let lower = name.to_ascii_lowercase();
    let adjusted = match lower.as_str() {
        "gboma" => Some(true),
        "gbuoa" => Some(false),
        _ => None,
    };
    if let Some(adjusted) = adjusted {
        let p = params.ok_or_else(|| invalid(field, format!("`{name}` needs a `params` table")))?;
        return ProposalVariant::new(Method::Gboma(p), adjusted).map_err(|e| invalid(field, e.to_string()));
    }
    if params.is_some() {
        return Err(invalid(field, format!("`params` only applies to gboma, not `{name}`")));
    }
    name.parse().map_err(|_| invalid(field, format!("unknown proposal variant `{name}`")))
}

fn check_positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

struct RuleInput<'a> {
    h: Option<f64>,
    ell: Option<f64>,
    exponent: Option<f64>,
    grid: Option<&'a [f64]>,
}

fn component(
    field: &str,
    variant: ProposalVariant,
    rule: RuleInput<'_>,
    weight: f64,
) -> Result<ComponentSpec, ConfigError> {
    let default_exponent = variant.method().scaling_exponent();
    let step = match (rule.h, rule.ell) {
        (Some(_), Some(_)) => return Err(invalid(field, "give either `h` or `ell`, not both")),
        (Some(h), None) => {
            if rule.exponent.is_some() {
                return Err(invalid(format!("{field}.exponent"), "only applies to `ell` rules"));
            }
            StepSize::Explicit(check_positive(&format!("{field}.h"), h)?)
        }
        (None, Some(l)) => StepSize::Ell(check_positive(&format!("{field}.ell"), l)?),
        (None, None) => match rule.grid {
            Some(g) => {
                for (i, &l) in g.iter().enumerate() {
                    check_positive(&format!("{field}.ells[{i}]"), l)?;
                }
                StepSize::Grid(g.to_vec())
            }
            None => return Err(invalid(field, "needs a step size: `h` or `ell`")),
        },
    };
    let exponent = rule.exponent.unwrap_or(default_exponent);
    if !exponent.is_finite() {
        return Err(invalid(format!("{field}.exponent"), "must be finite"));
    }
    if !(weight.is_finite() && weight > 0.0) {
        return Err(invalid(format!("{field}.weight"), "must be positive"));
    }
    Ok(ComponentSpec {
        variant,
        step,
        exponent,
        exponent_override: rule.exponent.is_some() && exponent != default_exponent,
        weight,
    })
}

fn validate_variant(i: usize, raw: RawVariant, sweep_grid: Option<&[f64]>) -> Result<VariantSpec, ConfigError> {
    let field = format!("variants[{i}]");
    let grid = raw.ells.as_deref().or(sweep_grid);
    let components = match (raw.proposal, raw.components) {
        (Some(_), Some(_)) => return Err(invalid(&field, "give either `proposal` or `components`, not both")),
        (None, None) => return Err(invalid(&field, "needs `proposal` or `components`")),
        (Some(name), None) => {
            let v = parse_variant(&name, raw.params, &format!("{field}.proposal"))?;
            let rule = RuleInput {
                h: raw.h,
                ell: raw.ell,
                exponent: raw.exponent,
                grid,
            };
            vec![component(&field, v, rule, 1.0)?]
        }
        (None, Some(comps)) => {
            if raw.h.is_some() || raw.ell.is_some() || raw.exponent.is_some() || raw.params.is_some() {
                return Err(invalid(&field, "step rules belong inside `components`"));
            }
            if comps.is_empty() {
                return Err(invalid(format!("{field}.components"), "is empty"));
            }
            comps
                .into_iter()
                .enumerate()
                .map(|(j, c)| {
                    let cf = format!("{field}.components[{j}]");
                    let v = parse_variant(&c.proposal, c.params, &format!("{cf}.proposal"))?;
                    let rule = RuleInput {
                        h: c.h,
                        ell: c.ell,
                        exponent: c.exponent,
                        grid: None,
                    };
                    component(&cf, v, rule, c.weight)
                })
                .collect::<Result<_, _>>()?
        }
    };
    let label = raw.label.unwrap_or_else(|| {
        if let [c] = components.as_slice() {
            c.variant.label().to_string()
        } else {
            let parts: Vec<&str> = components.iter().map(|c| c.variant.label()).collect();
            format!("hybrid-{}", parts.join("-"))
        }
    });
    Ok(VariantSpec { label, components })
}

fn asymptotic_variant(i: usize, raw: RawAsymptoticVariant) -> Result<AsymptoticVariant, ConfigError> {
    match raw {
        RawAsymptoticVariant::Full(v) => Ok(v),
        RawAsymptoticVariant::Name(name) => match name.to_ascii_lowercase().as_str() {
            "fm" | "fmala" => Ok(AsymptoticVariant::Fm),
            "mo" | "moma" => Ok(AsymptoticVariant::Mo),
            "bo" | "boma" => Ok(AsymptoticVariant::Bo),
            _ => Err(invalid(
                format!("asymptotic.variants[{i}]"),
                format!("unknown asymptotic variant `{name}`"),
            )),
        },
    }
}

fn validate(raw: RawConfig, text: &str) -> Result<ExperimentConfig, ConfigError> {
    let experiment = raw.experiment;
    if raw.stride == 0 {
        return Err(invalid("stride", "must be at least 1"));
    }
    let start = match raw.start {
        None => match (experiment.default_start(), raw.warmstart_steps) {
            (StartChoice::Warmstart { .. }, Some(steps)) => StartChoice::Warmstart { steps },
            (s, _) => s,
        },
        Some(RawStart::Origin) => StartChoice::Origin,
        Some(RawStart::StandardNormal) => StartChoice::StandardNormal,
        Some(RawStart::Warmstart) => StartChoice::Warmstart {
            steps: raw.warmstart_steps.unwrap_or(10_000),
        },
    };
    let mut dims = raw.dims;
    if dims.is_empty() {
        if let Some(t) = &raw.target {
            dims.push(t.dim());
        }
    }
    if let Some(i) = dims.iter().position(|&d| d == 0) {
        return Err(invalid(format!("dims[{i}]"), "dimension must be at least 1"));
    }
    let sweep_grid = (experiment == Experiment::EfficiencySweep).then_some(raw.ells.as_slice());
    let variants: Vec<VariantSpec> = raw
        .variants
        .into_iter()
        .enumerate()
        .map(|(i, v)| validate_variant(i, v, sweep_grid))
        .collect::<Result<_, _>>()?;

    let needs_target = !matches!(experiment, Experiment::Asymptotic | Experiment::ErgodicityProbe);
    if needs_target {
        if raw.target.is_none() {
            return Err(invalid("target", "missing"));
        }
        if variants.is_empty() {
            return Err(invalid("variants", "at least one variant is required"));
        }
    }
    if experiment == Experiment::EfficiencySweep {
        for (i, v) in variants.iter().enumerate() {
            if v.components.len() != 1 {
                return Err(invalid(format!("variants[{i}]"), "sweeps take single proposals"));
            }
        }
    }
    if experiment == Experiment::SingleRun && variants.len() != 1 {
        return Err(invalid("variants", "single-run takes exactly one variant"));
    }

    let asymptotic = match raw.asymptotic {
        None if experiment == Experiment::Asymptotic => return Err(invalid("asymptotic", "missing section")),
        None => None,
        Some(a) => {
            let variants = a
                .variants
                .into_iter()
                .enumerate()
                .map(|(i, v)| asymptotic_variant(i, v))
                .collect::<Result<_, _>>()?;
            let ells = a
                .ells
                .unwrap_or_else(|| (1..=30).map(|i| 0.1 * i as f64).collect());
            Some(AsymptoticSection {
                variants,
                potentials: a.potentials,
                n_samples: a.n_samples.unwrap_or(100_000),
                ells,
            })
        }
    };

    let ergodicity = match raw.ergodicity {
        None if experiment == Experiment::ErgodicityProbe => {
            return Err(invalid("ergodicity", "missing section"))
        }
        None => None,
        Some(e) => {
            let starts = e.starts.unwrap_or_else(|| vec![5.0, 20.0]);
            let probes = e
                .probes
                .into_iter()
                .enumerate()
                .map(|(i, p)| {
                    let field = format!("ergodicity.probes[{i}]");
                    Ok(ProbeSpec {
                        variant: parse_variant(&p.proposal, p.params, &format!("{field}.proposal"))?,
                        beta: check_positive(&format!("{field}.beta"), p.beta)?,
                        gamma: check_positive(&format!("{field}.gamma"), p.gamma)?,
                        r_pi: p.r_pi,
                        h: check_positive(&format!("{field}.h"), p.h)?,
                        starts: p.starts.unwrap_or_else(|| starts.clone()),
                        expected: p.expected,
                    })
                })
                .collect::<Result<_, ConfigError>>()?;
            Some(ErgodicitySection {
                escape_radius: e.escape_radius.unwrap_or(1e6),
                acceptance_floor: e.acceptance_floor.unwrap_or(1e-3),
                min_entries: e.min_entries.unwrap_or(2),
                probes,
            })
        }
    };

    Ok(ExperimentConfig {
        experiment,
        seed: raw.seed,
        n_steps: raw.n_steps.unwrap_or_else(|| experiment.default_steps()),
        burn_in: raw.burn_in,
        stride: raw.stride,
        start,
        target: raw.target,
        dims,
        variants,
        efficiency: raw.efficiency.unwrap_or(CoordMode::First),
        max_lag: raw.max_lag.unwrap_or(100),
        asymptotic,
        ergodicity,
        out: raw.out,
        source: text.to_string(),
    })
}
