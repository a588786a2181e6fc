//! Metropolis-Hastings, unadjusted and hybrid chains with reproducible random streams.
//!
//! Each chain owns one ChaCha8 stream seeded from its `seed`. A step consumes, in order:
//! one uniform selecting the kernel component (only when the kernel has more than one
//! component), `d` standard normals for the proposal noise, and, for adjusted components,
//! one uniform for the accept test. The accept uniform is drawn even when the move is
//! certain, so chains that share a seed share their noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{ProposalError, SamplerError};
use crate::proposal::{log_q, moments_from_local, sample, ProposalMoments, ProposalVariant};
use crate::target::{DerivativeLevel, LocalDerivatives, TargetModel, TargetSpec};

/// Stream id of the warm-start chain; the main chain uses stream 0.
const WARMSTART_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelComponent {
    pub variant: ProposalVariant,
    pub h: f64,
    pub weight: f64,
}

/// Mixture of proposal kernels; weights are normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    components: Vec<KernelComponent>,
}

impl KernelSpec {
    pub fn new(components: Vec<KernelComponent>) -> Result<Self, SamplerError> {
        if components.is_empty() {
            return Err(SamplerError::InvalidKernel("no components".into()));
        }
        let mut total = 0.0;
        for c in &components {
            if !(c.h > 0.0) || !c.h.is_finite() {
                return Err(SamplerError::InvalidKernel(format!(
                    "{}: step size must be positive, got {}",
                    c.variant, c.h
                )));
            }
            if !(c.weight >= 0.0) || !c.weight.is_finite() {
                return Err(SamplerError::InvalidKernel(format!(
                    "{}: weight must be non-negative, got {}",
                    c.variant, c.weight
                )));
            }
            total += c.weight;
        }
        if !(total > 0.0) {
            return Err(SamplerError::InvalidKernel("weights sum to zero".into()));
        }
        let components = components
            .into_iter()
            .map(|c| KernelComponent {
                weight: c.weight / total,
                ..c
            })
            .collect();
        Ok(Self { components })
    }

    pub fn single(variant: ProposalVariant, h: f64) -> Result<Self, SamplerError> {
        Self::new(vec![KernelComponent {
            variant,
            h,
            weight: 1.0,
        }])
    }

    /// Two-component mixture with probability `p` on the first.
    pub fn hybrid(
        first: (ProposalVariant, f64),
        second: (ProposalVariant, f64),
        p: f64,
    ) -> Result<Self, SamplerError> {
        Self::new(vec![
            KernelComponent {
                variant: first.0,
                h: first.1,
                weight: p,
            },
            KernelComponent {
                variant: second.0,
                h: second.1,
                weight: 1.0 - p,
            },
        ])
    }

    pub fn components(&self) -> &[KernelComponent] {
        &self.components
    }

    pub fn label(&self) -> String {
        if let [c] = self.components.as_slice() {
            return c.variant.to_string();
        }
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|c| format!("{}:{}", c.variant, c.weight))
            .collect();
        format!("hybrid[{}]", parts.join(","))
    }

    fn select(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            acc += c.weight;
            if u < acc {
                return i;
            }
        }
        self.components.len() - 1
    }
}

/// Current point with its derivatives and per-component proposal moments.
#[derive(Debug, Clone)]
pub struct ChainState {
    x: Vec<f64>,
    local: LocalDerivatives,
    level: DerivativeLevel,
    moments: Vec<Option<ProposalMoments>>,
}

impl ChainState {
    pub fn new(x: Vec<f64>, target: &dyn TargetModel, kernel: &KernelSpec) -> Self {
        let level = DerivativeLevel::Value;
        let local = target.local(&x, level);
        Self {
            x,
            local,
            level,
            moments: vec![None; kernel.components.len()],
        }
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn log_density(&self) -> f64 {
        self.local.log_density
    }

    fn ensure(&mut self, target: &dyn TargetModel, level: DerivativeLevel) {
        if level > self.level {
            self.local = target.local(&self.x, level);
            self.level = level;
        }
    }

    fn ensure_moments(
        &mut self,
        idx: usize,
        c: &KernelComponent,
        target: &dyn TargetModel,
    ) -> Result<(), ProposalError> {
        if self.moments[idx].is_none() {
            self.ensure(target, c.variant.method().derivative_level());
            self.moments[idx] = Some(moments_from_local(&c.variant, &self.x, c.h, &self.local)?);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub component: usize,
    pub accepted: bool,
    /// `min(0, log MH ratio)`; 0 for unadjusted moves.
    pub log_alpha: f64,
    /// `||y - x||^2` of the proposal, accepted or not.
    pub proposal_sq_jump: f64,
    /// The scale at the proposed point was degenerate, forcing a rejection.
    pub proposal_failed: bool,
}

/// `min(0, [log pi(y) + log q(y, x)] - [log pi(x) + log q(x, y)])` for one component.
/// A degenerate scale at `y` gives `-inf`.
pub fn log_acceptance(
    variant: &ProposalVariant,
    h: f64,
    target: &dyn TargetModel,
    x: &[f64],
    y: &[f64],
) -> Result<f64, ProposalError> {
    let level = variant.method().derivative_level();
    let lx = target.local(x, level);
    let mx = moments_from_local(variant, x, h, &lx)?;
    let ly = target.local(y, level);
    Ok(match moments_from_local(variant, y, h, &ly) {
        Ok(my) => clamp_log_alpha(ly.log_density + log_q(&my, x) - lx.log_density - log_q(&mx, y)),
        Err(ProposalError::ScaleNotPositive(_)) => f64::NEG_INFINITY,
        Err(e) => return Err(e),
    })
}

fn clamp_log_alpha(r: f64) -> f64 {
    if r.is_nan() {
        f64::NEG_INFINITY
    } else {
        r.min(0.0)
    }
}

fn draw_noise<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// One step of `kernel` from `state`, updating it in place.
pub fn step_state<R: Rng + ?Sized>(
    state: &mut ChainState,
    kernel: &KernelSpec,
    target: &dyn TargetModel,
    rng: &mut R,
) -> Result<StepOutcome, ProposalError> {
    let component = if kernel.components.len() > 1 {
        kernel.select(rng.random::<f64>())
    } else {
        0
    };
    let c = kernel.components[component];
    let xi = draw_noise(rng, state.x.len());
    state.ensure_moments(component, &c, target)?;
    let mx = state.moments[component].as_ref().expect("moments just computed");
    let y = sample(mx, &xi);
    let proposal_sq_jump: f64 = y.iter().zip(&state.x).map(|(a, b)| (a - b) * (a - b)).sum();
    let level = c.variant.method().derivative_level();

    if !c.variant.is_adjusted() {
        let local = target.local(&y, level);
        *state = ChainState {
            x: y,
            local,
            level,
            moments: vec![None; kernel.components.len()],
        };
        return Ok(StepOutcome {
            component,
            accepted: true,
            log_alpha: 0.0,
            proposal_sq_jump,
            proposal_failed: false,
        });
    }

    let forward = log_q(mx, &y);
    let local_y = target.local(&y, level);
    let (log_alpha, my, proposal_failed) = match moments_from_local(&c.variant, &y, c.h, &local_y) {
        Ok(my) => {
            let r = local_y.log_density + log_q(&my, &state.x) - state.local.log_density - forward;
            (clamp_log_alpha(r), Some(my), false)
        }
        Err(ProposalError::ScaleNotPositive(_)) => (f64::NEG_INFINITY, None, true),
        Err(e) => return Err(e),
    };
    let u: f64 = rng.random();
    let accepted = log_alpha >= 0.0 || u.ln() < log_alpha;
    if accepted {
        let mut moments = vec![None; kernel.components.len()];
        moments[component] = my;
        *state = ChainState {
            x: y,
            local: local_y,
            level,
            moments,
        };
    }
    Ok(StepOutcome {
        component,
        accepted,
        log_alpha,
        proposal_sq_jump,
        proposal_failed,
    })
}

/// One Metropolis-Hastings step from `x`. Returns the next point and the outcome.
pub fn mh_step<R: Rng + ?Sized>(
    x: &[f64],
    kernel: &KernelSpec,
    target: &dyn TargetModel,
    rng: &mut R,
) -> Result<(Vec<f64>, StepOutcome), ProposalError> {
    let mut state = ChainState::new(x.to_vec(), target, kernel);
    let out = step_state(&mut state, kernel, target, rng)?;
    Ok((state.x, out))
}

/// One unadjusted step `x -> mu(x) + S(x) xi`, whatever the variant's adjusted flag.
pub fn unadjusted_step<R: Rng + ?Sized>(
    x: &[f64],
    variant: &ProposalVariant,
    h: f64,
    target: &dyn TargetModel,
    rng: &mut R,
) -> Result<Vec<f64>, ProposalError> {
    let xi = draw_noise(rng, x.len());
    let local = target.local(x, variant.method().derivative_level());
    let m = moments_from_local(variant, x, h, &local)?;
    Ok(sample(&m, &xi))
}

/// Single chain with cached state, for callers that drive the loop themselves.
pub struct Chain<'a> {
    target: &'a dyn TargetModel,
    kernel: &'a KernelSpec,
    rng: ChaCha8Rng,
    state: ChainState,
    steps: usize,
}

impl<'a> Chain<'a> {
    pub fn new(target: &'a dyn TargetModel, kernel: &'a KernelSpec, x0: Vec<f64>, seed: u64) -> Self {
        Self::with_rng(target, kernel, x0, stream_rng(seed, 0))
    }

    fn with_rng(
        target: &'a dyn TargetModel,
        kernel: &'a KernelSpec,
        x0: Vec<f64>,
        rng: ChaCha8Rng,
    ) -> Self {
        let state = ChainState::new(x0, target, kernel);
        Self {
            target,
            kernel,
            rng,
            state,
            steps: 0,
        }
    }

    pub fn step(&mut self) -> Result<StepOutcome, SamplerError> {
        let out = step_state(&mut self.state, self.kernel, self.target, &mut self.rng)
            .map_err(|source| SamplerError::Step {
                step: self.steps,
                source,
            })?;
        self.steps += 1;
        Ok(out)
    }

    pub fn x(&self) -> &[f64] {
        self.state.x()
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartRule {
    Origin,
    Vector(Vec<f64>),
    /// Exact draw from `N(0, I)`; stationary for the standard Gaussian product target.
    StandardNormal,
    /// Endpoint of an auxiliary chain run for `n_warm` steps from the origin.
    StationaryWarmstart { n_warm: usize, kernel: KernelSpec },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub target: TargetSpec,
    pub kernel: KernelSpec,
    pub n_steps: usize,
    pub start: StartRule,
    pub seed: u64,
    pub burn_in: usize,
    /// Record every `stride`-th state in the series.
    pub stride: usize,
}

impl RunConfig {
    pub const DEFAULT_BURN_IN: usize = 1000;

    pub fn new(target: TargetSpec, kernel: KernelSpec, n_steps: usize) -> Self {
        Self {
            target,
            kernel,
            n_steps,
            start: StartRule::Origin,
            seed: 0,
            burn_in: Self::DEFAULT_BURN_IN,
            stride: 1,
        }
    }
}

/// Recorded output of one chain.
///
/// Series entry `k` describes step `k * stride` (state after the step). Summary counters
/// cover every step at or after `burn_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub dim: usize,
    pub label: String,
    pub stride: usize,
    pub burn_in: usize,
    pub n_steps: usize,
    pub initial_first_coord: f64,
    pub initial_sq_norm: f64,
    pub first_coord: Vec<f64>,
    pub sq_norm: Vec<f64>,
    pub accepted: Vec<bool>,
    pub log_alpha: Vec<f64>,
    pub proposal_sq_jump: Vec<f64>,
    /// Steps after burn-in.
    pub counted_steps: usize,
    pub counted_accepted: usize,
    /// Sum of `||X_{k+1} - X_k||^2` after burn-in.
    pub counted_sq_move: f64,
    /// Proposals rejected because the reverse scale was degenerate.
    pub proposal_failures: usize,
    pub final_state: Vec<f64>,
}

impl ChainTrace {
    fn empty(dim: usize, label: String, cfg: &RunConfig, x0: &[f64]) -> Self {
        let cap = cfg.n_steps / cfg.stride.max(1) + 1;
        Self {
            dim,
            label,
            stride: cfg.stride,
            burn_in: cfg.burn_in,
            n_steps: cfg.n_steps,
            initial_first_coord: x0[0],
            initial_sq_norm: sq_norm(x0),
            first_coord: Vec::with_capacity(cap),
            sq_norm: Vec::with_capacity(cap),
            accepted: Vec::with_capacity(cap),
            log_alpha: Vec::with_capacity(cap),
            proposal_sq_jump: Vec::with_capacity(cap),
            counted_steps: 0,
            counted_accepted: 0,
            counted_sq_move: 0.0,
            proposal_failures: 0,
            final_state: x0.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.first_coord.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first_coord.is_empty()
    }
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn initial_point(
    cfg: &RunConfig,
    target: &dyn TargetModel,
) -> Result<Vec<f64>, SamplerError> {
    let d = target.dim();
    match &cfg.start {
        StartRule::Origin => Ok(vec![0.0; d]),
        StartRule::Vector(v) => {
            if v.len() != d || v.iter().any(|a| !a.is_finite()) {
                return Err(SamplerError::InvalidConfig(format!(
                    "start vector must be finite with length {d}, got length {}",
                    v.len()
                )));
            }
            Ok(v.clone())
        }
        StartRule::StandardNormal => {
            let mut rng = stream_rng(cfg.seed, WARMSTART_STREAM);
            Ok(draw_noise(&mut rng, d))
        }
        StartRule::StationaryWarmstart { n_warm, kernel } => {
            let mut chain =
                Chain::with_rng(target, kernel, vec![0.0; d], stream_rng(cfg.seed, WARMSTART_STREAM));
            for _ in 0..*n_warm {
                chain.step()?;
            }
            Ok(chain.state.x)
        }
    }
}

/// Runs the chain described by `cfg`.
pub fn run_chain(cfg: &RunConfig) -> Result<ChainTrace, SamplerError> {
    let target = cfg.target.build()?;
    run_chain_on(target.as_ref(), cfg)
}

/// Runs `cfg` on an already built target; `cfg.target` is only used for its label.
pub fn run_chain_on(target: &dyn TargetModel, cfg: &RunConfig) -> Result<ChainTrace, SamplerError> {
    if cfg.stride == 0 {
        return Err(SamplerError::InvalidConfig("stride must be at least 1".into()));
    }
    let x0 = initial_point(cfg, target)?;
    let mut trace = ChainTrace::empty(target.dim(), cfg.kernel.label(), cfg, &x0);
    let mut chain = Chain::new(target, &cfg.kernel, x0, cfg.seed);
    for k in 0..cfg.n_steps {
        let out = chain.step()?;
        if k >= cfg.burn_in {
            trace.counted_steps += 1;
            if out.accepted {
                trace.counted_accepted += 1;
                trace.counted_sq_move += out.proposal_sq_jump;
            }
        }
        if out.proposal_failed {
            trace.proposal_failures += 1;
        }
        if (k + 1) % cfg.stride == 0 {
            let x = chain.x();
            trace.first_coord.push(x[0]);
            trace.sq_norm.push(sq_norm(x));
            trace.accepted.push(out.accepted);
            trace.log_alpha.push(out.log_alpha);
            trace.proposal_sq_jump.push(out.proposal_sq_jump);
        }
    }
    trace.final_state = chain.state.x;
    Ok(trace)
}

/// Runs independent chains concurrently; results keep the input order.
pub fn run_parallel(cfgs: &[RunConfig]) -> Vec<Result<ChainTrace, SamplerError>> {
    cfgs.par_iter().map(run_chain).collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::proposal::Method;
    use crate::target::{make_product_target, DoubleWell, Gaussian};

    fn v(s: &str) -> ProposalVariant {
        s.parse().unwrap()
    }

    fn gaussian_spec(dim: usize) -> TargetSpec {
        TargetSpec::Gaussian { dim, precision: 1.0 }
    }

    #[test]
    fn weights_are_normalized() {
        let k = KernelSpec::new(vec![
            KernelComponent {
                variant: v("rwm"),
                h: 0.1,
                weight: 3.0,
            },
            KernelComponent {
                variant: v("fmala"),
                h: 0.2,
                weight: 1.0,
            },
        ])
        .unwrap();
        assert_eq!(k.components()[0].weight, 0.75);
        assert_eq!(k.components()[1].weight, 0.25);
        assert_eq!(k.select(0.7), 0);
        assert_eq!(k.select(0.8), 1);
        assert!(KernelSpec::new(vec![]).is_err());
        assert!(KernelSpec::single(v("rwm"), 0.0).is_err());
    }

    #[test]
    fn rwm_ratio_is_density_ratio() {
        let t = make_product_target(Arc::new(Gaussian::standard()), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let x = draw_noise(&mut rng, 3);
            let y = draw_noise(&mut rng, 3);
            let la = log_acceptance(&v("rwm"), 0.5, &t, &x, &y).unwrap();
            let expect = (t.log_density_unnorm(&y) - t.log_density_unnorm(&x)).min(0.0);
            assert!((la - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_move_is_always_accepted() {
        let t = make_product_target(Arc::new(DoubleWell), 2).unwrap();
        for name in ["rwm", "mala", "fmala", "moma", "boma"] {
            let x = [0.4, -1.3];
            assert_eq!(log_acceptance(&v(name), 0.3, &t, &x, &x).unwrap(), 0.0, "{name}");
        }
    }

    #[test]
    fn mala_hand_example() {
        let t = make_product_target(Arc::new(Gaussian::standard()), 1).unwrap();
        let (x, h, xi) = (1.0f64, 0.1f64, 0.5f64);
        let y = x * (1.0 - h / 2.0) + h.sqrt() * xi;
        assert!((y - 1.108_113_883_008_419).abs() < 1e-12);
        // log pi(y) - (x - y + h y / 2)^2 / (2h) - [log pi(x) - (y - x + h x / 2)^2 / (2h)]
        let forward = (y - x + h * x / 2.0).powi(2) / (2.0 * h);
        let backward = (x - y + h * y / 2.0).powi(2) / (2.0 * h);
        let oracle = ((-y * y / 2.0 - backward) - (-x * x / 2.0 - forward)).min(0.0);
        let la = log_acceptance(&v("mala"), h, &t, &[x], &[y]).unwrap();
        assert!((la - oracle).abs() < 1e-13);
        assert!((la + 0.002_848_954_721_449_97).abs() < 1e-12);
    }

    #[test]
    fn detailed_balance_in_log_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let targets: Vec<Box<dyn TargetModel>> = vec![
            Box::new(make_product_target(Arc::new(Gaussian::standard()), 1).unwrap()),
            Box::new(make_product_target(Arc::new(Gaussian::standard()), 3).unwrap()),
            Box::new(make_product_target(Arc::new(DoubleWell), 1).unwrap()),
            Box::new(make_product_target(Arc::new(DoubleWell), 3).unwrap()),
        ];
        for t in &targets {
            let d = t.dim();
            for name in ["rwm", "mala", "fmala", "moma", "boma"] {
                let variant = v(name);
                let h = 0.15;
                for _ in 0..100 {
                    let x: Vec<f64> = draw_noise(&mut rng, d).iter().map(|a| 1.2 * a).collect();
                    let lx = t.local(&x, DerivativeLevel::Full);
                    let mx = moments_from_local(&variant, &x, h, &lx).unwrap();
                    let y = sample(&mx, &draw_noise(&mut rng, d));
                    let ly = t.local(&y, DerivativeLevel::Full);
                    let Ok(my) = moments_from_local(&variant, &y, h, &ly) else {
                        continue;
                    };
                    let a_xy = log_acceptance(&variant, h, t.as_ref(), &x, &y).unwrap();
                    let a_yx = log_acceptance(&variant, h, t.as_ref(), &y, &x).unwrap();
                    let lhs = lx.log_density + log_q(&mx, &y) + a_xy;
                    let rhs = ly.log_density + log_q(&my, &x) + a_yx;
                    assert!(
                        (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()).max(1.0),
                        "{name} d={d}: {lhs} vs {rhs}"
                    );
                }
            }
        }
    }

    #[test]
    fn unadjusted_examples() {
        let t = make_product_target(Arc::new(Gaussian::standard()), 1).unwrap();
        let ula = ProposalVariant::unadjusted(Method::Mala).unwrap();
        let fula = ProposalVariant::unadjusted(Method::Fmala).unwrap();
        let buoa = ProposalVariant::unadjusted(Method::Boma).unwrap();
        // Zero noise through the moments directly.
        let local = t.local(&[1.0], DerivativeLevel::Full);
        let m = moments_from_local(&ula, &[1.0], 0.3, &local).unwrap();
        assert!((sample(&m, &[0.4])[0] - (0.85 + 0.3f64.sqrt() * 0.4)).abs() < 1e-15);
        let m = moments_from_local(&fula, &[1.0], 0.1, &local).unwrap();
        assert!((sample(&m, &[0.0])[0] - (1.0 - 0.05 - 0.01 / 24.0)).abs() < 1e-15);
        for i in 1..=40 {
            let h = 0.25 * i as f64;
            let m = moments_from_local(&buoa, &[1.0], h, &local).unwrap();
            assert!(m.mean[0].abs() < 1.0, "h={h}: {}", m.mean[0]);
        }
        // Unadjusted chains never reject.
        let kernel = KernelSpec::single(fula, 0.1).unwrap();
        let mut chain = Chain::new(&t, &kernel, vec![1.0], 3);
        for _ in 0..100 {
            assert!(chain.step().unwrap().accepted);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let y = unadjusted_step(&[1.0], &ula, 0.3, &t, &mut rng).unwrap();
        assert!(y[0].is_finite());
    }

    #[test]
    fn rejection_keeps_state_bitwise() {
        let mut cfg = RunConfig::new(
            TargetSpec::DoubleWell { dim: 5 },
            KernelSpec::single(v("fmala"), 1.2).unwrap(),
            3000,
        );
        cfg.start = StartRule::Vector(vec![0.5; 5]);
        cfg.burn_in = 0;
        let trace = run_chain(&cfg).unwrap();
        let mut prev = trace.initial_first_coord;
        let mut rejected = 0;
        for k in 0..trace.len() {
            assert!(trace.log_alpha[k] <= 0.0);
            if !trace.accepted[k] {
                rejected += 1;
                assert_eq!(trace.first_coord[k].to_bits(), prev.to_bits());
            }
            prev = trace.first_coord[k];
        }
        assert!(rejected > 0);
    }

    #[test]
    fn empty_run_keeps_initial_summaries() {
        let mut cfg = RunConfig::new(gaussian_spec(3), KernelSpec::single(v("rwm"), 0.5).unwrap(), 0);
        cfg.start = StartRule::Vector(vec![1.0, 2.0, 2.0]);
        let trace = run_chain(&cfg).unwrap();
        assert!(trace.is_empty());
        assert_eq!(trace.initial_first_coord, 1.0);
        assert_eq!(trace.initial_sq_norm, 9.0);
    }

    #[test]
    fn same_seed_same_trace() {
        let mut cfg = RunConfig::new(
            gaussian_spec(4),
            KernelSpec::hybrid((v("rwm"), 0.5), (v("fmala"), 0.8), 0.5).unwrap(),
            2000,
        );
        cfg.seed = 77;
        cfg.start = StartRule::StationaryWarmstart {
            n_warm: 100,
            kernel: KernelSpec::single(v("rwm"), 0.5).unwrap(),
        };
        let a = run_chain(&cfg).unwrap();
        let b = run_chain(&cfg).unwrap();
        assert_eq!(a, b);
        cfg.seed = 78;
        assert_ne!(run_chain(&cfg).unwrap().first_coord, a.first_coord);
    }

    #[test]
    fn parallel_matches_serial() {
        let base = RunConfig::new(gaussian_spec(3), KernelSpec::single(v("mala"), 0.6).unwrap(), 500);
        let cfgs: Vec<RunConfig> = (0..4)
            .map(|s| RunConfig {
                seed: s,
                ..base.clone()
            })
            .collect();
        let par = run_parallel(&cfgs);
        for (cfg, p) in cfgs.iter().zip(par) {
            assert_eq!(p.unwrap(), run_chain(cfg).unwrap());
        }
        assert!(run_parallel(&[]).is_empty());
    }

    #[test]
    fn rwm_acceptance_at_dimension_ten() {
        let d = 10;
        let mut cfg = RunConfig::new(
            gaussian_spec(d),
            KernelSpec::single(v("rwm"), 2.38f64.powi(2) / d as f64).unwrap(),
            100_000,
        );
        cfg.start = StartRule::StandardNormal;
        cfg.seed = 5;
        let trace = run_chain(&cfg).unwrap();
        let rate = trace.counted_accepted as f64 / trace.counted_steps as f64;
        assert!((0.2..=0.3).contains(&rate), "acceptance {rate}");
    }

    #[test]
    fn common_random_numbers_across_variants() {
        // Same seed and start: the first proposal noise is shared.
        let t = make_product_target(Arc::new(Gaussian::standard()), 2).unwrap();
        let ka = KernelSpec::single(v("rwm"), 0.5).unwrap();
        let kb = KernelSpec::single(v("mala"), 0.5).unwrap();
        let mut a = Chain::new(&t, &ka, vec![0.0, 0.0], 9);
        let mut b = Chain::new(&t, &kb, vec![0.0, 0.0], 9);
        let oa = a.step().unwrap();
        let ob = b.step().unwrap();
        // At the origin the MALA drift vanishes, so the proposals coincide.
        assert_eq!(oa.proposal_sq_jump, ob.proposal_sq_jump);
    }
}
