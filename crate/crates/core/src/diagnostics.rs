//! Chain statistics and the closed-form asymptotics of the `1/5`-scaling proposals.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::DiagnosticsError;
use crate::sampler::ChainTrace;
use crate::target::Potential1D;

// ---------------------------------------------------------------------------------------
// Trace statistics

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoordMode {
    /// `E[(X_{k+1,1} - X_{k,1})^2]`
    First,
    /// `E[||X_{k+1} - X_k||^2 / d]`
    FullMean,
}

/// Mean squared increment of a series.
pub fn series_efficiency(series: &[f64]) -> Result<f64, DiagnosticsError> {
    if series.len() < 2 {
        return Err(DiagnosticsError::EmptyTrace {
            needed: 2,
            have: series.len(),
        });
    }
    let sum: f64 = series.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok(sum / (series.len() - 1) as f64)
}

/// First-order efficiency over the post-burn-in steps of `trace`.
pub fn first_order_efficiency(trace: &ChainTrace, mode: CoordMode) -> Result<f64, DiagnosticsError> {
    match mode {
        CoordMode::First => {
            let mut prev = trace.initial_first_coord;
            let mut sum = 0.0;
            let mut n = 0usize;
            for (j, &v) in trace.first_coord.iter().enumerate() {
                let step = (j + 1) * trace.stride - 1;
                if step >= trace.burn_in {
                    sum += (v - prev).powi(2);
                    n += 1;
                }
                prev = v;
            }
            if n == 0 {
                return Err(DiagnosticsError::EmptyTrace { needed: 1, have: 0 });
            }
            Ok(sum / n as f64)
        }
        CoordMode::FullMean => {
            if trace.counted_steps == 0 {
                return Err(DiagnosticsError::EmptyTrace { needed: 1, have: 0 });
            }
            Ok(trace.counted_sq_move / trace.counted_steps as f64 / trace.dim as f64)
        }
    }
}

pub fn acceptance_rate(trace: &ChainTrace) -> Result<f64, DiagnosticsError> {
    if trace.counted_steps == 0 {
        return Err(DiagnosticsError::EmptyTrace { needed: 1, have: 0 });
    }
    Ok(trace.counted_accepted as f64 / trace.counted_steps as f64)
}

/// Autocorrelations at lags `0..=max_lag`, biased estimator (divides by `n`).
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>, DiagnosticsError> {
    let n = series.len();
    if n <= max_lag {
        return Err(DiagnosticsError::EmptyTrace {
            needed: max_lag + 1,
            have: n,
        });
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum();
    if !(c0 > 0.0) {
        return Err(DiagnosticsError::InvalidArgument(
            "series has zero variance".into(),
        ));
    }
    Ok((0..=max_lag)
        .map(|k| {
            let ck: f64 = centered[..n - k]
                .iter()
                .zip(&centered[k..])
                .map(|(a, b)| a * b)
                .sum();
            ck / c0
        })
        .collect())
}

/// Bartlett standard error of `acf[lag]` for a series of length `n`; zero at lag 0.
pub fn acf_standard_error(acf: &[f64], lag: usize, n: usize) -> f64 {
    if lag == 0 {
        return 0.0;
    }
    let s: f64 = acf[1..lag.min(acf.len()).max(1)].iter().map(|r| r * r).sum();
    ((1.0 + 2.0 * s) / n as f64).sqrt()
}

/// One point of an efficiency sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyPoint {
    pub ell: f64,
    pub h: f64,
    pub d: usize,
    pub acceptance: f64,
    pub efficiency: f64,
    /// `d^{1/5} * efficiency`
    pub scaled_efficiency: f64,
}

impl EfficiencyPoint {
    /// `h` is rebuilt as `ell^2 d^{-exponent}`.
    pub fn from_trace(
        trace: &ChainTrace,
        ell: f64,
        exponent: f64,
        mode: CoordMode,
    ) -> Result<Self, DiagnosticsError> {
        let d = trace.dim;
        let efficiency = first_order_efficiency(trace, mode)?;
        Ok(Self {
            ell,
            h: step_size(ell, d, exponent),
            d,
            acceptance: acceptance_rate(trace)?,
            efficiency,
            scaled_efficiency: (d as f64).powf(0.2) * efficiency,
        })
    }
}

/// `ell^2 d^{-exponent}`
pub fn step_size(ell: f64, d: usize, exponent: f64) -> f64 {
    ell * ell * (d as f64).powf(-exponent)
}

// ---------------------------------------------------------------------------------------
// Normal distribution and limit curves

/// Standard normal CDF.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `a(l) = 2 Phi(-k l^5 / 2)`
pub fn limit_acceptance(ell: f64, k: f64) -> f64 {
    2.0 * normal_cdf(-k * ell.powi(5) / 2.0)
}

/// `h(l) = 2 l^2 Phi(-k l^5 / 2)`
pub fn limit_speed(ell: f64, k: f64) -> f64 {
    ell * ell * limit_acceptance(ell, k)
}

/// Root of `2 Phi(-u) = 5 u phi(u)`, the value of `k l^5 / 2` maximizing the speed.
pub fn optimal_u() -> f64 {
    let f = |u: f64| 2.0 * normal_cdf(-u) - 5.0 * u * normal_pdf(u);
    let (mut lo, mut hi) = (0.0, 2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximizer of `limit_speed(., k)` by golden-section search, with the acceptance there.
pub fn optimal_ell(k: f64) -> Result<(f64, f64), DiagnosticsError> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(DiagnosticsError::DegenerateK(k));
    }
    let speed = |l: f64| limit_speed(l, k);
    // Expand until the speed decreases on both sides of the middle point.
    let (mut a, mut b, mut c) = (0.0, 1.0, 2.0);
    while speed(c) >= speed(b) {
        a = b;
        b = c;
        c *= 2.0;
    }
    while b > 1e-300 && speed(b / 2.0) >= speed(b) {
        c = b;
        b /= 2.0;
        a = b / 2.0;
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, c);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (speed(x1), speed(x2));
    while hi - lo > 1e-13 * hi.abs().max(1e-300) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = speed(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = speed(x1);
        }
    }
    let ell = 0.5 * (lo + hi);
    Ok((ell, limit_acceptance(ell, k)))
}

// ---------------------------------------------------------------------------------------
// C5 polynomials and K constants

/// Variants with a `1/5` scaling limit. `a2` and `a5` do not enter the constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AsymptoticVariant {
    Fm,
    Mo,
    Bo,
    Gbo { a1: f64, a3: f64, a4: f64 },
}

impl AsymptoticVariant {
    pub fn label(&self) -> String {
        match self {
            Self::Fm => "fM".into(),
            Self::Mo => "mO".into(),
            Self::Bo => "bO".into(),
            Self::Gbo { a1, a3, a4 } => format!("gbO(a1={a1},a3={a3},a4={a4})"),
        }
    }
}

/// `C5(x, xi)` for potential derivatives `g = [g', g'', g''', g'''', g''''']` at `x`.
pub fn c5_from_derivs(variant: AsymptoticVariant, g: [f64; 5], xi: f64, ell: f64) -> f64 {
    let [g1, g2, g3, g4, g5] = g;
    let x3 = xi * xi * xi;
    let x5 = x3 * xi * xi;
    let poly = match variant {
        AsymptoticVariant::Fm => {
            (x5 * g5
                + 5.0 * x3 * g5
                + 15.0 * x3 * g4 * g1
                + 15.0 * xi * g4 * g1
                + 30.0 * x3 * g3 * g2
                + 10.0 * xi * g3 * g2
                + 30.0 * xi * g3 * g1 * g1
                + 35.0 * xi * g1 * g2 * g2)
                / 720.0
        }
        AsymptoticVariant::Mo => {
            x5 * g5 / 720.0
                + x3 * g5 / 144.0
                + x3 * g4 * g1 / 48.0
                + xi * g4 * g1 / 48.0
                + 29.0 / 144.0 * x3 * g3 * g2
                - 7.0 / 48.0 * xi * g3 * g2
                + xi * g3 * g1 * g1 / 24.0
                + xi * g1 * g2 * g2 / 6.0
        }
        AsymptoticVariant::Bo => {
            x5 * g5 / 720.0
                + x3 * g5 / 144.0
                + x3 * g4 * g1 / 48.0
                + xi * g4 * g1 / 48.0
                + 29.0 / 144.0 * x3 * g3 * g2
                - 19.0 / 144.0 * xi * g3 * g2
                + xi * g3 * g1 * g1 / 24.0
                + xi * g1 * g2 * g2 / 6.0
        }
        AsymptoticVariant::Gbo { a1, a3, a4 } => {
            let a4s = a4 * a4;
            x5 * g5 / 720.0
                + x3 * g5 / 144.0
                + x3 * g4 * g1 / 48.0
                + xi * g4 * g1 / 48.0
                + a3 / 72.0 * xi * g3 * g2
                + a4s / 6.0 * x3 * g3 * g2
                - a4s / 6.0 * xi * g3 * g2
                + 5.0 / 144.0 * x3 * g3 * g2
                + xi * g3 * g2 / 48.0
                + xi * g3 * g1 * g1 / 24.0
                - a1 * a1 / 24.0 * xi * g1 * g2 * g2
                + a4s / 6.0 * xi * g1 * g2 * g2
                + xi * g1 * g2 * g2 / 24.0
        }
    };
    ell.powi(5) * poly
}

pub fn c5_eval(variant: AsymptoticVariant, g: &dyn Potential1D, x: f64, xi: f64, ell: f64) -> f64 {
    c5_from_derivs(variant, g.derivs_1_to_5(x), xi, ell)
}

/// Integrand whose expectation under `pi_1` is `K^2`.
pub fn k_integrand(variant: AsymptoticVariant, g: [f64; 5]) -> f64 {
    let [g1, g2, g3, g4, g5] = g;
    match variant {
        AsymptoticVariant::Fm => {
            79.0 * g5 * g5 / 17280.0
                + 11.0 * g4 * g4 * g1 * g1 / 1152.0
                + 77.0 * g3 * g3 * g2 * g2 / 2592.0
                + g3 * g3 * g1.powi(4) / 576.0
                + 49.0 * g1 * g1 * g2.powi(4) / 20736.0
                + 7.0 / 576.0 * g4 * g5 * g1
                + 19.0 / 864.0 * g3 * g5 * g2
                + g3 * g5 * g1 * g1 / 288.0
                + 7.0 * g5 * g1 * g2 * g2 / 1728.0
                + g3 * g4 * g1.powi(3) / 144.0
                + 7.0 / 864.0 * g4 * g1 * g1 * g2 * g2
                + 7.0 * g3 * g1.powi(3) * g2 * g2 / 1728.0
                + 5.0 / 432.0 * g3 * g3 * g1 * g1 * g2
                + 35.0 * g3 * g1 * g2.powi(3) / 2592.0
                + 29.0 / 864.0 * g3 * g4 * g1 * g2
        }
        AsymptoticVariant::Mo => {
            79.0 * g5 * g5 / 17280.0
                + 11.0 * g4 * g4 * g1 * g1 / 1152.0
                + 1567.0 * g3 * g3 * g2 * g2 / 3456.0
                + g3 * g3 * g1.powi(4) / 576.0
                + g1 * g1 * g2.powi(4) / 36.0
                + 7.0 / 576.0 * g4 * g5 * g1
                + 17.0 / 192.0 * g3 * g5 * g2
                + g3 * g5 * g1 * g1 / 288.0
                + g5 * g1 * g2 * g2 / 72.0
                + g3 * g4 * g1.powi(3) / 144.0
                + g4 * g1 * g1 * g2 * g2 / 36.0
                + g3 * g1.powi(3) * g2 * g2 / 72.0
                + 11.0 / 288.0 * g3 * g3 * g1 * g1 * g2
                + 11.0 / 72.0 * g3 * g1 * g2.powi(3)
                + 73.0 / 576.0 * g3 * g4 * g1 * g2
        }
        AsymptoticVariant::Bo => k_integrand(
            AsymptoticVariant::Gbo {
                a1: 1.0,
                a3: 1.0,
                a4: 1.0,
            },
            g,
        ),
        AsymptoticVariant::Gbo { a1, a3, a4 } => {
            let a1s = a1 * a1;
            let a4s = a4 * a4;
            let a4q = a4s * a4s;
            g1 * g1 * g2.powi(4) * a4q / 36.0
                + 5.0 / 18.0 * g2 * g2 * g3 * g3 * a4q
                + g1 * g2.powi(3) * g3 * a4q / 9.0
                - a1s * g1 * g1 * g2.powi(4) * a4s / 72.0
                + g1 * g1 * g2.powi(4) * a4s / 72.0
                + 11.0 / 72.0 * g2 * g2 * g3 * g3 * a4s
                + a3 * g2 * g2 * g3 * g3 * a4s / 108.0
                + g1 * g1 * g2 * g3 * g3 * a4s / 36.0
                - a1s * g1 * g2.powi(3) * g3 * a4s / 36.0
                + 5.0 / 72.0 * g1 * g2.powi(3) * g3 * a4s
                + a3 * g1 * g2.powi(3) * g3 * a4s / 216.0
                + g1.powi(3) * g2 * g2 * g3 * a4s / 72.0
                + g1 * g1 * g2 * g2 * g4 * a4s / 36.0
                + 7.0 / 72.0 * g1 * g2 * g3 * g4 * a4s
                + g1 * g2 * g2 * g5 * a4s / 72.0
                + 5.0 / 72.0 * g2 * g3 * g5 * a4s
                + a1s * a1s * g1 * g1 * g2.powi(4) / 576.0
                - a1s * g1 * g1 * g2.powi(4) / 288.0
                + g1 * g1 * g2.powi(4) / 576.0
                + g1.powi(4) * g3 * g3 / 576.0
                + a3 * a3 * g2 * g2 * g3 * g3 / 5184.0
                + a3 * g2 * g2 * g3 * g3 / 288.0
                + 79.0 * g2 * g2 * g3 * g3 / 3456.0
                + g1 * g1 * g2 * g3 * g3 / 96.0
                + a3 * g1 * g1 * g2 * g3 * g3 / 864.0
                + 11.0 * g1 * g1 * g4 * g4 / 1152.0
                + 79.0 * g5 * g5 / 17280.0
                - a1s * g1 * g2.powi(3) * g3 / 96.0
                + g1 * g2.powi(3) * g3 / 96.0
                - a1s * a3 * g1 * g2.powi(3) * g3 / 864.0
                + a3 * g1 * g2.powi(3) * g3 / 864.0
                - a1s * g1.powi(3) * g2 * g2 * g3 / 288.0
                + g1.powi(3) * g2 * g2 * g3 / 288.0
                - a1s * g1 * g1 * g2 * g2 * g4 / 144.0
                + g1 * g1 * g2 * g2 * g4 / 144.0
                + g1.powi(3) * g3 * g4 / 144.0
                + 17.0 / 576.0 * g1 * g2 * g3 * g4
                + a3 * g1 * g2 * g3 * g4 / 432.0
                - a1s * g1 * g2 * g2 * g5 / 288.0
                + g1 * g2 * g2 * g5 / 288.0
                + g1 * g1 * g3 * g5 / 288.0
                + 11.0 / 576.0 * g2 * g3 * g5
                + a3 * g2 * g3 * g5 / 864.0
                + 7.0 / 576.0 * g1 * g4 * g5
        }
    }
}

/// Monte-Carlo estimate of `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticConstants {
    pub variant: AsymptoticVariant,
    /// `K = sqrt(E[integrand])`
    pub k_value: f64,
    /// Standard error of `k_value` (delta method).
    pub mc_std_error: f64,
    pub k_squared: f64,
    pub k_squared_std_error: f64,
    pub n_samples: usize,
    /// Samples came from an exact sampler rather than an auxiliary chain.
    pub exact_sampling: bool,
}

/// How to draw `X ~ pi_1` for the Monte-Carlo expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pi1Sampling {
    pub burn_in: usize,
    pub thin: usize,
}

impl Default for Pi1Sampling {
    fn default() -> Self {
        Self {
            burn_in: 10_000,
            thin: 20,
        }
    }
}

/// Draws `n` points from `pi_1 ∝ exp(g)`: exactly for Gaussian potentials, otherwise by a
/// thinned one-dimensional random-walk chain tuned from the quadrature variance.
pub fn sample_pi1<R: Rng + ?Sized>(
    g: &dyn Potential1D,
    n: usize,
    sampling: Pi1Sampling,
    rng: &mut R,
) -> Result<(Vec<f64>, bool), DiagnosticsError> {
    if let Some(p) = g.gaussian_precision() {
        let sd = 1.0 / p.sqrt();
        return Ok(((0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect(), true));
    }
    let (mean, var) = stationary_moments(g)?;
    let step = 2.4 * var.sqrt();
    let mut x = mean;
    let mut lp = g.eval_deriv(0, x);
    let mut out = Vec::with_capacity(n);
    let total = sampling.burn_in + n * sampling.thin.max(1);
    for k in 0..total {
        let y = x + step * rng.sample::<f64, _>(StandardNormal);
        let ly = g.eval_deriv(0, y);
        let u: f64 = rng.random();
        if u.ln() < ly - lp {
            x = y;
            lp = ly;
        }
        if k >= sampling.burn_in && (k - sampling.burn_in + 1).is_multiple_of(sampling.thin.max(1)) {
            out.push(x);
        }
    }
    Ok((out, false))
}

/// Mean and standard error of possibly autocorrelated values, by batch means.
pub fn batch_mean(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let batches = ((n as f64).sqrt() as usize).clamp(1, n);
    let size = n / batches;
    if batches < 2 || size == 0 {
        return (mean, f64::NAN);
    }
    let bm: Vec<f64> = (0..batches)
        .map(|b| values[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = bm.iter().sum::<f64>() / batches as f64;
    let var = bm.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

/// Monte-Carlo `K` for `variant` on the potential `g`.
pub fn k_constant<R: Rng + ?Sized>(
    variant: AsymptoticVariant,
    g: &dyn Potential1D,
    n_samples: usize,
    rng: &mut R,
) -> Result<AsymptoticConstants, DiagnosticsError> {
    k_constant_with(variant, g, n_samples, Pi1Sampling::default(), rng)
}

pub fn k_constant_with<R: Rng + ?Sized>(
    variant: AsymptoticVariant,
    g: &dyn Potential1D,
    n_samples: usize,
    sampling: Pi1Sampling,
    rng: &mut R,
) -> Result<AsymptoticConstants, DiagnosticsError> {
    if n_samples < 2 {
        return Err(DiagnosticsError::EmptyTrace {
            needed: 2,
            have: n_samples,
        });
    }
    let (xs, exact) = sample_pi1(g, n_samples, sampling, rng)?;
    let values: Vec<f64> = xs.iter().map(|&x| k_integrand(variant, g.derivs_1_to_5(x))).collect();
    let (mean, se) = batch_mean(&values);
    if mean < -3.0 * se {
        return Err(DiagnosticsError::NegativeEstimate {
            mean,
            std_error: se,
        });
    }
    let k = mean.max(0.0).sqrt();
    Ok(AsymptoticConstants {
        variant,
        k_value: k,
        mc_std_error: if k > 0.0 { se / (2.0 * k) } else { se.sqrt() },
        k_squared: mean,
        k_squared_std_error: se,
        n_samples,
        exact_sampling: exact,
    })
}

/// Monte-Carlo `E[C5(X, xi)^2]` with `X ~ pi_1`, `xi ~ N(0, 1)`; mean and standard error.
pub fn c5_second_moment<R: Rng + ?Sized>(
    variant: AsymptoticVariant,
    g: &dyn Potential1D,
    ell: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<(f64, f64), DiagnosticsError> {
    let (xs, _) = sample_pi1(g, n_samples, Pi1Sampling::default(), rng)?;
    let values: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let xi: f64 = rng.sample(StandardNormal);
            c5_eval(variant, g, x, xi, ell).powi(2)
        })
        .collect();
    Ok(batch_mean(&values))
}

/// `E[f(X)]` under `pi_1 ∝ exp(g)` by composite Simpson quadrature on the effective support.
pub fn stationary_expectation(
    g: &dyn Potential1D,
    f: impl Fn(f64) -> f64,
) -> Result<f64, DiagnosticsError> {
    let (lo, hi, gmax) = effective_support(g)?;
    let n = 40_000;
    let step = (hi - lo) / n as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..=n {
        let x = lo + i as f64 * step;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let p = w * (g.eval_deriv(0, x) - gmax).exp();
        num += p * f(x);
        den += p;
    }
    Ok(num / den)
}

/// Mean and variance of `pi_1`.
pub fn stationary_moments(g: &dyn Potential1D) -> Result<(f64, f64), DiagnosticsError> {
    let mean = stationary_expectation(g, |x| x)?;
    let var = stationary_expectation(g, |x| (x - mean).powi(2))?;
    Ok((mean, var))
}

/// Interval outside which `g` is more than 60 below its maximum.
fn effective_support(g: &dyn Potential1D) -> Result<(f64, f64, f64), DiagnosticsError> {
    let mut half = 1.0;
    loop {
        let n = 4000;
        let gmax = (0..=n)
            .map(|i| g.eval_deriv(0, -half + 2.0 * half * i as f64 / n as f64))
            .fold(f64::NEG_INFINITY, f64::max);
        let edge = g.eval_deriv(0, -half).max(g.eval_deriv(0, half));
        if edge < gmax - 60.0 {
            return Ok((-half, half, gmax));
        }
        half *= 2.0;
        if half > 1e8 {
            return Err(DiagnosticsError::InvalidArgument(format!(
                "potential {} does not define a proper density",
                g.label()
            )));
        }
    }
}
