//! Gaussian proposals `y = mu(x, h) + S(x, h) xi` and their transition densities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ProposalError;
use crate::matfun::{assumption1_check, t1_scalar, t2_scalar, t3_scalar, JacobianRep, ScaleFactor, Spectrum};
use crate::target::{DerivativeLevel, LocalDerivatives, TargetModel};

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Parameters `a1..a5` of the generalised boosted Ozaki proposal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbomaParams {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
}

impl GbomaParams {
    pub const BOOSTED: GbomaParams = GbomaParams {
        a1: 1.0,
        a2: 1.0,
        a3: 1.0,
        a4: 1.0,
        a5: 1.0,
    };

    pub fn validate(&self) -> Result<(), ProposalError> {
        let all = [self.a1, self.a2, self.a3, self.a4, self.a5];
        if all.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(ProposalError::InvalidParameter(format!(
                "gbOMA parameters must be positive and finite, got {all:?}"
            )));
        }
        let report = assumption1_check(self.a4, self.a5, 50.0, 0.01)?;
        if !report.positive {
            return Err(ProposalError::InvalidParameter(format!(
                "a4={}, a5={} violate positivity of the variance map (minimum {} at t={}, left tail {})",
                self.a4, self.a5, report.min_value, report.argmin, report.left_tail_coefficient
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Rwm,
    Mala,
    Fmala,
    Moma,
    Boma,
    Gboma(GbomaParams),
}

impl Method {
    /// Exponent `gamma0` in the optimal step-size scaling `h = l^2 d^{-gamma0}`.
    pub fn scaling_exponent(&self) -> f64 {
        match self {
            Method::Rwm => 1.0,
            Method::Mala => 1.0 / 3.0,
            _ => 0.2,
        }
    }

    pub fn derivative_level(&self) -> DerivativeLevel {
        match self {
            Method::Rwm => DerivativeLevel::Value,
            Method::Mala => DerivativeLevel::Drift,
            _ => DerivativeLevel::Full,
        }
    }
}

/// A proposal together with whether it is Metropolis-adjusted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalVariant {
    method: Method,
    adjusted: bool,
}

impl ProposalVariant {
    pub fn new(method: Method, adjusted: bool) -> Result<Self, ProposalError> {
        if let Method::Gboma(p) = &method {
            p.validate()?;
        }
        Ok(Self { method, adjusted })
    }

    pub fn adjusted(method: Method) -> Result<Self, ProposalError> {
        Self::new(method, true)
    }

    pub fn unadjusted(method: Method) -> Result<Self, ProposalError> {
        Self::new(method, false)
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn is_adjusted(&self) -> bool {
        self.adjusted
    }

    pub fn label(&self) -> &'static str {
        match (self.method, self.adjusted) {
            (Method::Rwm, true) => "RWM",
            (Method::Rwm, false) => "RW",
            (Method::Mala, true) => "MALA",
            (Method::Mala, false) => "ULA",
            (Method::Fmala, true) => "fMALA",
            (Method::Fmala, false) => "fULA",
            (Method::Moma, true) => "mOMA",
            (Method::Moma, false) => "mUOA",
            (Method::Boma, true) => "bOMA",
            (Method::Boma, false) => "bUOA",
            (Method::Gboma(_), true) => "gbOMA",
            (Method::Gboma(_), false) => "gbUOA",
        }
    }
}

impl fmt::Display for ProposalVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.method {
            Method::Gboma(p) => write!(
                f,
                "{}(a1={}, a2={}, a3={}, a4={}, a5={})",
                self.label(),
                p.a1,
                p.a2,
                p.a3,
                p.a4,
                p.a5
            ),
            _ => f.write_str(self.label()),
        }
    }
}

/// Parses the parameter-free variant names, case-insensitively: `rwm`, `mala`, `fmala`,
/// `moma`, `boma` and the unadjusted `rw`, `ula`, `fula`, `muoa`, `buoa`.
impl FromStr for ProposalVariant {
    type Err = ProposalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (method, adjusted) = match s.to_ascii_lowercase().as_str() {
            "rwm" => (Method::Rwm, true),
            "rw" => (Method::Rwm, false),
            "mala" => (Method::Mala, true),
            "ula" => (Method::Mala, false),
            "fmala" => (Method::Fmala, true),
            "fula" => (Method::Fmala, false),
            "moma" => (Method::Moma, true),
            "muoa" => (Method::Moma, false),
            "boma" => (Method::Boma, true),
            "buoa" => (Method::Boma, false),
            other => {
                return Err(ProposalError::InvalidParameter(format!(
                    "unknown proposal variant `{other}`"
                )))
            }
        };
        Self::new(method, adjusted)
    }
}

/// Mean and scale factor of the Gaussian proposal at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalMoments {
    pub mean: Vec<f64>,
    pub scale: ScaleFactor,
    /// `log |det S|`
    pub log_det_scale: f64,
}

impl ProposalMoments {
    pub fn new(mean: Vec<f64>, scale: ScaleFactor) -> Result<Self, ProposalError> {
        if scale.dim() != mean.len() {
            return Err(ProposalError::DimensionMismatch {
                expected: mean.len(),
                got: scale.dim(),
            });
        }
        let log_det_scale = scale.log_abs_det();
        if !log_det_scale.is_finite() || mean.iter().any(|m| !m.is_finite()) {
            return Err(ProposalError::ScaleNotPositive(format!(
                "non-finite moments (log|det S| = {log_det_scale})"
            )));
        }
        Ok(Self {
            mean,
            scale,
            log_det_scale,
        })
    }
}

fn check_h(h: f64) -> Result<(), ProposalError> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(ProposalError::InvalidParameter(format!(
            "step size must be positive, got {h}"
        )))
    }
}

/// Moments of `variant` at `x` for step size `h`.
pub fn moments(
    variant: &ProposalVariant,
    x: &[f64],
    h: f64,
    target: &dyn TargetModel,
) -> Result<ProposalMoments, ProposalError> {
    if x.len() != target.dim() {
        return Err(ProposalError::DimensionMismatch {
            expected: target.dim(),
            got: x.len(),
        });
    }
    let local = target.local(x, variant.method.derivative_level());
    moments_from_local(variant, x, h, &local)
}

fn required<'a, T>(v: &'a Option<T>, what: &str) -> Result<&'a T, ProposalError> {
    v.as_ref().ok_or_else(|| {
        ProposalError::InvalidParameter(format!("local derivatives lack the {what}"))
    })
}

/// Moments from derivatives already evaluated at `x`.
pub fn moments_from_local(
    variant: &ProposalVariant,
    x: &[f64],
    h: f64,
    local: &LocalDerivatives,
) -> Result<ProposalMoments, ProposalError> {
    check_h(h)?;
    let d = x.len();
    let sqrt_h = h.sqrt();
    match variant.method {
        Method::Rwm => ProposalMoments::new(x.to_vec(), ScaleFactor::scalar(sqrt_h, d)?),
        Method::Mala => {
            let f = required(&local.drift, "drift")?;
            let mean = x.iter().zip(f).map(|(xi, fi)| xi + 0.5 * h * fi).collect();
            ProposalMoments::new(mean, ScaleFactor::scalar(sqrt_h, d)?)
        }
        Method::Fmala => {
            let f = required(&local.drift, "drift")?;
            let jac = required(&local.jacobian, "Jacobian")?;
            let c = required(&local.contraction, "Hessian contraction")?;
            let jf = jac.matvec(f);
            let k = h * h / 24.0;
            let mean = (0..d)
                .map(|i| x[i] + 0.5 * h * f[i] - k * (jf[i] + c[i]))
                .collect();
            ProposalMoments::new(mean, fmala_scale(jac, h)?)
        }
        Method::Moma | Method::Boma | Method::Gboma(_) => {
            let f = required(&local.drift, "drift")?;
            let jac = required(&local.jacobian, "Jacobian")?;
            let c = required(&local.contraction, "Hessian contraction")?;
            ozaki_moments(variant.method, x, h, f, jac, c)
        }
    }
}

/// `sqrt(h) I + (h^{3/2} / 12) Df`, keeping the Jacobian's structure.
fn fmala_scale(jac: &JacobianRep, h: f64) -> Result<ScaleFactor, ProposalError> {
    let s = h.sqrt();
    let k = h * s / 12.0;
    match jac {
        JacobianRep::Scalar { value, dim } => ScaleFactor::scalar(s + k * value, *dim),
        JacobianRep::Diagonal(v) => ScaleFactor::diagonal(v.iter().map(|l| s + k * l).collect()),
        JacobianRep::SymTridiagonal { diag, off } => ScaleFactor::tridiagonal(
            diag.iter().map(|l| s + k * l).collect(),
            off.iter().map(|o| k * o).collect(),
        ),
        JacobianRep::DenseSymmetric(_) => {
            let sp = jac.eigen();
            ScaleFactor::spectral(
                sp.values.iter().map(|l| s + k * l).collect(),
                sp.vectors.expect("dense spectrum carries eigenvectors"),
            )
        }
    }
}

/// Drift and variance spectral maps of the Ozaki-type proposals.
struct OzakiMaps {
    method: Method,
    h: f64,
}

impl OzakiMaps {
    /// Multiplier of `f` in the mean.
    fn drift(&self, t: f64) -> f64 {
        let h = self.h;
        match self.method {
            Method::Moma => t1_scalar(t, h, 1.0) - h * h / 6.0 * t,
            Method::Boma => t1_scalar(t, h, 1.0) + 2.0 / 3.0 * t2_scalar(t, h, 1.0),
            Method::Gboma(p) => t1_scalar(t, h, p.a1) + (0.5 * p.a1 + 1.0 / 6.0) * t2_scalar(t, h, p.a2),
            _ => unreachable!(),
        }
    }

    /// Multiplier of the Hessian contraction in the mean.
    fn contraction(&self, t: f64) -> f64 {
        let h = self.h;
        match self.method {
            Method::Moma => -h * h / 24.0,
            Method::Boma => -t3_scalar(t, h, 1.0) / 3.0,
            Method::Gboma(p) => -t3_scalar(t, h, p.a3) / 3.0,
            _ => unreachable!(),
        }
    }

    /// Eigenvalue of `S^2`.
    fn variance(&self, t: f64) -> f64 {
        let h2 = 2.0 * self.h;
        match self.method {
            Method::Moma => t1_scalar(t, h2, 1.0) - self.h * self.h / 3.0 * t,
            Method::Boma => t1_scalar(t, h2, 1.0) + t2_scalar(t, h2, 1.0) / 3.0,
            Method::Gboma(p) => t1_scalar(t, h2, p.a4) + (0.5 * p.a4 - 1.0 / 6.0) * t2_scalar(t, h2, p.a5),
            _ => unreachable!(),
        }
    }
}

fn ozaki_moments(
    method: Method,
    x: &[f64],
    h: f64,
    f: &[f64],
    jac: &JacobianRep,
    c: &[f64],
) -> Result<ProposalMoments, ProposalError> {
    let maps = OzakiMaps { method, h };
    let spectrum: Spectrum = jac.eigen();
    let df = spectrum.apply(|t| maps.drift(t), f);
    let dc = match method {
        Method::Moma => c.iter().map(|ci| -h * h / 24.0 * ci).collect(),
        _ => spectrum.apply(|t| maps.contraction(t), c),
    };
    let mean = (0..x.len()).map(|i| x[i] + df[i] + dc[i]).collect();

    let mut roots = Vec::with_capacity(spectrum.dim());
    for &t in &spectrum.values {
        let v = maps.variance(t);
        if !(v > 0.0) {
            return Err(ProposalError::ScaleNotPositive(format!(
                "variance map of Df eigenvalue {t} is {v}"
            )));
        }
        roots.push(v.sqrt());
    }
    let scale = match (jac, spectrum.vectors) {
        (JacobianRep::Scalar { dim, .. }, _) => ScaleFactor::scalar(roots[0], *dim)?,
        (_, None) => ScaleFactor::diagonal(roots)?,
        (_, Some(vectors)) => ScaleFactor::spectral(roots, vectors)?,
    };
    ProposalMoments::new(mean, scale)
}

/// `y = mu + S xi`.
pub fn sample(m: &ProposalMoments, xi: &[f64]) -> Vec<f64> {
    assert_eq!(xi.len(), m.mean.len(), "noise dimension mismatch");
    let s = m.scale.apply(xi);
    m.mean.iter().zip(s).map(|(a, b)| a + b).collect()
}

/// Log density of `N(mu, S S^T)` at `y`.
pub fn log_q(m: &ProposalMoments, y: &[f64]) -> f64 {
    assert_eq!(y.len(), m.mean.len(), "point dimension mismatch");
    let r: Vec<f64> = y.iter().zip(&m.mean).map(|(a, b)| a - b).collect();
    let z = m.scale.solve(&r);
    let q: f64 = z.iter().map(|v| v * v).sum();
    -0.5 * m.mean.len() as f64 * LN_2PI - m.log_det_scale - 0.5 * q
}

/// Which spectrum [`well_posedness_probe`] reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeQuantity {
    /// Smallest eigenvalue of `S` (RWM, MALA, fMALA).
    ScaleEigenvalue,
    /// Smallest eigenvalue of the variance map `S^2` before the square root (Ozaki types).
    VarianceEigenvalue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub quantity: ProbeQuantity,
    pub min_value: f64,
    /// Index into the grid of the minimizing point.
    pub argmin: usize,
}

impl ProbeReport {
    pub fn well_posed(&self) -> bool {
        self.min_value > 0.0
    }
}

/// Smallest scale spectrum of `variant` over a grid of points.
pub fn well_posedness_probe(
    variant: &ProposalVariant,
    target: &dyn TargetModel,
    x_grid: &[Vec<f64>],
    h: f64,
) -> Result<ProbeReport, ProposalError> {
    check_h(h)?;
    let quantity = match variant.method {
        Method::Rwm | Method::Mala | Method::Fmala => ProbeQuantity::ScaleEigenvalue,
        _ => ProbeQuantity::VarianceEigenvalue,
    };
    let mut report = ProbeReport {
        quantity,
        min_value: f64::INFINITY,
        argmin: 0,
    };
    let s = h.sqrt();
    for (idx, x) in x_grid.iter().enumerate() {
        let value = match variant.method {
            Method::Rwm | Method::Mala => s,
            Method::Fmala => {
                let jac = target.jacobian(x);
                s + h * s / 12.0 * min_jacobian_eigenvalue(&jac)
            }
            method => {
                let maps = OzakiMaps { method, h };
                target
                    .jacobian(x)
                    .eigen()
                    .values
                    .iter()
                    .map(|&t| maps.variance(t))
                    .fold(f64::INFINITY, f64::min)
            }
        };
        if value < report.min_value || value.is_nan() {
            report.min_value = value;
            report.argmin = idx;
        }
    }
    Ok(report)
}

fn min_jacobian_eigenvalue(jac: &JacobianRep) -> f64 {
    match jac {
        JacobianRep::Scalar { value, .. } => *value,
        JacobianRep::Diagonal(v) => v.iter().copied().fold(f64::INFINITY, f64::min),
        JacobianRep::SymTridiagonal { diag, off } => crate::matfun::tridiag::min_eigenvalue(diag, off),
        JacobianRep::DenseSymmetric(_) => jac.eigen().values.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::target::{make_product_target, DoubleWell, Flat, Gaussian, Link};

    fn gaussian(d: usize, precision: f64) -> impl TargetModel {
        make_product_target(Arc::new(Gaussian { precision }), d).unwrap()
    }

    fn v(s: &str) -> ProposalVariant {
        s.parse().unwrap()
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn fmala_gaussian_example() {
        let t = gaussian(1, 1.0);
        let m = moments(&v("fmala"), &[1.0], 0.1, &t).unwrap();
        let mu = 1.0 - 0.05 - 0.01 / 24.0;
        assert!((m.mean[0] - mu).abs() < 1e-15);
        assert!((m.mean[0] - 0.949_583_3).abs() < 5e-8);
        let s = 0.1f64.sqrt() - 0.1f64.powf(1.5) / 12.0;
        assert!((m.scale.min_eigenvalue() - s).abs() < 1e-15);
        assert!((s - 0.313_592_534_633_364_3).abs() < 1e-15);
        let y = sample(&m, &[1.0]);
        assert!((y[0] - (mu + s)).abs() < 1e-15);
    }

    #[test]
    fn moma_gaussian_example() {
        let t = gaussian(1, 1.0);
        let m = moments(&v("moma"), &[1.0], 0.1, &t).unwrap();
        let mu = (-0.05f64).exp() - 0.01 / 6.0;
        assert!((m.mean[0] - mu).abs() < 1e-14);
        assert!((m.mean[0] - 0.949_562_757_834_047_3).abs() < 1e-15);
        let s = (1.0 - (-0.1f64).exp() + 0.01 / 3.0).sqrt();
        assert!((m.scale.min_eigenvalue() - s).abs() < 1e-14);
        assert!((s - 0.313_840_588_989_655_4).abs() < 1e-15);
    }

    #[test]
    fn sample_examples() {
        let m = ProposalMoments::new(vec![1.0, 2.0], ScaleFactor::scalar(1.0, 2).unwrap()).unwrap();
        assert_eq!(sample(&m, &[0.0, 0.0]), vec![1.0, 2.0]);
        let m = ProposalMoments::new(vec![0.0, 0.0], ScaleFactor::scalar(2.0, 2).unwrap()).unwrap();
        assert_eq!(sample(&m, &[1.0, -1.0]), vec![2.0, -2.0]);
    }

    #[test]
    fn log_q_examples() {
        let m = ProposalMoments::new(vec![0.0], ScaleFactor::scalar(1.0, 1).unwrap()).unwrap();
        assert!((log_q(&m, &[0.0]) + 0.918_938_533_204_672_7).abs() < 1e-14);
        let m = ProposalMoments::new(vec![0.0], ScaleFactor::scalar(2.0, 1).unwrap()).unwrap();
        assert!((log_q(&m, &[2.0]) - (-0.918_938_533_204_672_7 - 2f64.ln() - 0.5)).abs() < 1e-14);
        assert!((log_q(&m, &[2.0]) + 2.112_085_7).abs() < 5e-8);
        let m = ProposalMoments::new(vec![0.0, 0.0], ScaleFactor::diagonal(vec![1.0, 2.0]).unwrap())
            .unwrap();
        // -ln(2 pi) - ln 2 - (1 + 1) / 2
        assert!((log_q(&m, &[1.0, 2.0]) + 3.531_024_246_969_290_7).abs() < 1e-14);
    }

    #[test]
    fn log_q_integrates_to_one() {
        let mut seed = 17;
        for _ in 0..10 {
            let mu = lcg(&mut seed) * 6.0 - 3.0;
            let s = 0.05 + lcg(&mut seed) * 3.0;
            let m = ProposalMoments::new(vec![mu], ScaleFactor::scalar(s, 1).unwrap()).unwrap();
            // composite Simpson on [mu - 8s, mu + 8s]
            let n = 2000;
            let a = mu - 8.0 * s;
            let step = 16.0 * s / n as f64;
            let mut acc = 0.0;
            for i in 0..=n {
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += w * log_q(&m, &[a + i as f64 * step]).exp();
            }
            assert!((acc * step / 3.0 - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn sample_is_affine_in_noise() {
        let t = make_product_target(Arc::new(DoubleWell), 3).unwrap();
        for name in ["rwm", "mala", "fmala", "moma", "boma"] {
            let m = moments(&v(name), &[0.3, -0.4, 0.9], 0.2, &t).unwrap();
            let xi = [0.7, -1.1, 0.25];
            let neg: Vec<f64> = xi.iter().map(|a| -a).collect();
            let a = sample(&m, &xi);
            let b = sample(&m, &neg);
            for i in 0..3 {
                assert!((a[i] + b[i] - 2.0 * m.mean[i]).abs() <= 4.0 * f64::EPSILON * m.mean[i].abs().max(1.0), "{name}");
            }
        }
    }

    #[test]
    fn flat_target_reduces_to_random_walk() {
        let t = make_product_target(Arc::new(Flat), 4).unwrap();
        let x = [0.1, -2.0, 3.5, 0.0];
        let rwm = moments(&v("rwm"), &x, 0.37, &t).unwrap();
        for name in ["mala", "fmala", "moma", "boma"] {
            let m = moments(&v(name), &x, 0.37, &t).unwrap();
            assert_eq!(m.mean, rwm.mean, "{name}");
            assert!((m.log_det_scale - rwm.log_det_scale).abs() < 1e-15, "{name}");
            assert_eq!(m.scale.to_dense(), rwm.scale.to_dense(), "{name}");
        }
    }

    #[test]
    fn gaussian_mean_coefficients() {
        let mut seed = 99;
        for _ in 0..10 {
            let x = lcg(&mut seed) * 8.0 - 4.0;
            let h = 0.01 + lcg(&mut seed) * 2.0;
            let gamma = 0.05 + lcg(&mut seed) * 2.0;
            // g(t) = -gamma t^2
            let t = gaussian(1, 2.0 * gamma);
            let hg = h * gamma;
            let expect = [
                ("fmala", 1.0 - hg * (1.0 + hg / 6.0)),
                ("moma", (-hg).exp() - 2.0 * hg * hg / 3.0),
                ("boma", (-hg).exp() + 2.0 / 3.0 * ((-hg * hg).exp() - 1.0)),
                ("mala", 1.0 - hg),
            ];
            for (name, coef) in expect {
                let m = moments(&v(name), &[x], h, &t).unwrap();
                assert!((m.mean[0] - coef * x).abs() < 1e-10 * x.abs().max(1.0), "{name}");
            }
        }
    }

    #[test]
    fn boma_matches_unit_gboma() {
        let t = crate::target::make_ar1_target(Link::Sine, 5).unwrap();
        let x = [0.4, -1.0, 2.2, 0.1, -0.6];
        let b = moments(&v("boma"), &x, 0.3, &t).unwrap();
        let g = moments(
            &ProposalVariant::adjusted(Method::Gboma(GbomaParams::BOOSTED)).unwrap(),
            &x,
            0.3,
            &t,
        )
        .unwrap();
        for i in 0..5 {
            assert!((b.mean[i] - g.mean[i]).abs() < 1e-14);
        }
        assert!((b.log_det_scale - g.log_det_scale).abs() < 1e-12);
    }

    #[test]
    fn log_det_matches_dense_determinant() {
        let t = crate::target::make_ar1_target(Link::Sine, 6).unwrap();
        let x = [0.4, -1.0, 2.2, 0.1, -0.6, 1.5];
        for name in ["fmala", "moma", "boma"] {
            let m = moments(&v(name), &x, 0.2, &t).unwrap();
            let det = m.scale.to_dense().determinant();
            assert!((m.log_det_scale - det.abs().ln()).abs() < 1e-10, "{name}");
        }
    }

    #[test]
    fn structured_paths_agree_with_dense_jacobian() {
        let t = crate::target::make_ar1_target(Link::Half, 5).unwrap();
        let x = [1.2, -0.3, 0.8, 2.0, -1.5];
        let mut local = t.local(&x, DerivativeLevel::Full);
        let dense = JacobianRep::dense_symmetric(local.jacobian.as_ref().unwrap().to_dense()).unwrap();
        for name in ["fmala", "moma", "boma"] {
            let a = moments_from_local(&v(name), &x, 0.25, &local).unwrap();
            local.jacobian = Some(dense.clone());
            let b = moments_from_local(&v(name), &x, 0.25, &local).unwrap();
            local.jacobian = Some(t.jacobian(&x));
            for i in 0..5 {
                assert!((a.mean[i] - b.mean[i]).abs() < 1e-12, "{name}");
            }
            assert!((a.scale.to_dense() - b.scale.to_dense()).abs().max() < 1e-12, "{name}");
            assert!((a.log_det_scale - b.log_det_scale).abs() < 1e-10, "{name}");
        }
    }

    #[test]
    fn invalid_inputs() {
        let t = gaussian(2, 1.0);
        assert!(moments(&v("mala"), &[0.0, 0.0], 0.0, &t).is_err());
        assert!(moments(&v("mala"), &[0.0], 0.1, &t).is_err());
        assert!("hmc".parse::<ProposalVariant>().is_err());
        let bad = GbomaParams {
            a1: -1.0,
            ..GbomaParams::BOOSTED
        };
        assert!(ProposalVariant::adjusted(Method::Gboma(bad)).is_err());
    }

    #[test]
    fn fmala_scale_failure_is_typed() {
        // Df = -48 and h = 1/4: sqrt(h) + h^{3/2} Df / 12 = 0.5 - 0.5.
        let t = gaussian(1, 48.0);
        match moments(&v("fmala"), &[0.7], 0.25, &t) {
            Err(ProposalError::ScaleNotPositive(_)) => {}
            other => panic!("expected a scale failure, got {other:?}"),
        }
    }

    #[test]
    fn probe_examples() {
        let grid1: Vec<Vec<f64>> = (0..=600).map(|i| vec![-3.0 + i as f64 * 0.01]).collect();
        let boma = well_posedness_probe(
            &v("boma"),
            &gaussian(10, 1.0),
            &(0..=100)
                .map(|i| vec![-5.0 + i as f64 * 0.1; 10])
                .collect::<Vec<_>>(),
            0.5,
        )
        .unwrap();
        assert!(boma.well_posed());

        let dw = make_product_target(Arc::new(DoubleWell), 1).unwrap();
        let fm = well_posedness_probe(&v("fmala"), &dw, &grid1, 0.5).unwrap();
        let expect = 0.5f64.sqrt() * (1.0 - 0.5 * 26.0 / 12.0);
        assert!(!fm.well_posed());
        assert!((fm.min_value - expect).abs() < 1e-12);

        let rw = well_posedness_probe(&v("rwm"), &dw, &grid1, 0.5).unwrap();
        assert_eq!(rw.min_value, 0.5f64.sqrt());
    }
}
