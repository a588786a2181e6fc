//! Scalar forms of the Ozaki-type matrix functionals.
//!
//! Each functional has a removable singularity at `t = 0`. The direct formula is used
//! when the exponent's argument exceeds [`SERIES_ARGUMENT`] in magnitude; below it a
//! truncated Taylor series takes over.

/// Magnitude of the exponential's argument below which the series branch is used.
pub const SERIES_ARGUMENT: f64 = 1e-4;

const SERIES_TERMS: usize = 12;

/// `sum_{k>=0} z^k / (k + offset)!`, Horner form.
fn exp_remainder_series(z: f64, offset: usize) -> f64 {
    let mut acc = 0.0;
    for k in (0..SERIES_TERMS).rev() {
        acc = acc * z / ((k + offset + 1) as f64) + 1.0;
    }
    // acc = sum z^k * offset! / (k+offset)!
    let fact: f64 = (1..=offset).map(|j| j as f64).product();
    acc / fact
}

/// `(e^z - 1) / z` by series.
pub fn phi1_series(z: f64) -> f64 {
    exp_remainder_series(z, 1)
}

/// `(e^z - 1 - z) / z^2` by series.
pub fn phi2_series(z: f64) -> f64 {
    exp_remainder_series(z, 2)
}

/// Threshold on `|t|` below which the series branch applies, `1e-4 * 2 / (|a| h)`.
pub fn series_threshold(h: f64, a: f64) -> f64 {
    SERIES_ARGUMENT * 2.0 / (a.abs() * h)
}

/// `(e^{(a h / 2) t} - 1) / (a t)`; equals `h/2` at `t = 0`.
pub fn t1_scalar(t: f64, h: f64, a: f64) -> f64 {
    let z = 0.5 * a * h * t;
    if z.abs() <= SERIES_ARGUMENT {
        t1_series(t, h, a)
    } else {
        z.exp_m1() / (a * t)
    }
}

pub fn t1_series(t: f64, h: f64, a: f64) -> f64 {
    0.5 * h * phi1_series(0.5 * a * h * t)
}

pub fn t1_direct(t: f64, h: f64, a: f64) -> f64 {
    (0.5 * a * h * t).exp_m1() / (a * t)
}

/// `(e^{-(a h^2 / 4) t^2} - 1) / (a t)`; odd in `t`, zero at `t = 0`.
pub fn t2_scalar(t: f64, h: f64, a: f64) -> f64 {
    if (0.5 * a * h * t).abs() <= SERIES_ARGUMENT {
        t2_series(t, h, a)
    } else {
        t2_direct(t, h, a)
    }
}

pub fn t2_series(t: f64, h: f64, a: f64) -> f64 {
    let w = 0.25 * a * h * h * t * t;
    -0.25 * h * h * t * phi1_series(-w)
}

pub fn t2_direct(t: f64, h: f64, a: f64) -> f64 {
    let w = 0.25 * a * h * h * t * t;
    (-w).exp_m1() / (a * t)
}

/// `(e^{(a h / 2) t} - 1 - (a h / 2) t) / (a t)^2`; equals `h^2 / 8` at `t = 0`.
pub fn t3_scalar(t: f64, h: f64, a: f64) -> f64 {
    let z = 0.5 * a * h * t;
    if z.abs() <= SERIES_ARGUMENT {
        t3_series(t, h, a)
    } else {
        t3_direct(t, h, a)
    }
}

pub fn t3_series(t: f64, h: f64, a: f64) -> f64 {
    0.25 * h * h * phi2_series(0.5 * a * h * t)
}

pub fn t3_direct(t: f64, h: f64, a: f64) -> f64 {
    let z = 0.5 * a * h * t;
    let at = a * t;
    (z.exp_m1() - z) / (at * at)
}

/// Scalar spectral function under the square root of an Ozaki-type variance map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceMap {
    /// `T1(t, 2h, 1) - (h^2 / 3) t`
    Modified,
    /// `T1(t, 2h, 1) + (1/3) T2(t, 2h, 1)`
    Boosted,
    /// `T1(t, 2h, a4) + (a4/2 - 1/6) T2(t, 2h, a5)`
    GeneralisedBoosted { a4: f64, a5: f64 },
}

pub fn variance_map_spectrum(map: VarianceMap, t: f64, h: f64) -> f64 {
    match map {
        VarianceMap::Modified => t1_scalar(t, 2.0 * h, 1.0) - h * h / 3.0 * t,
        VarianceMap::Boosted => t1_scalar(t, 2.0 * h, 1.0) + t2_scalar(t, 2.0 * h, 1.0) / 3.0,
        VarianceMap::GeneralisedBoosted { a4, a5 } => {
            t1_scalar(t, 2.0 * h, a4) + (0.5 * a4 - 1.0 / 6.0) * t2_scalar(t, 2.0 * h, a5)
        }
    }
}

/// Outcome of the numerical positivity check on a gbOMA variance function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub positive: bool,
    /// Smallest value found on the grid.
    pub min_value: f64,
    pub argmin: f64,
    /// Coefficient of `1/|t|` as `t -> -infinity`; must be positive.
    pub left_tail_coefficient: f64,
}

/// Checks that `t -> (e^{a4 t} - 1)/(a4 t) + (a4/2 - 1/6)(e^{-a5 t^2} - 1)/(a5 t)` is
/// positive on the real line.
///
/// The grid is `[-half_width, half_width]` with the given step. The right tail is
/// dominated by `e^{a4 t}` and is always positive; the left tail behaves like
/// `(1/a4 + (a4/2 - 1/6)/a5) / |t|`.
pub fn assumption1_check(
    a4: f64,
    a5: f64,
    half_width: f64,
    step: f64,
) -> Result<PositivityReport, crate::error::MatfunError> {
    use crate::error::MatfunError;
    if !(a4 > 0.0) || !(a5 > 0.0) {
        return Err(MatfunError::InvalidParameter(format!(
            "a4 and a5 must be positive, got a4={a4}, a5={a5}"
        )));
    }
    if !(half_width >= 50.0) || !(step > 0.0 && step <= 0.01) {
        return Err(MatfunError::InvalidParameter(format!(
            "grid must cover [-50, 50] with step <= 0.01, got half-width {half_width}, step {step}"
        )));
    }
    // With h = 1 the gbO variance map is exactly this function.
    let map = VarianceMap::GeneralisedBoosted { a4, a5 };
    let n = (2.0 * half_width / step).round() as usize;
    let mut min_value = f64::INFINITY;
    let mut argmin = 0.0;
    for i in 0..=n {
        let t = -half_width + i as f64 * step;
        let v = variance_map_spectrum(map, t, 1.0);
        if v < min_value {
            min_value = v;
            argmin = t;
        }
    }
    let left_tail_coefficient = 1.0 / a4 + (0.5 * a4 - 1.0 / 6.0) / a5;
    Ok(PositivityReport {
        positive: min_value > 0.0 && left_tail_coefficient > 0.0,
        min_value,
        argmin,
        left_tail_coefficient,
    })
}
