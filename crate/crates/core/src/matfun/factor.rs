use nalgebra::{DMatrix, DVector};

use super::tridiag::{self, TridiagonalLu};
use crate::error::ProposalError;

/// Symmetric, nonsingular factor `S` of a Gaussian proposal covariance `S S^T = S^2`.
///
/// Every variant keeps the structure of the Jacobian it was built from, so applying,
/// solving and taking `log |det S|` cost `O(d)` for scalar, diagonal and tridiagonal
/// factors.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleFactor {
    Scalar { value: f64, dim: usize },
    Diagonal(Vec<f64>),
    Tridiagonal {
        diag: Vec<f64>,
        off: Vec<f64>,
        lu: TridiagonalLu,
    },
    /// `V diag(values) V^T`.
    Spectral {
        values: Vec<f64>,
        vectors: DMatrix<f64>,
    },
}

fn degenerate(what: &str, value: f64) -> ProposalError {
    ProposalError::ScaleNotPositive(format!("{what} {value}"))
}

fn check_entry(v: f64) -> Result<(), ProposalError> {
    if v == 0.0 || !v.is_finite() {
        Err(degenerate("scale eigenvalue", v))
    } else {
        Ok(())
    }
}

impl ScaleFactor {
    pub fn scalar(value: f64, dim: usize) -> Result<Self, ProposalError> {
        check_entry(value)?;
        Ok(Self::Scalar { value, dim })
    }

    pub fn diagonal(entries: Vec<f64>) -> Result<Self, ProposalError> {
        for &v in &entries {
            check_entry(v)?;
        }
        Ok(Self::Diagonal(entries))
    }

    pub fn tridiagonal(diag: Vec<f64>, off: Vec<f64>) -> Result<Self, ProposalError> {
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(ProposalError::ScaleNotPositive(
                "non-finite tridiagonal scale".into(),
            ));
        }
        let lu = TridiagonalLu::factor(&diag, &off)
            .ok_or_else(|| ProposalError::ScaleNotPositive("singular tridiagonal scale".into()))?;
        Ok(Self::Tridiagonal { diag, off, lu })
    }

    pub fn spectral(values: Vec<f64>, vectors: DMatrix<f64>) -> Result<Self, ProposalError> {
        for &v in &values {
            check_entry(v)?;
        }
        Ok(Self::Spectral { values, vectors })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Scalar { dim, .. } => *dim,
            Self::Diagonal(d) => d.len(),
            Self::Tridiagonal { diag, .. } => diag.len(),
            Self::Spectral { values, .. } => values.len(),
        }
    }

    /// `S xi`.
    pub fn apply(&self, xi: &[f64]) -> Vec<f64> {
        match self {
            Self::Scalar { value, .. } => xi.iter().map(|x| value * x).collect(),
            Self::Diagonal(d) => d.iter().zip(xi).map(|(a, b)| a * b).collect(),
            Self::Tridiagonal { diag, off, .. } => tridiag::matvec(diag, off, xi),
            Self::Spectral { values, vectors } => {
                let mut c = vectors.tr_mul(&DVector::from_column_slice(xi));
                for (ci, v) in c.iter_mut().zip(values) {
                    *ci *= v;
                }
                (vectors * c).as_slice().to_vec()
            }
        }
    }

    /// `S^{-1} r`.
    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        match self {
            Self::Scalar { value, .. } => r.iter().map(|x| x / value).collect(),
            Self::Diagonal(d) => d.iter().zip(r).map(|(a, b)| b / a).collect(),
            Self::Tridiagonal { lu, .. } => lu.solve(r),
            Self::Spectral { values, vectors } => {
                let mut c = vectors.tr_mul(&DVector::from_column_slice(r));
                for (ci, v) in c.iter_mut().zip(values) {
                    *ci /= v;
                }
                (vectors * c).as_slice().to_vec()
            }
        }
    }

    /// `log |det S|`.
    pub fn log_abs_det(&self) -> f64 {
        match self {
            Self::Scalar { value, dim } => *dim as f64 * value.abs().ln(),
            Self::Diagonal(d) => d.iter().map(|v| v.abs().ln()).sum(),
            Self::Tridiagonal { lu, .. } => lu.log_abs_det(),
            Self::Spectral { values, .. } => values.iter().map(|v| v.abs().ln()).sum(),
        }
    }

    /// Smallest eigenvalue of `S` (signed).
    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            Self::Scalar { value, .. } => *value,
            Self::Diagonal(d) => d.iter().copied().fold(f64::INFINITY, f64::min),
            Self::Tridiagonal { diag, off, .. } => tridiag::min_eigenvalue(diag, off),
            Self::Spectral { values, .. } => values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Scalar { value, dim } => DMatrix::identity(*dim, *dim) * *value,
            Self::Diagonal(d) => DMatrix::from_diagonal(&DVector::from_column_slice(d)),
            Self::Tridiagonal { diag, off, .. } => {
                super::JacobianRep::SymTridiagonal {
                    diag: diag.clone(),
                    off: off.clone(),
                }
                .to_dense()
            }
            Self::Spectral { values, vectors } => {
                vectors * DMatrix::from_diagonal(&DVector::from_column_slice(values)) * vectors.transpose()
            }
        }
    }
}
