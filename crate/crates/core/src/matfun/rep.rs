use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::scalar::{t1_scalar, t2_scalar, t3_scalar, variance_map_spectrum, VarianceMap};
use super::tridiag;
use crate::error::MatfunError;

/// Structured representation of a symmetric Jacobian `Df(x)` (with `Sigma = I`).
#[derive(Debug, Clone, PartialEq)]
pub enum JacobianRep {
    /// `value * I_dim`
    Scalar { value: f64, dim: usize },
    Diagonal(Vec<f64>),
    SymTridiagonal { diag: Vec<f64>, off: Vec<f64> },
    DenseSymmetric(DMatrix<f64>),
}

impl JacobianRep {
    pub fn sym_tridiagonal(diag: Vec<f64>, off: Vec<f64>) -> Result<Self, MatfunError> {
        if off.len() + 1 != diag.len() && !(diag.is_empty() && off.is_empty()) {
            return Err(MatfunError::DimensionMismatch {
                expected: diag.len().saturating_sub(1),
                got: off.len(),
            });
        }
        Ok(Self::SymTridiagonal { diag, off })
    }

    /// Symmetrizes `(m + m^T) / 2`.
    pub fn dense_symmetric(m: DMatrix<f64>) -> Result<Self, MatfunError> {
        if !m.is_square() {
            return Err(MatfunError::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self::DenseSymmetric(sym))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Scalar { dim, .. } => *dim,
            Self::Diagonal(d) => d.len(),
            Self::SymTridiagonal { diag, .. } => diag.len(),
            Self::DenseSymmetric(m) => m.nrows(),
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Self::Scalar { value, .. } => v.iter().map(|x| value * x).collect(),
            Self::Diagonal(d) => d.iter().zip(v).map(|(a, b)| a * b).collect(),
            Self::SymTridiagonal { diag, off } => tridiag::matvec(diag, off, v),
            Self::DenseSymmetric(m) => (m * DVector::from_column_slice(v)).as_slice().to_vec(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Scalar { value, dim } => DMatrix::identity(*dim, *dim) * *value,
            Self::Diagonal(d) => DMatrix::from_diagonal(&DVector::from_column_slice(d)),
            Self::SymTridiagonal { diag, off } => {
                let n = diag.len();
                DMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        diag[i]
                    } else if i + 1 == j {
                        off[i]
                    } else if j + 1 == i {
                        off[j]
                    } else {
                        0.0
                    }
                })
            }
            Self::DenseSymmetric(m) => m.clone(),
        }
    }

    /// Eigendecomposition. Scalar and diagonal inputs keep the standard basis.
    pub fn eigen(&self) -> Spectrum {
        match self {
            Self::Scalar { value, dim } => Spectrum {
                values: vec![*value; *dim],
                vectors: None,
            },
            Self::Diagonal(d) => Spectrum {
                values: d.clone(),
                vectors: None,
            },
            Self::SymTridiagonal { diag, off } => {
                let (values, vectors) = tridiag::eigen(diag, off);
                Spectrum {
                    values,
                    vectors: Some(vectors),
                }
            }
            Self::DenseSymmetric(m) => {
                let eig = SymmetricEigen::new(m.clone());
                Spectrum {
                    values: eig.eigenvalues.as_slice().to_vec(),
                    vectors: Some(eig.eigenvectors),
                }
            }
        }
    }
}

/// Eigenvalues with eigenvectors as columns; `None` means the standard basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Option<DMatrix<f64>>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(phi(lambda)) V^T v`.
    pub fn apply(&self, phi: impl Fn(f64) -> f64, v: &[f64]) -> Vec<f64> {
        match &self.vectors {
            None => self.values.iter().zip(v).map(|(&l, &x)| phi(l) * x).collect(),
            Some(vecs) => {
                let mut coeffs = vecs.tr_mul(&DVector::from_column_slice(v));
                for (c, &l) in coeffs.iter_mut().zip(&self.values) {
                    *c *= phi(l);
                }
                (vecs * coeffs).as_slice().to_vec()
            }
        }
    }

    /// Same basis with eigenvalues mapped through `phi`.
    pub fn map(&self, phi: impl Fn(f64) -> f64) -> Spectrum {
        Spectrum {
            values: self.values.iter().map(|&l| phi(l)).collect(),
            vectors: self.vectors.clone(),
        }
    }
}

/// Scalar map applied to a symmetric spectrum.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralFunctional {
    T1 { h: f64, a: f64 },
    T2 { h: f64, a: f64 },
    T3 { h: f64, a: f64 },
    MoVariance { h: f64 },
    BoVariance { h: f64 },
    GboVariance { h: f64, a4: f64, a5: f64 },
    Sqrt,
    Log,
    /// `outer(inner(t))`.
    Then {
        inner: Box<SpectralFunctional>,
        outer: Box<SpectralFunctional>,
    },
}

impl SpectralFunctional {
    pub fn then(self, outer: SpectralFunctional) -> Self {
        Self::Then {
            inner: Box::new(self),
            outer: Box::new(outer),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::T1 { h, a } => format!("T1(h={h},a={a})"),
            Self::T2 { h, a } => format!("T2(h={h},a={a})"),
            Self::T3 { h, a } => format!("T3(h={h},a={a})"),
            Self::MoVariance { h } => format!("mO_variance(h={h})"),
            Self::BoVariance { h } => format!("bO_variance(h={h})"),
            Self::GboVariance { h, a4, a5 } => format!("gbO_variance(h={h},a4={a4},a5={a5})"),
            Self::Sqrt => "sqrt".into(),
            Self::Log => "log".into(),
            Self::Then { inner, outer } => format!("{}∘{}", outer.label(), inner.label()),
        }
    }

    /// Image of eigenvalue `lambda`.
    pub fn eval(&self, lambda: f64) -> Result<f64, MatfunError> {
        self.eval_image(lambda, lambda)
    }

    fn eval_image(&self, lambda: f64, t: f64) -> Result<f64, MatfunError> {
        let positive = |image: f64| {
            if image > 0.0 {
                Ok(image)
            } else {
                Err(MatfunError::NonPositiveSpectrum {
                    eigenvalue: lambda,
                    image,
                })
            }
        };
        Ok(match self {
            Self::T1 { h, a } => t1_scalar(t, *h, *a),
            Self::T2 { h, a } => t2_scalar(t, *h, *a),
            Self::T3 { h, a } => t3_scalar(t, *h, *a),
            Self::MoVariance { h } => variance_map_spectrum(VarianceMap::Modified, t, *h),
            Self::BoVariance { h } => variance_map_spectrum(VarianceMap::Boosted, t, *h),
            Self::GboVariance { h, a4, a5 } => variance_map_spectrum(
                VarianceMap::GeneralisedBoosted { a4: *a4, a5: *a5 },
                t,
                *h,
            ),
            Self::Sqrt => positive(t)?.sqrt(),
            Self::Log => positive(t)?.ln(),
            Self::Then { inner, outer } => {
                let mid = inner.eval_image(lambda, t)?;
                outer.eval_image(lambda, mid)?
            }
        })
    }
}

/// `V diag(phi(lambda_i)) V^T`. Scalar and diagonal inputs keep their structure;
/// tridiagonal and dense inputs come back dense.
pub fn apply_spectral(
    rep: &JacobianRep,
    functional: &SpectralFunctional,
) -> Result<JacobianRep, MatfunError> {
    match rep {
        JacobianRep::Scalar { value, dim } => Ok(JacobianRep::Scalar {
            value: functional.eval(*value)?,
            dim: *dim,
        }),
        JacobianRep::Diagonal(d) => Ok(JacobianRep::Diagonal(
            d.iter()
                .map(|&l| functional.eval(l))
                .collect::<Result<_, _>>()?,
        )),
        _ => {
            let spectrum = rep.eigen();
            let images: Vec<f64> = spectrum
                .values
                .iter()
                .map(|&l| functional.eval(l))
                .collect::<Result<_, _>>()?;
            let vecs = spectrum.vectors.expect("dense spectrum carries eigenvectors");
            let scaled = DMatrix::from_fn(vecs.nrows(), vecs.ncols(), |i, j| vecs[(i, j)] * images[j]);
            Ok(JacobianRep::DenseSymmetric(scaled * vecs.transpose()))
        }
    }
}

/// `log det` of a positive-definite representation.
pub fn log_det(rep: &JacobianRep) -> Result<f64, MatfunError> {
    let check = |l: f64| {
        if l > 0.0 {
            Ok(l.ln())
        } else {
            Err(MatfunError::NonPositiveSpectrum {
                eigenvalue: l,
                image: l,
            })
        }
    };
    match rep {
        JacobianRep::Scalar { value, dim } => Ok(*dim as f64 * check(*value)?),
        JacobianRep::Diagonal(d) => d.iter().map(|&l| check(l)).sum(),
        JacobianRep::SymTridiagonal { diag, off } => match tridiag::log_det_positive(diag, off) {
            Some(v) => Ok(v),
            None => {
                let (values, _) = tridiag::eigen(diag, off);
                values.iter().map(|&l| check(l)).sum()
            }
        },
        JacobianRep::DenseSymmetric(_) => rep.eigen().values.iter().map(|&l| check(l)).sum(),
    }
}
