//! Matrix functionals of symmetric Jacobians.
//!
//! `T1`, `T2`, `T3` and the Ozaki-type variance maps are entire functions of a
//! symmetric matrix, evaluated on its spectrum. Scalar and diagonal inputs never form a
//! matrix; tridiagonal and dense inputs go through an eigendecomposition.

mod factor;
mod rep;
mod scalar;
pub mod tridiag;

pub use factor::ScaleFactor;
pub use rep::{apply_spectral, log_det, JacobianRep, SpectralFunctional, Spectrum};
pub use scalar::{
    assumption1_check, phi1_series, phi2_series, series_threshold, t1_scalar, t2_scalar,
    t3_scalar, variance_map_spectrum, PositivityReport, VarianceMap, SERIES_ARGUMENT,
};

/// Both evaluation branches of each scalar functional, for cross-checking.
pub mod branches {
    pub use super::scalar::{t1_direct, t1_series, t2_direct, t2_series, t3_direct, t3_series};
}
