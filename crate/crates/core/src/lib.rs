//! Langevin-type Metropolis-Hastings proposals with higher-order drift corrections.

pub mod diagnostics;
pub mod error;
pub mod matfun;
pub mod proposal;
pub mod sampler;
pub mod target;
