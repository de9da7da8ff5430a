//! Matérn covariance, DAG conditional factors and the induced sparse
//! precision and nonstationary covariance.

pub mod bessel;
mod factors;
mod matern;
mod sparse;

pub(crate) use factors::unit_factor;
pub use factors::{
    assemble_precision, local_factors, nonstationary_cov, sample_prior_w, LocalFactor, Loading, SparseGpFactors,
    JITTER,
};
pub use matern::{base_cov, CovarianceSpec, Family, Kernel};
pub use sparse::{EnvelopeCholesky, SymmetricSparse};
