//! Bayesian spatial regression with the DAG process as the latent prior.

mod chain;
mod gibbs;
mod model;
mod predict;
pub mod stats;

pub use chain::{summarize, McmcChain, ParamSummary};
pub use gibbs::{align_to_dag, gibbs_fit, starting_values};
pub use model::{Dataset, FixedParams, InverseGamma, McmcConfig, PriorSpec, UniformBounds};
pub use predict::{predict, project_nonnegative, PredictConfig, PredictionResult, Summary};
