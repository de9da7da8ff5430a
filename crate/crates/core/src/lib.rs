//! Gaussian-process regression on spatial domains with physical barriers.
//!
//! The process is defined through a sparse directed acyclic graph over a
//! set of reference locations whose edges never cross a barrier. Conditional
//! Gaussian factors along that graph give a valid, nonstationary process
//! that reduces to the plain nearest-neighbor process when there are no
//! barriers.

pub mod covariance;
pub mod dag;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod inference;
pub mod par;
pub mod workbench;

pub use error::{Error, Result};
pub use geometry::{BarrierSet, Location};
