//! Prediction scores and variogram-based starting values.

mod metrics;
mod variogram;

pub use metrics::{score, score_prediction, write_metric_rows, MetricReport, MetricRow};
pub use variogram::{
    empirical_variogram, fit_matern_variogram, phi_bounds, range_distance, EmpiricalVariogram, VariogramFit,
};
