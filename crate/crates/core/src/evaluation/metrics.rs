use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::PredictionResult;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rmspe: f64,
    pub mape: f64,
    pub coverage: f64,
    pub ci_width: f64,
    pub n_eval: usize,
}

/// Score point predictions and intervals against held-out truths.
pub fn score(mean: &[f64], lower: &[f64], upper: &[f64], truth: &[f64]) -> Result<MetricReport> {
    let n = truth.len();
    for len in [mean.len(), lower.len(), upper.len()] {
        if len != n {
            return Err(Error::LengthMismatch(len, n));
        }
    }
    if n == 0 {
        return Err(Error::EmptyEvaluation);
    }
    if let Some(i) = truth.iter().position(|t| !t.is_finite()) {
        return Err(Error::NonFinite(format!("truth {i}")));
    }
    let nf = n as f64;
    let mut sq = 0.0;
    let mut abs = 0.0;
    let mut hit = 0usize;
    let mut width = 0.0;
    for i in 0..n {
        let e = mean[i] - truth[i];
        sq += e * e;
        abs += e.abs();
        if lower[i] <= truth[i] && truth[i] <= upper[i] {
            hit += 1;
        }
        width += upper[i] - lower[i];
    }
    Ok(MetricReport {
        rmspe: (sq / nf).sqrt(),
        mape: abs / nf,
        coverage: hit as f64 / nf,
        ci_width: width / nf,
        n_eval: n,
    })
}

/// Score the response predictions of `pred`.
pub fn score_prediction(pred: &PredictionResult, truth: &[f64]) -> Result<MetricReport> {
    score(&pred.y.mean, &pred.y.lower, &pred.y.upper, truth)
}

/// One row of an experiment table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub method: String,
    pub replicate: usize,
    pub m: usize,
    pub n: usize,
    pub rmspe: f64,
    pub mape: f64,
    pub coverage: f64,
    pub ci_width: f64,
}

impl MetricRow {
    pub fn new(method: &str, replicate: usize, m: usize, n: usize, r: &MetricReport) -> Self {
        MetricRow {
            method: method.to_string(),
            replicate,
            m,
            n,
            rmspe: r.rmspe,
            mape: r.mape,
            coverage: r.coverage,
            ci_width: r.ci_width,
        }
    }
}

pub fn write_metric_rows<W: Write>(rows: &[MetricRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
