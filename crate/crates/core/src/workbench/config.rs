use std::collections::HashSet;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::McmcConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Faults,
    SlidingDoors,
    Custom,
}

/// Flat TOML experiment description.
///
/// ```toml
/// experiment = "faults"
/// seeds = [1, 2, 3, 4, 5]
/// m_values = [15]
/// iterations = 25000
/// burn_in = 10000
/// predict_stride = 15
/// output_dir = "out"
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seeds: Vec<u64>,
    pub m_values: Vec<usize>,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub phi_proposal_sd: f64,
    pub adapt: bool,
    /// Every `predict_stride`-th stored draw feeds the predictions.
    pub predict_stride: usize,
    /// Also fit the barrier-blind model.
    pub fit_nngp: bool,
    /// Fault segments as `[x0, y0, x1, y1]`.
    pub faults: Vec<[f64; 4]>,
    pub output_dir: PathBuf,
}

/// Fault placement used by the faults study: horizontal segments of
/// lengths 1.7 and 1.3.
pub const DEFAULT_FAULTS: [[f64; 4]; 2] = [[0.0, 1.35, 1.7, 1.35], [0.7, 0.65, 2.0, 0.65]];

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::Faults,
            seeds: vec![1, 2, 3, 4, 5],
            m_values: vec![15],
            iterations: 25_000,
            burn_in: 10_000,
            thin: 1,
            phi_proposal_sd: 0.3,
            adapt: true,
            predict_stride: 15,
            fit_nngp: true,
            faults: DEFAULT_FAULTS.to_vec(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("at least one seed is required".into()));
        }
        let distinct: HashSet<u64> = self.seeds.iter().copied().collect();
        if distinct.len() != self.seeds.len() {
            return Err(Error::InvalidConfig("replicate seeds must be distinct".into()));
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return Err(Error::InvalidConfig("m values must be at least 1".into()));
        }
        if self.predict_stride == 0 {
            return Err(Error::InvalidConfig("predict_stride must be at least 1".into()));
        }
        self.mcmc(0).validate()
    }

    /// Sampler settings for one replicate.
    pub fn mcmc(&self, seed: u64) -> McmcConfig {
        McmcConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            seed,
            phi_proposal_sd: self.phi_proposal_sd,
            adapt: self.adapt,
            fixed: Default::default(),
        }
    }
}
