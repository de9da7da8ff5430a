use serde::{Deserialize, Serialize};

use crate::covariance::Family;
use crate::error::{Error, Result};
use crate::geometry::{BarrierSet, Location};

/// Observations `y(s) = b0 + x(s)' b1 + w(s) + e(s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub locations: Vec<Location>,
    pub response: Vec<f64>,
    /// One row of `p` covariates per observation (rows empty when `p = 0`).
    pub covariates: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn new(locations: Vec<Location>, response: Vec<f64>, covariates: Vec<Vec<f64>>) -> Result<Self> {
        let d = Dataset {
            locations,
            response,
            covariates,
        };
        d.check_shape()?;
        Ok(d)
    }

    /// Intercept-only data.
    pub fn without_covariates(locations: Vec<Location>, response: Vec<f64>) -> Result<Self> {
        let n = locations.len();
        Self::new(locations, response, vec![Vec::new(); n])
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// Number of covariates (excluding the intercept).
    pub fn p(&self) -> usize {
        self.covariates.first().map_or(0, |r| r.len())
    }

    fn check_shape(&self) -> Result<()> {
        let n = self.locations.len();
        if n == 0 {
            return Err(Error::TooFewPoints { needed: 1, got: 0 });
        }
        if self.response.len() != n || self.covariates.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} locations, {} responses, {} covariate rows",
                n,
                self.response.len(),
                self.covariates.len()
            )));
        }
        let p = self.p();
        for (i, row) in self.covariates.iter().enumerate() {
            if row.len() != p {
                return Err(Error::DimensionMismatch(format!("covariate row {i} has {} entries, expected {p}", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("covariate row {i}")));
            }
        }
        for (i, (l, y)) in self.locations.iter().zip(&self.response).enumerate() {
            l.check_finite()?;
            if !y.is_finite() {
                return Err(Error::NonFinite(format!("response {i}")));
            }
        }
        Ok(())
    }

    /// Shape checks plus rejection of locations inside barriers.
    pub fn validate(&self, barriers: &BarrierSet) -> Result<()> {
        self.check_shape()?;
        for l in &self.locations {
            if barriers.point_in_barrier(l)? {
                return Err(Error::LocationInBarrier { x: l.x, y: l.y });
            }
        }
        Ok(())
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            locations: idx.iter().map(|&i| self.locations[i]).collect(),
            response: idx.iter().map(|&i| self.response[i]).collect(),
            covariates: idx.iter().map(|&i| self.covariates[i].clone()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseGamma {
    pub shape: f64,
    pub scale: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Priors: flat on the regression coefficients, inverse gamma on the two
/// variances, uniform on the decay; smoothness fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub tau2: InverseGamma,
    pub sigma2: InverseGamma,
    pub phi: UniformBounds,
    pub nu: f64,
    pub family: Family,
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        if !(pos(self.tau2.shape) && pos(self.tau2.scale) && pos(self.sigma2.shape) && pos(self.sigma2.scale)) {
            return Err(Error::InvalidConfig("inverse-gamma shape and scale must be positive".into()));
        }
        if !(pos(self.phi.lower) && self.phi.upper > self.phi.lower && self.phi.upper.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "phi bounds ({}, {}) must satisfy 0 < lower < upper",
                self.phi.lower, self.phi.upper
            )));
        }
        if !pos(self.nu) {
            return Err(Error::InvalidConfig("smoothness must be positive".into()));
        }
        Ok(())
    }
}

/// Parameters held at fixed values instead of being sampled.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    pub beta: Option<Vec<f64>>,
    pub tau2: Option<f64>,
    pub sigma2: Option<f64>,
    pub phi: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Random-walk scale on the logit-transformed decay.
    pub phi_proposal_sd: f64,
    /// Robbins-Monro tuning of the proposal scale during burn-in.
    pub adapt: bool,
    #[serde(default)]
    pub fixed: FixedParams,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            iterations: 25_000,
            burn_in: 10_000,
            thin: 1,
            seed: 1,
            phi_proposal_sd: 0.3,
            adapt: true,
            fixed: FixedParams::default(),
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidConfig(format!(
                "burn-in {} must be below the iteration count {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thin must be at least 1".into()));
        }
        if !(self.phi_proposal_sd.is_finite() && self.phi_proposal_sd > 0.0) {
            return Err(Error::InvalidConfig("phi proposal sd must be positive".into()));
        }
        Ok(())
    }

    /// Number of stored draws.
    pub fn stored_draws(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}
