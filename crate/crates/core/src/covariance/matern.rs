use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::bessel::bessel_k_scaled;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Matern,
    /// Matérn with smoothness 1/2.
    Exponential,
}

/// Isotropic base covariance `sigma2 * rho(phi * d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSpec {
    pub family: Family,
    pub sigma2: f64,
    pub phi: f64,
    pub nu: f64,
}

impl CovarianceSpec {
    pub fn matern(sigma2: f64, phi: f64, nu: f64) -> Self {
        CovarianceSpec {
            family: Family::Matern,
            sigma2,
            phi,
            nu,
        }
    }

    pub fn exponential(sigma2: f64, phi: f64) -> Self {
        CovarianceSpec {
            family: Family::Exponential,
            sigma2,
            phi,
            nu: 0.5,
        }
    }

    /// Effective smoothness.
    pub fn smoothness(&self) -> f64 {
        match self.family {
            Family::Matern => self.nu,
            Family::Exponential => 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.sigma2) || !ok(self.phi) || !ok(self.smoothness()) {
            return Err(Error::InvalidSpec(format!(
                "sigma2={}, phi={}, nu={} must all be positive and finite",
                self.sigma2,
                self.phi,
                self.smoothness()
            )));
        }
        Ok(())
    }

    /// Same spec with unit partial sill.
    pub fn unit(&self) -> Self {
        CovarianceSpec { sigma2: 1.0, ..*self }
    }

    pub fn with_phi(&self, phi: f64) -> Self {
        CovarianceSpec { phi, ..*self }
    }

    /// Precomputed evaluator; panics-free only for a validated spec.
    pub fn kernel(&self) -> Kernel {
        Kernel::new(self)
    }
}

#[derive(Clone, Copy, Debug)]
enum Form {
    Half,
    ThreeHalves,
    FiveHalves,
    General { log_norm: f64 },
}

/// Fast evaluator of a validated [`CovarianceSpec`].
#[derive(Clone, Copy, Debug)]
pub struct Kernel {
    sigma2: f64,
    phi: f64,
    nu: f64,
    form: Form,
}

impl Kernel {
    fn new(spec: &CovarianceSpec) -> Self {
        let nu = spec.smoothness();
        let form = if nu == 0.5 {
            Form::Half
        } else if nu == 1.5 {
            Form::ThreeHalves
        } else if nu == 2.5 {
            Form::FiveHalves
        } else {
            // log of 2^{1-nu} / Gamma(nu)
            Form::General {
                log_norm: (1.0 - nu) * std::f64::consts::LN_2 - ln_gamma(nu),
            }
        };
        Kernel {
            sigma2: spec.sigma2,
            phi: spec.phi,
            nu,
            form,
        }
    }

    /// Covariance at distance `d >= 0`.
    #[inline]
    pub fn cov(&self, d: f64) -> f64 {
        self.sigma2 * self.corr(d)
    }

    /// Correlation at distance `d >= 0`.
    #[inline]
    pub fn corr(&self, d: f64) -> f64 {
        let x = self.phi * d;
        if x == 0.0 {
            return 1.0;
        }
        match self.form {
            Form::Half => (-x).exp(),
            Form::ThreeHalves => (1.0 + x) * (-x).exp(),
            Form::FiveHalves => (1.0 + x + x * x / 3.0) * (-x).exp(),
            Form::General { log_norm } => {
                let v = (log_norm + self.nu * x.ln() - x).exp() * bessel_k_scaled(self.nu, x);
                v.min(1.0)
            }
        }
    }
}

/// Base covariance at distance `d`.
pub fn base_cov(d: f64, spec: &CovarianceSpec) -> Result<f64> {
    spec.validate()?;
    if d.is_nan() || d < 0.0 {
        return Err(Error::NegativeDistance(d));
    }
    Ok(spec.kernel().cov(d))
}
