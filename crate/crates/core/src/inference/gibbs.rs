use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use super::chain::McmcChain;
use super::model::{Dataset, InverseGamma, McmcConfig, PriorSpec};
use super::stats::{design, full_rank_cholesky, mean, ols};
use crate::covariance::{CovarianceSpec, SparseGpFactors};
use crate::dag::NeighborDag;
use crate::error::{Error, Result};
use crate::evaluation::{empirical_variogram, fit_matern_variogram};

const VARIOGRAM_BINS: usize = 15;

/// Position in DAG order of every observation; errors unless the observed
/// locations are exactly the reference set.
pub fn align_to_dag(data: &Dataset, dag: &NeighborDag) -> Result<Vec<usize>> {
    if data.len() != dag.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations but {} reference nodes",
            data.len(),
            dag.len()
        )));
    }
    let mut seen = vec![false; dag.len()];
    data.locations
        .iter()
        .enumerate()
        .map(|(i, l)| match dag.position_of(l) {
            Some(p) if !seen[p] => {
                seen[p] = true;
                Ok(p)
            }
            _ => Err(Error::DimensionMismatch(format!(
                "observation {i} at ({}, {}) is not a distinct reference node",
                l.x, l.y
            ))),
        })
        .collect()
}

fn ig_mode(p: &InverseGamma) -> f64 {
    p.scale / (p.shape + 1.0)
}

/// Starting covariance and nugget: variogram fit of the regression
/// residuals for the variances (prior modes if the fit is unusable) and the
/// prior midpoint for the decay.
pub fn starting_values(data: &Dataset, priors: &PriorSpec) -> (CovarianceSpec, f64) {
    let mid = 0.5 * (priors.phi.lower + priors.phi.upper);
    let spec = CovarianceSpec {
        family: priors.family,
        sigma2: ig_mode(&priors.sigma2),
        phi: mid,
        nu: priors.nu,
    };
    let fit = empirical_variogram(data, VARIOGRAM_BINS, None)
        .and_then(|emp| fit_matern_variogram(&emp, spec.smoothness(), Some((priors.phi.lower, priors.phi.upper))));
    let (sigma2, tau2) = match fit {
        Ok(f) => (f.sigma2, f.tau2),
        Err(_) => (0.0, 0.0),
    };
    let pick = |v: f64, fallback: f64| if v.is_finite() && v > 1e-8 { v } else { fallback };
    (
        CovarianceSpec {
            sigma2: pick(sigma2, spec.sigma2),
            ..spec
        },
        pick(tau2, ig_mode(&priors.tau2)),
    )
}

fn draw_inv_gamma(rng: &mut ChaCha8Rng, shape: f64, scale: f64) -> f64 {
    let g = Gamma::new(shape, 1.0 / scale).expect("positive inverse-gamma parameters");
    1.0 / g.sample(rng)
}

fn logit(phi: f64, lo: f64, hi: f64) -> f64 {
    ((phi - lo) / (hi - phi)).ln()
}

fn inv_logit(eta: f64, lo: f64, hi: f64) -> f64 {
    let p = if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    };
    lo + (hi - lo) * p
}

/// `sum_i log N(w_i; M_i w_[i], sigma2 V1_i)`.
fn dag_loglik(f: &SparseGpFactors, w: &[f64], sigma2: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..f.len() {
        let v = sigma2 * f.unit_var(i);
        let r = w[i] - f.cond_mean(i, w);
        s -= 0.5 * (v.ln() + r * r / v);
    }
    s
}

/// Gibbs sampler for `y = X beta + w + e` with the DAG process prior on `w`.
///
/// Each iteration updates every `w_i` from its Gaussian full conditional in
/// visit order, then `beta` (flat prior), `tau2` and `sigma2` (conjugate
/// inverse gamma, the latter on the unit-sill factorization), and finally
/// `phi` by random-walk Metropolis on `log((phi - l) / (u - phi))`.
///
/// `spec_init` supplies the kernel family, smoothness and starting
/// `sigma2`, `phi`; see [`starting_values`]. The nugget starts from the
/// residual variogram and `w` from the least-squares residuals.
pub fn gibbs_fit(
    data: &Dataset,
    dag: &NeighborDag,
    spec_init: &CovarianceSpec,
    priors: &PriorSpec,
    cfg: &McmcConfig,
) -> Result<McmcChain> {
    priors.validate()?;
    cfg.validate()?;
    spec_init.validate()?;
    data.validate(dag.barriers())?;
    let pos = align_to_dag(data, dag)?;
    let n = data.len();
    let (lo, hi) = (priors.phi.lower, priors.phi.upper);
    let fixed = &cfg.fixed;

    // observations rearranged into DAG order
    let mut y = vec![0.0; n];
    let mut cov = vec![Vec::new(); n];
    for (i, &p) in pos.iter().enumerate() {
        y[p] = data.response[i];
        cov[p] = data.covariates[i].clone();
    }
    let x = design(&cov, n);
    let q = x.ncols();
    let xtx_chol = full_rank_cholesky(x.transpose() * &x)?;
    let xt = x.transpose();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut beta = match &fixed.beta {
        Some(b) if b.len() != q => {
            return Err(Error::DimensionMismatch(format!("{} fixed coefficients for {q} columns", b.len())));
        }
        Some(b) => b.clone(),
        None => ols(&x, &y)?,
    };
    let fit = |b: &[f64]| -> Vec<f64> { (0..n).map(|i| (0..q).map(|j| x[(i, j)] * b[j]).sum()).collect() };
    let mut xb = fit(&beta);
    let mut w: Vec<f64> = (0..n).map(|i| y[i] - xb[i]).collect();
    let mw = mean(&w);
    w.iter_mut().for_each(|v| *v -= mw);

    let (_, tau2_start) = starting_values(data, priors);
    let mut tau2 = fixed.tau2.unwrap_or(tau2_start);
    let mut sigma2 = fixed.sigma2.unwrap_or(spec_init.sigma2);
    let mut phi = fixed.phi.unwrap_or(if spec_init.phi > lo && spec_init.phi < hi {
        spec_init.phi
    } else {
        0.5 * (lo + hi)
    });
    if fixed.phi.is_none() && !(phi > lo && phi < hi) {
        return Err(Error::InvalidConfig(format!("starting phi {phi} outside ({lo}, {hi})")));
    }
    let base = CovarianceSpec {
        family: spec_init.family,
        sigma2: 1.0,
        phi,
        nu: spec_init.nu,
    };
    let mut fac = SparseGpFactors::compute(dag, &base)?;

    // children with the slot they occupy in each child's neighbor list
    let mut kids: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for c in 0..n {
        for (s, &j) in fac.neighbors(c).iter().enumerate() {
            kids[j].push((c, s));
        }
    }

    let mut eta_sd = cfg.phi_proposal_sd;
    let stored = cfg.stored_draws();
    let mut chain = McmcChain {
        beta: Vec::with_capacity(stored),
        tau2: Vec::with_capacity(stored),
        sigma2: Vec::with_capacity(stored),
        phi: Vec::with_capacity(stored),
        w: Vec::with_capacity(stored),
        acceptance_rate: 0.0,
        proposal_sd: eta_sd,
        seed: cfg.seed,
        family: spec_init.family,
        nu: spec_init.nu,
    };
    let mut accepted = 0usize;
    let mut attempts = 0usize;

    for it in 0..cfg.iterations {
        // latent process
        for i in 0..n {
            let vi = sigma2 * fac.unit_var(i);
            let mut prec = 1.0 / tau2 + 1.0 / vi;
            let mut lin = (y[i] - xb[i]) / tau2 + fac.cond_mean(i, &w) / vi;
            for &(c, s) in &kids[i] {
                let a = fac.weights(c)[s];
                let vc = sigma2 * fac.unit_var(c);
                let r = w[c] - fac.cond_mean(c, &w) + a * w[i];
                prec += a * a / vc;
                lin += a * r / vc;
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            w[i] = lin / prec + z / prec.sqrt();
            if !w[i].is_finite() {
                return Err(Error::NonFiniteLikelihood { iteration: it });
            }
        }

        if fixed.beta.is_none() {
            let r = DVector::from_iterator(n, (0..n).map(|i| y[i] - w[i]));
            let bhat = xtx_chol.solve(&(&xt * r));
            let z = DVector::from_fn(q, |_, _| StandardNormal.sample(&mut rng));
            // L^T u = z gives u ~ N(0, (X'X)^{-1})
            let u = xtx_chol
                .l()
                .transpose()
                .solve_upper_triangular(&z)
                .expect("triangular factor is nonsingular");
            beta = (bhat + u * tau2.sqrt()).as_slice().to_vec();
            xb = fit(&beta);
        }

        if fixed.tau2.is_none() {
            let ssr: f64 = (0..n).map(|i| (y[i] - xb[i] - w[i]).powi(2)).sum();
            tau2 = draw_inv_gamma(&mut rng, priors.tau2.shape + 0.5 * n as f64, priors.tau2.scale + 0.5 * ssr);
        }

        if fixed.sigma2.is_none() {
            let ss: f64 = (0..n)
                .map(|i| (w[i] - fac.cond_mean(i, &w)).powi(2) / fac.unit_var(i))
                .sum();
            sigma2 = draw_inv_gamma(
                &mut rng,
                priors.sigma2.shape + 0.5 * n as f64,
                priors.sigma2.scale + 0.5 * ss,
            );
        }

        if fixed.phi.is_none() {
            let cur = dag_loglik(&fac, &w, sigma2);
            if !cur.is_finite() {
                return Err(Error::NonFiniteLikelihood { iteration: it });
            }
            let eta = logit(phi, lo, hi);
            let z: f64 = StandardNormal.sample(&mut rng);
            let prop = inv_logit(eta + eta_sd * z, lo, hi);
            let u: f64 = rng.random();
            let mut alpha = 0.0;
            if prop > lo && prop < hi {
                let pf = fac.with_phi(prop)?;
                let new = dag_loglik(&pf, &w, sigma2);
                let jac = |p: f64| (p - lo).ln() + (hi - p).ln();
                let log_r = new + jac(prop) - cur - jac(phi);
                alpha = if log_r.is_nan() { 0.0 } else { log_r.exp().min(1.0) };
                if u < alpha {
                    phi = prop;
                    fac = pf;
                    if it >= cfg.burn_in {
                        accepted += 1;
                    }
                }
            }
            if it >= cfg.burn_in {
                attempts += 1;
            } else if cfg.adapt {
                eta_sd *= ((alpha - 0.3) / ((it + 1) as f64).powf(0.6)).exp();
                eta_sd = eta_sd.clamp(1e-4, 10.0);
            }
        }

        if it >= cfg.burn_in && (it + 1 - cfg.burn_in) % cfg.thin == 0 {
            chain.beta.push(beta.clone());
            chain.tau2.push(tau2);
            chain.sigma2.push(sigma2);
            chain.phi.push(phi);
            chain.w.push(w.clone());
        }
    }
    chain.acceptance_rate = if attempts > 0 { accepted as f64 / attempts as f64 } else { 0.0 };
    chain.proposal_sd = eta_sd;
    Ok(chain)
}
