use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::chain::McmcChain;
use super::stats::{mean, quantile_sorted, sd};
use crate::covariance::{unit_factor, LocalFactor};
use crate::dag::NeighborDag;
use crate::error::{Error, Result};
use crate::geometry::Location;
use crate::par;

#[derive(Clone, Debug, PartialEq)]
pub struct PredictConfig {
    /// Use every `stride`-th stored draw.
    pub stride: usize,
    pub seed: u64,
    /// Central interval probability.
    pub level: f64,
    /// Keep the response draws (needed by [`project_nonnegative`]).
    pub keep_draws: bool,
}

impl Default for PredictConfig {
    fn default() -> Self {
        PredictConfig {
            stride: 1,
            seed: 1,
            level: 0.95,
            keep_draws: false,
        }
    }
}

/// Per-location mean, sd and interval bounds.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Summary {
    fn push(&mut self, draws: &[f64], level: f64) {
        let mut s = draws.to_vec();
        s.sort_by(f64::total_cmp);
        let a = 0.5 * (1.0 - level);
        self.mean.push(mean(draws));
        self.sd.push(sd(draws));
        self.lower.push(quantile_sorted(&s, a));
        self.upper.push(quantile_sorted(&s, 1.0 - a));
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionResult {
    pub locations: Vec<Location>,
    pub w: Summary,
    pub y: Summary,
    pub level: f64,
    /// Response draws per location, when requested.
    pub y_draws: Option<Vec<Vec<f64>>>,
}

impl PredictionResult {
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    /// CSV with header `x,y,w_mean,w_sd,y_mean,y_sd,y_q025,y_q975`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "y", "w_mean", "w_sd", "y_mean", "y_sd", "y_q025", "y_q975"])?;
        for (i, l) in self.locations.iter().enumerate() {
            w.write_record(
                [
                    l.x,
                    l.y,
                    self.w.mean[i],
                    self.w.sd[i],
                    self.y.mean[i],
                    self.y.sd[i],
                    self.y.lower[i],
                    self.y.upper[i],
                ]
                .map(|v| v.to_string()),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

enum Site {
    Reference(usize),
    Other { nbrs: Vec<usize>, locs: Vec<Location> },
}

/// Posterior predictive summaries of `w(u)` and `y(u)` at `locations`.
///
/// Neighbor sets are found once. For each used draw the conditional
/// weights and variance are recomputed under that draw's decay, `w(u)` is
/// drawn from its conditional and the nugget is added for `y(u)`.
/// Locations that coincide with a reference node reuse its latent draw.
/// Randomness is derived from `cfg.seed` and the location index, so results
/// do not depend on the thread count.
pub fn predict(
    chain: &McmcChain,
    dag: &NeighborDag,
    locations: &[Location],
    covariates: Option<&[Vec<f64>]>,
    cfg: &PredictConfig,
) -> Result<PredictionResult> {
    if chain.is_empty() {
        return Err(Error::InvalidConfig("chain has no draws".into()));
    }
    if chain.n_latent() != dag.len() {
        return Err(Error::DimensionMismatch(format!(
            "chain has {} latent values, graph has {} nodes",
            chain.n_latent(),
            dag.len()
        )));
    }
    if cfg.stride == 0 || !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::InvalidConfig("stride must be positive and level in (0, 1)".into()));
    }
    let p = chain.n_beta() - 1;
    for i in 0..locations.len() {
        let row = covariates.and_then(|c| c.get(i));
        if p > 0 && row.is_none_or(|r| r.len() != p) {
            return Err(Error::MissingCovariates { index: i });
        }
    }
    let sites = par::try_map_range(locations.len(), |i| -> Result<Site> {
        let u = locations[i];
        if let Some(j) = dag.position_of(&u) {
            return Ok(Site::Reference(j));
        }
        let nbrs = dag.nonref_neighbors(u)?.indices();
        let locs = nbrs.iter().map(|&j| dag.refs()[j]).collect();
        Ok(Site::Other { nbrs, locs })
    })?;
    let draws: Vec<usize> = (0..chain.len()).step_by(cfg.stride).collect();

    let per_site = par::try_map_range(locations.len(), |i| -> Result<(Vec<f64>, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(i as u64 + 1);
        let mut wd = Vec::with_capacity(draws.len());
        let mut yd = Vec::with_capacity(draws.len());
        let mut cached: Option<(f64, LocalFactor)> = None;
        for &t in &draws {
            let wt = &chain.w[t];
            let w = match &sites[i] {
                Site::Reference(j) => wt[*j],
                Site::Other { nbrs, locs } => {
                    let phi = chain.phi[t];
                    if cached.as_ref().is_none_or(|(p, _)| *p != phi) {
                        let k = chain.spec(t).unit().kernel();
                        let f = unit_factor(&k, &locations[i], locs)
                            .ok_or(Error::SingularNeighborGram { node: None })?;
                        cached = Some((phi, f));
                    }
                    let f = &cached.as_ref().expect("factor cached above").1;
                    let m: f64 = nbrs.iter().zip(&f.weights).map(|(&j, a)| a * wt[j]).sum();
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + (chain.sigma2[t] * f.cond_var).sqrt() * z
                }
            };
            let b = &chain.beta[t];
            let mut mu = b[0];
            if p > 0 {
                let x = &covariates.expect("checked above")[i];
                mu += x.iter().zip(&b[1..]).map(|(a, c)| a * c).sum::<f64>();
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            wd.push(w);
            yd.push(mu + w + chain.tau2[t].sqrt() * z);
        }
        Ok((wd, yd))
    })?;

    let mut out = PredictionResult {
        locations: locations.to_vec(),
        w: Summary::default(),
        y: Summary::default(),
        level: cfg.level,
        y_draws: None,
    };
    for (wd, yd) in &per_site {
        out.w.push(wd, cfg.level);
        out.y.push(yd, cfg.level);
    }
    if cfg.keep_draws {
        out.y_draws = Some(per_site.into_iter().map(|(_, y)| y).collect());
    }
    Ok(out)
}

/// Clamp response predictions at zero.
///
/// With stored draws every draw is clamped before summarizing; otherwise
/// the summaries themselves are clamped. Means and quantiles never decrease.
pub fn project_nonnegative(pred: &PredictionResult) -> PredictionResult {
    let mut out = pred.clone();
    match &pred.y_draws {
        Some(draws) => {
            let clamped: Vec<Vec<f64>> = draws.iter().map(|d| d.iter().map(|v| v.max(0.0)).collect()).collect();
            let mut y = Summary::default();
            for d in &clamped {
                y.push(d, pred.level);
            }
            out.y = y;
            out.y_draws = Some(clamped);
        }
        None => {
            for v in out
                .y
                .mean
                .iter_mut()
                .chain(out.y.lower.iter_mut())
                .chain(out.y.upper.iter_mut())
            {
                *v = v.max(0.0);
            }
        }
    }
    out
}
