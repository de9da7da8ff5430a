use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::covariance::{sample_prior_w, CovarianceSpec, SparseGpFactors};
use crate::dag::{build_reference_dag, order_reference, OrderStrategy};
use crate::error::Result;
use crate::geometry::{BarrierSet, Location};
use crate::inference::Dataset;

/// Regression settings for synthetic responses.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSpec {
    pub spec: CovarianceSpec,
    pub m: usize,
    pub order: OrderStrategy,
    /// Intercept followed by one coefficient per covariate.
    pub beta: Vec<f64>,
    pub tau2: f64,
}

/// Simulated field: the latent values and responses at every location.
#[derive(Clone, Debug, PartialEq)]
pub struct Simulated {
    pub data: Dataset,
    pub w: Vec<f64>,
}

/// Draw `w` from the DAG process and responses `beta0 + x' beta1 + w + e`
/// with i.i.d. standard normal covariates.
///
/// The locations listed in `reference` form the reference set; `w` there is
/// an ancestral draw along the graph. Every other location gets an
/// independent draw from its conditional given its own neighbors, which is
/// how the process is defined off the reference set.
pub fn simulate(
    locations: &[Location],
    reference: &[usize],
    barriers: &BarrierSet,
    sim: &SimulationSpec,
    seed: u64,
) -> Result<Simulated> {
    let refs: Vec<Location> = reference.iter().map(|&i| locations[i]).collect();
    let ordering = order_reference(&refs, sim.order.clone())?;
    let perm = ordering.permutation.clone();
    let dag = build_reference_dag(&refs, ordering, sim.m, barriers)?;
    let f = SparseGpFactors::compute(&dag, &sim.spec)?;
    let w_dag = sample_prior_w(&f, seed);
    let mut w = vec![f64::NAN; locations.len()];
    for (pos, &r) in perm.iter().enumerate() {
        w[reference[r]] = w_dag[pos];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    for (i, l) in locations.iter().enumerate() {
        if !w[i].is_nan() {
            continue;
        }
        let a = f.loading(&dag, l)?;
        let z: f64 = StandardNormal.sample(&mut rng);
        w[i] = a.entries.iter().map(|&(j, c)| c * w_dag[j]).sum::<f64>() + a.extra.sqrt() * z;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let p = sim.beta.len().saturating_sub(1);
    let mut covariates = Vec::with_capacity(locations.len());
    let mut response = Vec::with_capacity(locations.len());
    for wi in &w {
        let x: Vec<f64> = (0..p).map(|_| StandardNormal.sample(&mut rng)).collect();
        let e: f64 = StandardNormal.sample(&mut rng);
        let mu = sim.beta[0] + x.iter().zip(&sim.beta[1..]).map(|(a, b)| a * b).sum::<f64>();
        response.push(mu + wi + sim.tau2.sqrt() * e);
        covariates.push(x);
    }
    Ok(Simulated {
        data: Dataset::new(locations.to_vec(), response, covariates)?,
        w,
    })
}

/// `n x n` grid over `[lo, hi]^2`, `x` varying fastest.
pub fn square_grid(lo: f64, hi: f64, n: usize) -> Vec<Location> {
    let step = (hi - lo) / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for iy in 0..n {
        for ix in 0..n {
            out.push(Location::new(lo + step * ix as f64, lo + step * iy as f64));
        }
    }
    out
}
