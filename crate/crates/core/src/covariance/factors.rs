use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matern::{CovarianceSpec, Kernel};
use super::sparse::SymmetricSparse;
use crate::dag::NeighborDag;
use crate::error::{Error, Result};
use crate::geometry::Location;
use crate::par;

/// Diagonal jitter, relative to the partial sill, used on a second attempt
/// when a neighbor Gram matrix fails to factor.
pub const JITTER: f64 = 1e-10;

/// Conditional weights and variance of one location given its neighbors.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFactor {
    pub weights: Vec<f64>,
    pub cond_var: f64,
}

/// Pairwise distances among a node's neighbors (packed lower triangle,
/// row-major) and from the node to each neighbor.
#[derive(Clone, Debug)]
pub(crate) struct NodeDistances {
    gram: Vec<f64>,
    target: Vec<f64>,
}

impl NodeDistances {
    pub(crate) fn new(target: &Location, nbrs: &[Location]) -> Self {
        let n = nbrs.len();
        let mut gram = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in 0..=i {
                gram.push(nbrs[i].dist(&nbrs[j]));
            }
        }
        NodeDistances {
            gram,
            target: nbrs.iter().map(|p| target.dist(p)).collect(),
        }
    }
}

/// Unit-sill factor from cached distances; `None` if the Gram matrix stays
/// singular after jitter.
pub(crate) fn factor_from_distances(kernel: &Kernel, d: &NodeDistances) -> Option<LocalFactor> {
    let n = d.target.len();
    if n == 0 {
        return Some(LocalFactor {
            weights: Vec::new(),
            cond_var: 1.0,
        });
    }
    let at = |i: usize, j: usize| i * (i + 1) / 2 + j;
    let g: Vec<f64> = d.gram.iter().map(|&h| kernel.corr(h)).collect();
    let c: Vec<f64> = d.target.iter().map(|&h| kernel.corr(h)).collect();
    let mut l = vec![0.0; g.len()];
    let mut z = vec![0.0; n];
    'attempt: for jitter in [0.0, JITTER] {
        for i in 0..n {
            for j in 0..=i {
                let mut s = g[at(i, j)];
                for k in 0..j {
                    s -= l[at(i, k)] * l[at(j, k)];
                }
                if i == j {
                    s += jitter;
                    if !(s > 0.0) {
                        continue 'attempt;
                    }
                    l[at(i, i)] = s.sqrt();
                } else {
                    l[at(i, j)] = s / l[at(j, j)];
                }
            }
        }
        for i in 0..n {
            let mut s = c[i];
            for k in 0..i {
                s -= l[at(i, k)] * z[k];
            }
            z[i] = s / l[at(i, i)];
        }
        let v = 1.0 - z.iter().map(|x| x * x).sum::<f64>();
        if !(v > 0.0 && v.is_finite()) {
            continue;
        }
        let mut w = z.clone();
        for i in (0..n).rev() {
            let mut s = w[i];
            for k in i + 1..n {
                s -= l[at(k, i)] * w[k];
            }
            w[i] = s / l[at(i, i)];
        }
        return Some(LocalFactor {
            weights: w,
            cond_var: v.min(1.0),
        });
    }
    None
}

/// Unit-sill factor; `None` if the Gram matrix stays singular after jitter.
pub(crate) fn unit_factor(kernel: &Kernel, target: &Location, nbrs: &[Location]) -> Option<LocalFactor> {
    factor_from_distances(kernel, &NodeDistances::new(target, nbrs))
}

/// Weights `C_{s,[s]} C_{[s]}^{-1}` and variance `C_s - C_{s,[s]} C_{[s]}^{-1} C_{[s],s}`.
pub fn local_factors(target: &Location, nbrs: &[Location], spec: &CovarianceSpec) -> Result<LocalFactor> {
    spec.validate()?;
    let f = unit_factor(&spec.unit().kernel(), target, nbrs).ok_or(Error::SingularNeighborGram { node: None })?;
    Ok(LocalFactor {
        weights: f.weights,
        cond_var: spec.sigma2 * f.cond_var,
    })
}

/// Loading of a location on the reference process: a sparse row `a` with
/// `w(s) = a . w_R + e`, `Var(e) = extra`.
#[derive(Clone, Debug, PartialEq)]
pub struct Loading {
    pub entries: Vec<(usize, f64)>,
    pub extra: f64,
}

/// Per-node factors over a DAG plus the sparse precision they induce.
///
/// Weights depend only on the correlation parameters; variances are kept
/// on the unit-sill scale and multiplied by `sigma2` on access.
#[derive(Debug)]
pub struct SparseGpFactors {
    spec: CovarianceSpec,
    neighbors: Vec<Vec<usize>>,
    weights: Vec<Vec<f64>>,
    unit_var: Vec<f64>,
    precision: OnceLock<SymmetricSparse>,
    memo: Mutex<HashMap<(u64, u64), Arc<Loading>>>,
    /// Per-node distances and original indices, shared between clones.
    geometry: Arc<(Vec<NodeDistances>, Vec<usize>)>,
}

impl Clone for SparseGpFactors {
    fn clone(&self) -> Self {
        SparseGpFactors {
            spec: self.spec,
            neighbors: self.neighbors.clone(),
            weights: self.weights.clone(),
            unit_var: self.unit_var.clone(),
            precision: self.precision.clone(),
            memo: Mutex::new(HashMap::new()),
            geometry: Arc::clone(&self.geometry),
        }
    }
}

impl SparseGpFactors {
    /// Compute all local factors (in parallel); the precision is assembled lazily.
    pub fn compute(dag: &NeighborDag, spec: &CovarianceSpec) -> Result<Self> {
        spec.validate()?;
        let refs = dag.refs();
        let dists = par::map_range(dag.len(), |i| {
            let nb: Vec<Location> = dag.neighbors(i).iter().map(|n| refs[n.index]).collect();
            NodeDistances::new(&refs[i], &nb)
        });
        let orig = (0..dag.len()).map(|i| dag.original_index(i)).collect();
        let neighbors = (0..dag.len()).map(|i| dag.neighbor_indices(i)).collect();
        Self::from_geometry(spec, neighbors, Arc::new((dists, orig)))
    }

    fn from_geometry(
        spec: &CovarianceSpec,
        neighbors: Vec<Vec<usize>>,
        geometry: Arc<(Vec<NodeDistances>, Vec<usize>)>,
    ) -> Result<Self> {
        let kernel = spec.unit().kernel();
        let (dists, orig) = &*geometry;
        let facs = par::try_map_range(dists.len(), |i| {
            factor_from_distances(&kernel, &dists[i]).ok_or(Error::SingularNeighborGram { node: Some(orig[i]) })
        })?;
        let mut weights = Vec::with_capacity(facs.len());
        let mut unit_var = Vec::with_capacity(facs.len());
        for f in facs {
            weights.push(f.weights);
            unit_var.push(f.cond_var);
        }
        Ok(SparseGpFactors {
            spec: *spec,
            neighbors,
            weights,
            unit_var,
            precision: OnceLock::new(),
            memo: Mutex::new(HashMap::new()),
            geometry,
        })
    }

    /// Factors of the same graph under a different decay, reusing the
    /// cached neighbor distances.
    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        let spec = self.spec.with_phi(phi);
        spec.validate()?;
        Self::from_geometry(&spec, self.neighbors.clone(), Arc::clone(&self.geometry))
    }

    /// Same correlation structure with a different partial sill.
    pub fn with_sigma2(&self, sigma2: f64) -> Self {
        let mut out = self.clone();
        out.spec.sigma2 = sigma2;
        out.precision = OnceLock::new();
        out
    }

    pub fn spec(&self) -> &CovarianceSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn weights(&self, i: usize) -> &[f64] {
        &self.weights[i]
    }

    pub fn cond_var(&self, i: usize) -> f64 {
        self.spec.sigma2 * self.unit_var[i]
    }

    /// Conditional variance on the unit-sill scale.
    pub fn unit_var(&self, i: usize) -> f64 {
        self.unit_var[i]
    }

    /// Conditional mean `M_i w_[i]`.
    #[inline]
    pub fn cond_mean(&self, i: usize, w: &[f64]) -> f64 {
        self.neighbors[i]
            .iter()
            .zip(&self.weights[i])
            .map(|(&j, &a)| a * w[j])
            .sum()
    }

    /// `(I - M)^T V^{-1} (I - M)`.
    pub fn precision(&self) -> &SymmetricSparse {
        self.precision.get_or_init(|| {
            let mut trip = Vec::new();
            for i in 0..self.len() {
                let inv = 1.0 / self.cond_var(i);
                let mut row: Vec<(usize, f64)> = vec![(i, 1.0)];
                row.extend(self.neighbors[i].iter().zip(&self.weights[i]).map(|(&j, &a)| (j, -a)));
                for &(r, a) in &row {
                    for &(c, b) in &row {
                        if r >= c {
                            trip.push((r, c, a * b * inv));
                        }
                    }
                }
            }
            SymmetricSparse::from_triplets(self.len(), trip)
        })
    }

    /// `C~ v = (I - M)^{-1} V (I - M)^{-T} v` by two triangular sweeps.
    pub fn cov_mul(&self, v: &[f64]) -> Vec<f64> {
        let k = self.len();
        let mut x = v.to_vec();
        for i in (0..k).rev() {
            let xi = x[i];
            for (&j, &a) in self.neighbors[i].iter().zip(&self.weights[i]) {
                x[j] += a * xi;
            }
        }
        for (i, xi) in x.iter_mut().enumerate() {
            *xi *= self.cond_var(i);
        }
        for i in 0..k {
            x[i] += self.cond_mean(i, &x);
        }
        x
    }

    /// Column `j` of `C~`.
    pub fn cov_column(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.len()];
        e[j] = 1.0;
        self.cov_mul(&e)
    }

    /// `log p(w)` under the DAG factorization.
    pub fn log_density(&self, w: &[f64]) -> f64 {
        let ln2pi = (2.0 * std::f64::consts::PI).ln();
        (0..self.len())
            .map(|i| {
                let v = self.cond_var(i);
                let r = w[i] - self.cond_mean(i, w);
                -0.5 * (ln2pi + v.ln() + r * r / v)
            })
            .sum()
    }

    /// Ancestral draw of `w_R`, deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w = vec![0.0; self.len()];
        for i in 0..self.len() {
            let z: f64 = StandardNormal.sample(&mut rng);
            w[i] = self.cond_mean(i, &w) + self.cond_var(i).sqrt() * z;
        }
        w
    }

    /// Loading of an arbitrary location: a unit vector for reference nodes,
    /// otherwise its own neighbor weights and conditional variance.
    pub fn loading(&self, dag: &NeighborDag, s: &Location) -> Result<Arc<Loading>> {
        if let Some(i) = dag.position_of(s) {
            return Ok(Arc::new(Loading {
                entries: vec![(i, 1.0)],
                extra: 0.0,
            }));
        }
        if let Some(l) = self.memo.lock().expect("memo poisoned").get(&s.key()) {
            return Ok(Arc::clone(l));
        }
        let nb = dag.nonref_neighbors(*s)?;
        let idx = nb.indices();
        let locs: Vec<Location> = idx.iter().map(|&j| dag.refs()[j]).collect();
        let f = unit_factor(&self.spec.unit().kernel(), s, &locs).ok_or(Error::SingularNeighborGram { node: None })?;
        let l = Arc::new(Loading {
            entries: idx.into_iter().zip(f.weights).collect(),
            extra: self.spec.sigma2 * f.cond_var,
        });
        self.memo
            .lock()
            .expect("memo poisoned")
            .insert(s.key(), Arc::clone(&l));
        Ok(l)
    }

    /// Covariances between `probe` and every location in `targets` under the
    /// process induced by the DAG. One sparse sweep serves all targets.
    pub fn covariance_field(&self, dag: &NeighborDag, probe: &Location, targets: &[Location]) -> Result<Vec<f64>> {
        let a = self.loading(dag, probe)?;
        let mut v = vec![0.0; self.len()];
        for &(j, w) in &a.entries {
            v[j] += w;
        }
        let z = self.cov_mul(&v);
        targets
            .iter()
            .map(|t| {
                let b = self.loading(dag, t)?;
                let mut c: f64 = b.entries.iter().map(|&(j, w)| w * z[j]).sum();
                if t.key() == probe.key() {
                    c += b.extra;
                }
                Ok(c)
            })
            .collect()
    }

    /// Write `node,V_s,neighbor,weight` rows (node positions in visit order).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["node", "V_s", "neighbor", "weight"])?;
        for i in 0..self.len() {
            let v = self.cond_var(i).to_string();
            if self.neighbors[i].is_empty() {
                w.write_record([i.to_string(), v.clone(), String::new(), String::new()])?;
            }
            for (&j, &a) in self.neighbors[i].iter().zip(&self.weights[i]) {
                w.write_record([i.to_string(), v.clone(), j.to_string(), a.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Compute the factors of `dag` under `spec` and assemble the sparse precision.
pub fn assemble_precision(dag: &NeighborDag, spec: &CovarianceSpec) -> Result<SparseGpFactors> {
    let f = SparseGpFactors::compute(dag, spec)?;
    f.precision();
    Ok(f)
}

/// Covariance of the induced process between two arbitrary locations.
pub fn nonstationary_cov(
    s1: &Location,
    s2: &Location,
    dag: &NeighborDag,
    factors: &SparseGpFactors,
) -> Result<f64> {
    Ok(factors.covariance_field(dag, s1, std::slice::from_ref(s2))?[0])
}

/// Ancestral prior draw of `w_R`.
pub fn sample_prior_w(factors: &SparseGpFactors, seed: u64) -> Vec<f64> {
    factors.sample(seed)
}
