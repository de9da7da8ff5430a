use crate::covariance::CovarianceSpec;
use crate::error::{Error, Result};
use crate::inference::stats::{design, mean, ols};
use crate::inference::Dataset;

/// Binned semivariances of regression residuals.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalVariogram {
    pub centers: Vec<f64>,
    pub gamma: Vec<f64>,
    pub counts: Vec<usize>,
    /// Largest distance between any two data locations.
    pub max_pair_distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariogramFit {
    pub tau2: f64,
    pub sigma2: f64,
    pub phi: f64,
    pub nu: f64,
    /// Weighted sum of squares at the fitted parameters.
    pub objective: f64,
}

/// Semivariances of residuals in `n_bins` equal-width bins on `(0, max_dist]`.
///
/// Residuals are `y - mean(y)` without covariates and least-squares
/// residuals otherwise. `max_dist` defaults to half the largest pairwise
/// distance. Empty bins are dropped.
pub fn empirical_variogram(data: &Dataset, n_bins: usize, max_dist: Option<f64>) -> Result<EmpiricalVariogram> {
    let n = data.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    if n_bins == 0 {
        return Err(Error::InvalidConfig("need at least one variogram bin".into()));
    }
    let resid: Vec<f64> = if data.p() == 0 {
        let m = mean(&data.response);
        data.response.iter().map(|y| y - m).collect()
    } else {
        let x = design(&data.covariates, n);
        let b = ols(&x, &data.response)?;
        (0..n)
            .map(|i| data.response[i] - (0..b.len()).map(|j| x[(i, j)] * b[j]).sum::<f64>())
            .collect()
    };
    let locs = &data.locations;
    let mut dmax: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            dmax = dmax.max(locs[i].dist(&locs[j]));
        }
    }
    let max_dist = max_dist.unwrap_or(dmax / 2.0);
    if !(max_dist > 0.0) {
        return Err(Error::DegenerateBins(format!("maximum distance {max_dist}")));
    }
    let width = max_dist / n_bins as f64;
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for i in 0..n {
        for j in 0..i {
            let d = locs[i].dist(&locs[j]);
            if d == 0.0 || d > max_dist {
                continue;
            }
            let b = ((d / width).ceil() as usize).clamp(1, n_bins) - 1;
            let r = resid[i] - resid[j];
            sums[b] += r * r;
            counts[b] += 1;
        }
    }
    let mut out = EmpiricalVariogram {
        centers: Vec::new(),
        gamma: Vec::new(),
        counts: Vec::new(),
        max_pair_distance: dmax,
    };
    for b in 0..n_bins {
        if counts[b] > 0 {
            out.centers.push((b as f64 + 0.5) * width);
            out.gamma.push(sums[b] / (2.0 * counts[b] as f64));
            out.counts.push(counts[b]);
        }
    }
    Ok(out)
}

/// Distance at which the unit-sill correlation with smoothness `nu` and
/// unit decay drops to `level`.
pub fn range_distance(nu: f64, level: f64) -> f64 {
    let k = CovarianceSpec::matern(1.0, 1.0, nu).kernel();
    let (mut lo, mut hi) = (0.0, 1.0);
    while k.corr(hi) > level {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if k.corr(mid) > level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Decay bounds putting correlation 0.05 at 0.75 and 0.25 of `max_distance`.
pub fn phi_bounds(max_distance: f64, nu: f64) -> (f64, f64) {
    let x = range_distance(nu, 0.05);
    (x / (0.75 * max_distance), x / (0.25 * max_distance))
}

/// Best nonnegative `(tau2, sigma2)` for fixed `phi`, and the objective.
fn profile(emp: &EmpiricalVariogram, nu: f64, phi: f64) -> (f64, f64, f64) {
    let k = CovarianceSpec::matern(1.0, phi, nu).kernel();
    let g: Vec<f64> = emp.centers.iter().map(|&h| 1.0 - k.corr(h)).collect();
    let w: Vec<f64> = emp.counts.iter().map(|&c| c as f64).collect();
    let y = &emp.gamma;
    let (mut s1, mut sg, mut sgg, mut sy, mut sgy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for b in 0..g.len() {
        s1 += w[b];
        sg += w[b] * g[b];
        sgg += w[b] * g[b] * g[b];
        sy += w[b] * y[b];
        sgy += w[b] * g[b] * y[b];
    }
    let obj = |t: f64, s: f64| -> f64 {
        (0..g.len())
            .map(|b| {
                let r = y[b] - t - s * g[b];
                w[b] * r * r
            })
            .sum()
    };
    let mut cands = vec![(0.0, 0.0), (sy / s1, 0.0)];
    if sgg > 0.0 {
        cands.push((0.0, (sgy / sgg).max(0.0)));
    }
    let det = s1 * sgg - sg * sg;
    if det > 1e-300 * s1 * sgg {
        let t = (sgg * sy - sg * sgy) / det;
        let s = (s1 * sgy - sg * sy) / det;
        if t >= 0.0 && s >= 0.0 {
            cands.push((t, s));
        }
    }
    cands
        .into_iter()
        .map(|(t, s)| (t.max(0.0), s.max(0.0), obj(t.max(0.0), s.max(0.0))))
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .expect("candidate list is never empty")
}

const START_GRID: usize = 41;

/// Weighted least-squares Matérn fit with fixed smoothness.
///
/// For each decay the two variance parameters enter linearly and are solved
/// exactly under nonnegativity; the decay is searched over a log grid in
/// `phi_range` (default [`phi_bounds`] of the data extent) and refined by
/// golden-section search around the best grid point.
pub fn fit_matern_variogram(emp: &EmpiricalVariogram, nu: f64, phi_range: Option<(f64, f64)>) -> Result<VariogramFit> {
    if emp.centers.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: emp.centers.len(),
        });
    }
    let first = emp.centers[0];
    if emp.centers.iter().all(|&c| (c - first).abs() <= 1e-12 * first.abs()) {
        return Err(Error::DegenerateBins("all bin distances are identical".into()));
    }
    let (lo, hi) = phi_range.unwrap_or_else(|| phi_bounds(emp.max_pair_distance, nu));
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidConfig(format!("decay search range ({lo}, {hi})")));
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let f = |lp: f64| profile(emp, nu, lp.exp());
    let grid: Vec<f64> = (0..START_GRID)
        .map(|i| llo + (lhi - llo) * i as f64 / (START_GRID - 1) as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&g| f(g).2).collect();
    let best = (0..START_GRID).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(START_GRID - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c).2;
    let mut fd = f(d).2;
    for _ in 0..200 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c).2;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d).2;
        }
    }
    let mut lp = 0.5 * (a + b);
    let mut sol = f(lp);
    if vals[best] < sol.2 {
        lp = grid[best];
        sol = f(lp);
    }
    Ok(VariogramFit {
        tau2: sol.0,
        sigma2: sol.1,
        phi: lp.exp(),
        nu,
        objective: sol.2,
    })
}
