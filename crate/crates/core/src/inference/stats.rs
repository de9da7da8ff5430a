//! Small numerical helpers shared by the sampler and the summaries.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample standard deviation (denominator n - 1; 0 for a single value).
pub fn sd(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64).sqrt()
}

/// Type-7 (linear interpolation) quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn quantile(x: &[f64], p: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    quantile_sorted(&s, p)
}

/// Effective sample size by Geyer's initial monotone positive sequence,
/// clamped to `[1, n]`.
pub fn ess(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return n.max(1) as f64;
    }
    let m = mean(x);
    let c: Vec<f64> = x.iter().map(|v| v - m).collect();
    let acov = |lag: usize| c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let g0 = acov(0);
    if !(g0 > 0.0) {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut j = 0;
    while 2 * j + 1 < n {
        let pair = acov(2 * j) + acov(2 * j + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev);
        sum += pair;
        prev = pair;
        j += 1;
    }
    let tau = (2.0 * sum - g0) / g0;
    (n as f64 / tau).clamp(1.0, n as f64)
}

/// Design matrix with a leading intercept column.
pub fn design(covariates: &[Vec<f64>], n: usize) -> DMatrix<f64> {
    let p = covariates.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { covariates[i][j - 1] })
}

/// Cholesky factor of a Gram matrix, rejecting numerically singular ones.
pub fn full_rank_cholesky(gram: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let scale = gram.diagonal().max();
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::DimensionMismatch("design matrix is rank deficient".into()))?;
    let l = chol.l_dirty();
    if (0..l.nrows()).any(|i| !(l[(i, i)] * l[(i, i)] > 1e-12 * scale)) {
        return Err(Error::DimensionMismatch("design matrix is rank deficient".into()));
    }
    Ok(chol)
}

/// Least-squares coefficients of `y` on `x`.
pub fn ols(x: &DMatrix<f64>, y: &[f64]) -> Result<Vec<f64>> {
    if x.nrows() < x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations for {} regression coefficients",
            x.nrows(),
            x.ncols()
        )));
    }
    let xtx = x.transpose() * x;
    let xty = x.transpose() * DVector::from_column_slice(y);
    let chol = full_rank_cholesky(xtx)?;
    Ok(chol.solve(&xty).as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn five_element_chain() {
        let x = [3.0, 1.0, 4.0, 1.0, 5.0];
        assert_eq!(mean(&x), 2.8);
        assert!((sd(&x) - 1.788_854_381_999_831_8).abs() < 1e-15);
        // sorted 1 1 3 4 5; type 7: h = 4p
        assert_eq!(quantile(&x, 0.5), 3.0);
        assert!((quantile(&x, 0.025) - 1.0).abs() < 1e-15);
        assert!((quantile(&x, 0.975) - 4.9).abs() < 1e-12);
        assert!((quantile(&x, 0.3) - 1.4).abs() < 1e-12);
    }

    #[test]
    fn ess_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let iid: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let e = ess(&iid);
        assert!((8_000.0..=10_000.0).contains(&e), "{e}");
        assert_eq!(ess(&[2.0; 500]), 1.0);
        // AR(1) with rho 0.9: ESS about n (1 - rho) / (1 + rho)
        let mut ar = vec![0.0; 20_000];
        for t in 1..ar.len() {
            let z: f64 = StandardNormal.sample(&mut rng);
            ar[t] = 0.9 * ar[t - 1] + z;
        }
        let e = ess(&ar);
        let want = 20_000.0 * 0.1 / 1.9;
        assert!((e / want - 1.0).abs() < 0.3, "{e} vs {want}");
    }

    #[test]
    fn least_squares() {
        let cov: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let y: Vec<f64> = (0..5).map(|i| 1.0 + 2.0 * i as f64).collect();
        let b = ols(&design(&cov, 5), &y).unwrap();
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 2.0).abs() < 1e-12);
        assert!(ols(&design(&[vec![1.0], vec![1.0]], 2), &[1.0, 2.0]).is_err());
    }
}
