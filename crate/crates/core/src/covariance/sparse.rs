use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Symmetric sparse matrix stored as its lower triangle in row-major
/// compressed form (column indices ascending within each row).
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricSparse {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymmetricSparse {
    /// Build from `(row, col, value)` triplets; either triangle may be given
    /// and duplicates are summed.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (r, c, v) in triplets {
            let key = if r >= c { (r, c) } else { (c, r) };
            *acc.entry(key).or_insert(0.0) += v;
        }
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(acc.len());
        let mut vals = Vec::with_capacity(acc.len());
        for (&(r, c), &v) in &acc {
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SymmetricSparse { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored (lower-triangle) entries.
    pub fn stored(&self) -> usize {
        self.vals.len()
    }

    /// Nonzeros of the full symmetric matrix.
    pub fn nnz(&self) -> usize {
        let diag = (0..self.n)
            .filter(|&i| self.row(i).any(|(c, _)| c == i))
            .count();
        2 * self.vals.len() - diag
    }

    /// Lower-triangle entries of row `i` as `(col, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                y[i] += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        d
    }

    /// Add `shift[i]` to each diagonal entry.
    pub fn add_diagonal(&self, shift: &[f64]) -> Self {
        let trip = (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .chain(shift.iter().enumerate().map(|(i, &s)| (i, i, s)));
        Self::from_triplets(self.n, trip.collect::<Vec<_>>())
    }

    /// Envelope (profile) Cholesky factorization.
    pub fn cholesky(&self) -> Result<EnvelopeCholesky> {
        EnvelopeCholesky::factor(self)
    }
}

/// Lower Cholesky factor stored by rows from the first nonzero column of
/// each row of the input to the diagonal. Fill-in stays inside that profile.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    fn factor(a: &SymmetricSparse) -> Result<Self> {
        let n = a.n;
        let first: Vec<usize> = (0..n).map(|i| a.row(i).map(|(c, _)| c).min().unwrap_or(i).min(i)).collect();
        let mut start = vec![0; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for i in 0..n {
            for (j, v) in a.row(i) {
                data[start[i] + j - first[i]] = v;
            }
        }
        let at = |first: &[usize], start: &[usize], i: usize, j: usize| start[i] + j - first[i];
        for i in 0..n {
            for j in first[i]..=i {
                let lo = first[i].max(first[j]);
                let mut s = data[at(&first, &start, i, j)];
                let ri = at(&first, &start, i, lo);
                let rj = at(&first, &start, j, lo);
                for t in 0..(j - lo) {
                    s -= data[ri + t] * data[rj + t];
                }
                if j < i {
                    s /= data[at(&first, &start, j, j)];
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i });
                    }
                    s = s.sqrt();
                }
                data[at(&first, &start, i, j)] = s;
            }
        }
        Ok(EnvelopeCholesky { first, start, data })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    fn l(&self, i: usize, j: usize) -> f64 {
        self.data[self.start[i] + j - self.first[i]]
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in self.first[i]..i {
                s -= self.l(i, j) * y[j];
            }
            y[i] = s / self.l(i, i);
        }
        for i in (0..n).rev() {
            y[i] /= self.l(i, i);
            let yi = y[i];
            for j in self.first[i]..i {
                y[j] -= self.l(i, j) * yi;
            }
        }
        y
    }

    /// `log det A`.
    pub fn log_det(&self) -> f64 {
        (0..self.dim()).map(|i| 2.0 * self.l(i, i).ln()).sum()
    }
}
