//! Symmetric banded storage and a banded Cholesky factorization.

use crate::error::{Error, Result};

/// Symmetric matrix with half-bandwidth `b`: entries with `|i - j| > b` are zero.
/// Only the lower band is stored, row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymmetricMatrix {
    n: usize,
    b: usize,
    // row i holds A[i][i-b..=i] at data[i*(b+1)..(i+1)*(b+1)], diagonal last
    data: Vec<f64>,
}

impl BandedSymmetricMatrix {
    pub fn zeros(n: usize, half_bandwidth: usize) -> Self {
        Self { n, b: half_bandwidth, data: vec![0.0; n * (half_bandwidth + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.b
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        (hi - lo <= self.b && hi < self.n).then(|| hi * (self.b + 1) + self.b - (hi - lo))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Adds `v` to the symmetric pair `(i, j)`, `(j, i)`.
    ///
    /// Panics when `(i, j)` lies outside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).unwrap_or_else(|| panic!("entry ({i}, {j}) outside band {}", self.b));
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * (self.b + 1)..(i + 1) * (self.b + 1)];
            let j0 = i.saturating_sub(self.b);
            for j in j0..i {
                let a = row[self.b - (i - j)];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += row[self.b] * x[i];
        }
        y
    }

    /// `x^T A x`
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// `sum_k w_k A_k` over matrices of equal shape.
    pub fn combination(terms: &[(f64, &BandedSymmetricMatrix)]) -> Self {
        let first = terms.first().expect("at least one term").1;
        let mut out = Self::zeros(first.n, first.b);
        for (w, m) in terms {
            assert!(m.n == first.n && m.b == first.b, "shape mismatch");
            for (o, v) in out.data.iter_mut().zip(&m.data) {
                *o += w * v;
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Lower-triangle entries `(i, j, value)` with `i >= j`, including explicit zeros
    /// inside the band.
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i.saturating_sub(self.b)..=i).map(move |j| (i, j, self.get(i, j)))
        })
    }
}

/// `A = L L^T` with `L` lower banded, same half-bandwidth as `A`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    n: usize,
    b: usize,
    l: Vec<f64>,
}

impl BandedCholesky {
    pub fn factor(a: &BandedSymmetricMatrix, context: &'static str) -> Result<Self> {
        let (n, b) = (a.n, a.b);
        let w = b + 1;
        let mut l = a.data.clone();
        // l[i*w + b - (i-j)] = L[i][j]
        for j in 0..n {
            let j0 = j.saturating_sub(b);
            let mut d = l[j * w + b];
            for k in j0..j {
                let ljk = l[j * w + b - (j - k)];
                d -= ljk * ljk;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { context, pivot: j, value: d });
            }
            let d = d.sqrt();
            l[j * w + b] = d;
            for i in j + 1..(j + w).min(n) {
                let i0 = i.saturating_sub(b);
                let mut s = l[i * w + b - (i - j)];
                for k in i0.max(j0)..j {
                    s -= l[i * w + b - (i - k)] * l[j * w + b - (j - k)];
                }
                l[i * w + b - (i - j)] = s / d;
            }
        }
        Ok(Self { n, b, l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        let (b, w) = (self.b, self.b + 1);
        for i in 0..self.n {
            let mut s = x[i];
            for k in i.saturating_sub(b)..i {
                s -= self.l[i * w + b - (i - k)] * x[k];
            }
            x[i] = s / self.l[i * w + b];
        }
        for i in (0..self.n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + w).min(self.n) {
                s -= self.l[k * w + b - (k - i)] * x[k];
            }
            x[i] = s / self.l[i * w + b];
        }
    }
}
