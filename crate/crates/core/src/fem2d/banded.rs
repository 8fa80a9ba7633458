//! Symmetric positive-definite band matrices and their Cholesky factors.
//!
//! Row `i` keeps the `bw + 1` entries of the lower triangle in columns
//! `i - bw ..= i`; entries left of column 0 are padding and stay zero.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw, "({i}, {j}) outside band {}", self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    /// Adds `v` at `(i, j)`; either triangle may be addressed.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let s = self.slot(r, c);
        self.data[s] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r - c > self.bw {
            0.0
        } else {
            self.data[self.slot(r, c)]
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            for j in lo..i {
                let a = self.data[self.slot(i, j)];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += self.data[self.slot(i, i)] * x[i];
        }
        y
    }

    /// In-place Cholesky factorization `A = L Lᵀ`.
    pub fn factor(mut self) -> Result<BandCholesky> {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        let data = &mut self.data;
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row_i = i * w;
            for j in lo..=i {
                let row_j = j * w;
                let k0 = lo.max(j.saturating_sub(bw));
                // Columns k0..j of rows i and j.
                let a = &data[row_i + (k0 + bw - i)..row_i + (j + bw - i)];
                let b = &data[row_j + (k0 + bw - j)..row_j + bw];
                let s = data[row_i + (j + bw - i)] - dot(a, b);
                if j < i {
                    data[row_i + (j + bw - i)] = s / data[row_j + bw];
                } else {
                    if !(s > 0.0) {
                        return Err(Error::SolverFailure(format!(
                            "matrix not positive definite at pivot {i} (value {s:e})"
                        )));
                    }
                    data[row_i + bw] = s.sqrt();
                }
            }
        }
        Ok(BandCholesky {
            n,
            bw,
            data: self.data,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        assert_eq!(x.len(), n);
        // L y = b
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let row = &self.data[i * w..(i + 1) * w];
            let s = x[i] - dot(&row[lo + bw - i..bw], &x[lo..i]);
            x[i] = s / row[bw];
        }
        // Lᵀ x = y
        for i in (0..n).rev() {
            let row = &self.data[i * w..(i + 1) * w];
            x[i] /= row[bw];
            let xi = x[i];
            let lo = i.saturating_sub(bw);
            for (xj, l) in x[lo..i].iter_mut().zip(&row[lo + bw - i..bw]) {
                *xj -= l * xi;
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Four-way unrolled dot product; fixed summation order keeps results
/// reproducible.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}
