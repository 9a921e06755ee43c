//! Dense real symmetric matrices.

use crate::error::{Error, Result};
use alloc::vec::Vec;
use num_complex::Complex64;

/// Real symmetric matrix in full row-major storage. Entries are only ever
/// written in mirrored pairs, so `H = H^T` holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        let elements = n.checked_mul(n).ok_or(Error::Allocation { elements: usize::MAX })?;
        let mut data = Vec::new();
        data.try_reserve_exact(elements).map_err(|_| Error::Allocation { elements })?;
        data.resize(elements, 0.0);
        Ok(Self { n, data })
    }

    /// Builds the matrix from its lower triangle, `f(i, j)` with `j <= i`,
    /// visited row by row.
    pub fn from_lower(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_lower(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Self::from_lower(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let x = self.get(i, j) + v;
        self.set(i, j, x);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Raw storage for in-place reductions that keep only one triangle current.
    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).to_bits() == self.get(j, i).to_bits()))
    }

    /// Row-major lower triangle, diagonal included.
    pub fn lower_triangle(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).flat_map(move |i| (0..=i).map(move |j| self.get(i, j)))
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    pub fn matvec_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (h, v) in self.row(i).iter().zip(x) {
                acc += v * h;
            }
            *yi = acc;
        }
    }

    /// Spectral norm estimate by power iteration from a fixed start vector.
    pub fn norm_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * libm::sin(1.0 + i as f64)).collect();
        let mut y = alloc::vec![0.0; n];
        let mut estimate = 0.0;
        for _ in 0..200 {
            let nx = libm::sqrt(dot(&x, &x));
            if nx == 0.0 {
                break;
            }
            x.iter_mut().for_each(|v| *v /= nx);
            self.matvec(&x, &mut y);
            let ny = libm::sqrt(dot(&y, &y));
            let done = (ny - estimate).abs() <= 1e-6 * ny;
            estimate = ny;
            core::mem::swap(&mut x, &mut y);
            if done {
                break;
            }
        }
        // a start vector orthogonal to the top eigenvector can only underestimate
        let max_abs = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        estimate.max(max_abs)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
