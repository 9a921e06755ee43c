//! Eigen-decomposition of symmetric tridiagonal matrices by implicit QL.

use crate::error::{Error, Result};
use alloc::vec::Vec;

/// Eigenvalues (ascending) and eigenvectors of a symmetric tridiagonal matrix.
///
/// Eigenvectors are stored as rows: `vector(k)[n]` is the component `U_{nk}`.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    values: Vec<f64>,
    vectors: Vec<f64>,
    dim: usize,
}

const MAX_SWEEPS: usize = 64;

impl TridiagEigen {
    /// Decomposes the matrix with diagonal `d` and off-diagonal `e`
    /// (`e.len() + 1 == d.len()`).
    pub fn new(d: &[f64], e: &[f64]) -> Result<Self> {
        let n = d.len();
        if n == 0 {
            return Err(Error::Domain("empty tridiagonal matrix".into()));
        }
        if e.len() + 1 != n {
            return Err(Error::DimensionMismatch { expected: n - 1, found: e.len() });
        }
        let mut d = d.to_vec();
        let mut off = e.to_vec();
        off.push(0.0);
        let mut z = alloc::vec![0.0; n * n];
        for k in 0..n {
            z[k * n + k] = 1.0;
        }
        ql_implicit(&mut d, &mut off, &mut z, n)?;

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
        let values = order.iter().map(|&i| d[i]).collect();
        let mut vectors = Vec::with_capacity(n * n);
        for &i in &order {
            vectors.extend_from_slice(&z[i * n..(i + 1) * n]);
        }
        Ok(Self { values, vectors, dim: n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvector `k` in the original basis.
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    /// `U_{0k}` for all `k`: overlaps of the first basis vector with each eigenvector.
    pub fn first_components(&self) -> Vec<f64> {
        (0..self.dim).map(|k| self.vectors[k * self.dim]).collect()
    }
}

/// Implicit QL with Wilkinson-type shifts. `z` holds eigenvectors as rows, so
/// each Givens rotation touches two contiguous rows.
fn ql_implicit(d: &mut [f64], e: &mut [f64], z: &mut [f64], n: usize) -> Result<()> {
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence { index: l });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let (lo, hi) = z.split_at_mut((i + 1) * n);
                let zi = &mut lo[i * n..];
                let zj = &mut hi[..n];
                for (x, y) in zi.iter_mut().zip(zj.iter_mut()) {
                    let f = *y;
                    *y = s * *x + c * f;
                    *x = c * *x - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_level() {
        let eig = TridiagEigen::new(&[0.0, 0.0], &[1.0]).unwrap();
        assert!((eig.values()[0] + 1.0).abs() < 1e-15);
        assert!((eig.values()[1] - 1.0).abs() < 1e-15);
        let v = eig.vector(1);
        assert!((v[0].abs() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((v[0] - v[1]).abs() < 1e-15);
    }

    #[test]
    fn reconstructs_matrix() {
        let d = [1.0, -2.0, 0.5, 3.0, 0.0];
        let e = [0.7, 1.1, 0.2, 2.5];
        let eig = TridiagEigen::new(&d, &e).unwrap();
        let n = d.len();
        for i in 0..n {
            for j in 0..n {
                let t: f64 = (0..n).map(|k| eig.vector(k)[i] * eig.values()[k] * eig.vector(k)[j]).sum();
                let expected = if i == j {
                    d[i]
                } else if i + 1 == j {
                    e[i]
                } else if j + 1 == i {
                    e[j]
                } else {
                    0.0
                };
                assert!((t - expected).abs() < 1e-13, "({i},{j}) {t} vs {expected}");
            }
        }
    }

    #[test]
    fn scalar_and_bad_shapes() {
        let eig = TridiagEigen::new(&[4.0], &[]).unwrap();
        assert_eq!(eig.values(), &[4.0]);
        assert_eq!(eig.first_components(), [1.0]);
        assert!(TridiagEigen::new(&[], &[]).is_err());
        assert!(TridiagEigen::new(&[1.0, 2.0], &[]).is_err());
    }
}
