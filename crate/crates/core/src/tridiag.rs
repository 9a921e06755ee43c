//! Tridiagonalisation of `(H, psi_0)` pairs in the Krylov basis of `psi_0`.

use crate::coeffs::LanczosCoefficients;
use crate::error::{Error, Result};
use crate::hamiltonians::{SectorHamiltonian, StateVector};
use crate::matrix::{dot, SymMatrix};
use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Residual norms below `EXHAUSTION * ||H||` end the Krylov chain.
pub const EXHAUSTION: f64 = 1e-12;

/// Allowed deviation of `||psi_0||` from one.
const NORM_SLACK: f64 = 1e-10;

/// Orthonormal Krylov vectors, one row per level.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovBasis {
    pub dim: usize,
    pub vectors: Vec<Vec<Complex64>>,
}

impl KrylovBasis {
    /// `max |<K_i|K_j> - delta_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, u) in self.vectors.iter().enumerate() {
            for (j, v) in self.vectors.iter().enumerate().skip(i) {
                let s = cdot(u, v);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }
}

fn check(ham: &SectorHamiltonian, psi: &StateVector) -> Result<()> {
    if ham.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: ham.dim(), found: psi.dim() });
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_SLACK {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// `<u|v>`, conjugating `u`.
fn cdot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Lanczos iteration with full re-orthogonalisation, up to depth `k`.
pub fn lanczos_tridiagonalize(ham: &SectorHamiltonian, psi: &StateVector, k: usize) -> Result<LanczosCoefficients> {
    lanczos_with_basis(ham, psi, k).map(|(lc, _)| lc)
}

/// [`lanczos_tridiagonalize`] that also returns the Krylov vectors.
pub fn lanczos_with_basis(
    ham: &SectorHamiltonian,
    psi: &StateVector,
    k: usize,
) -> Result<(LanczosCoefficients, KrylovBasis)> {
    check(ham, psi)?;
    let dim = ham.dim();
    if k == 0 || k > dim {
        return Err(Error::Domain(format!("Krylov depth must lie in 1..={dim}, got {k}")));
    }
    let tol = EXHAUSTION * ham.h.norm_estimate();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(k);
    basis.push(psi.amplitudes().to_vec());
    let mut a = Vec::with_capacity(k);
    let mut b = Vec::with_capacity(k);
    let mut w = alloc::vec![Complex64::new(0.0, 0.0); dim];
    for n in 0..k {
        ham.h.matvec_complex(&basis[n], &mut w);
        let an = cdot(&basis[n], &w).re;
        a.push(an);
        if n + 1 == k {
            break;
        }
        for (wi, vi) in w.iter_mut().zip(&basis[n]) {
            *wi -= vi * an;
        }
        if n > 0 {
            let bn: f64 = b[n - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[n - 1]) {
                *wi -= vi * bn;
            }
        }
        // two classical Gram-Schmidt passes against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let s = cdot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= vi * s;
                }
            }
        }
        let norm = libm::sqrt(w.iter().map(|x| x.norm_sqr()).sum::<f64>());
        if norm < tol {
            break;
        }
        b.push(norm);
        basis.push(w.iter().map(|x| x / norm).collect());
    }
    let lc = LanczosCoefficients::new(a, b)?;
    Ok((lc, KrylovBasis { dim, vectors: basis }))
}

/// Orthogonal reduction of `H` to tridiagonal form with `psi_0` as first basis
/// vector, by Householder reflections. Stops where the chain decouples.
pub fn householder_hessenberg(ham: &SectorHamiltonian, psi: &StateVector) -> Result<LanczosCoefficients> {
    check(ham, psi)?;
    let tol = EXHAUSTION * ham.h.norm_estimate();
    let (a, b) = reduce(&ham.h, &psi.to_real()?)?;
    let k = b.iter().position(|&x| x < tol).map_or(a.len(), |i| i + 1);
    LanczosCoefficients::new(a[..k].to_vec(), b[..k - 1].to_vec())
}

/// The complete tridiagonal form (all `N` levels, no truncation). Off-diagonal
/// entries are non-negative; an exact zero marks a decoupled block.
pub fn householder_full(ham: &SectorHamiltonian, psi: &StateVector) -> Result<(Vec<f64>, Vec<f64>)> {
    check(ham, psi)?;
    reduce(&ham.h, &psi.to_real()?)
}

fn reduce(h: &SymMatrix, psi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = h.dim();
    // working copy; only the lower triangle is kept current
    let mut m = h.clone();
    let w = &mut Vec::with_capacity(n);

    // rotate psi onto e_1
    let s = if psi[0] < 0.0 { 1.0 } else { -1.0 };
    let mut u = psi.to_vec();
    u[0] -= s;
    reflect(&mut m, 0, &u, w);

    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        a.push(m.get(k, k));
        let mut x: Vec<f64> = (k + 1..n).map(|i| m.get(i, k)).collect();
        let tail: f64 = dot(&x[1..], &x[1..]);
        if tail == 0.0 {
            b.push(x[0].abs());
            continue;
        }
        let norm = libm::sqrt(x[0] * x[0] + tail);
        let alpha = if x[0] < 0.0 { norm } else { -norm };
        x[0] -= alpha;
        reflect(&mut m, k + 1, &x, w);
        b.push(norm);
    }
    a.push(m.get(n - 1, n - 1));
    Ok((a, b))
}

/// Applies `P A P` with `P = I - 2 u u^T / u^T u` acting on indices `start..n`,
/// updating the lower triangle of the trailing block. The column left of the
/// block is not touched; callers read it before reflecting.
fn reflect(m: &mut SymMatrix, start: usize, u: &[f64], p: &mut Vec<f64>) {
    let n = m.dim();
    let len = n - start;
    let uu = dot(u, u);
    if uu == 0.0 {
        return;
    }
    let beta = 2.0 / uu;
    // p = beta A u from the lower triangle: row i gives one dot and one axpy
    p.clear();
    p.resize(len, 0.0);
    let data = m.as_mut_slice();
    for i in 0..len {
        let row = &data[(start + i) * n + start..(start + i) * n + start + i + 1];
        let ui = u[i];
        let mut acc = 0.0;
        for (j, &hij) in row[..i].iter().enumerate() {
            acc += hij * u[j];
            p[j] += hij * ui;
        }
        p[i] += acc + row[i] * ui;
    }
    p.iter_mut().for_each(|x| *x *= beta);
    let kappa = 0.5 * beta * dot(u, p);
    // w = p - kappa u, then A -= u w^T + w u^T
    p.iter_mut().zip(u).for_each(|(x, ui)| *x -= kappa * ui);
    for i in 0..len {
        let row = &mut data[(start + i) * n + start..(start + i) * n + start + i + 1];
        let (ui, wi) = (u[i], p[i]);
        for (j, hij) in row.iter_mut().enumerate() {
            *hij -= ui * p[j] + wi * u[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{random_state, sample_goe};

    fn ham(rows: &[&[f64]]) -> SectorHamiltonian {
        SectorHamiltonian::from_matrix(SymMatrix::from_lower(rows.len(), |i, j| rows[i][j]).unwrap())
    }

    #[test]
    fn pauli_x() {
        let h = ham(&[&[0.0], &[1.0, 0.0]]);
        let psi = StateVector::basis(2, 0).unwrap();
        let lc = lanczos_tridiagonalize(&h, &psi, 2).unwrap();
        assert_eq!((lc.a(), lc.b()), (&[0.0, 0.0][..], &[1.0][..]));
        let hh = householder_hessenberg(&h, &psi).unwrap();
        assert_eq!(hh, lc);
    }

    #[test]
    fn uniform_state_on_three_levels() {
        let h = SectorHamiltonian::from_matrix(SymMatrix::diagonal(&[-1.0, 0.0, 1.0]).unwrap());
        let psi = StateVector::normalized(&[1.0, 1.0, 1.0]).unwrap();
        let lc = lanczos_tridiagonalize(&h, &psi, 3).unwrap();
        assert!((lc.b1() - libm::sqrt(2.0 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn identity_exhausts_at_once() {
        let h = SectorHamiltonian::from_matrix(SymMatrix::identity(4).unwrap());
        let psi = random_state(4, 5).unwrap();
        let lc = lanczos_tridiagonalize(&h, &psi, 4).unwrap();
        assert_eq!(lc.dim(), 1);
        assert!((lc.a()[0] - 1.0).abs() < 1e-15);
        assert_eq!(householder_hessenberg(&h, &psi).unwrap().dim(), 1);
    }

    #[test]
    fn methods_agree_on_goe() {
        let h = sample_goe(40, 9).unwrap();
        let psi = random_state(40, 10).unwrap();
        let (l, basis) = lanczos_with_basis(&h, &psi, 40).unwrap();
        let hh = householder_hessenberg(&h, &psi).unwrap();
        assert_eq!(l.dim(), hh.dim());
        for (x, y) in l.a().iter().zip(hh.a()).chain(l.b().iter().zip(hh.b())) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
        assert!(basis.orthonormality_error() < 1e-10);
    }

    #[test]
    fn preconditions() {
        let h = sample_goe(4, 1).unwrap();
        let psi = random_state(3, 1).unwrap();
        assert!(matches!(lanczos_tridiagonalize(&h, &psi, 2), Err(Error::DimensionMismatch { .. })));
        let psi = random_state(4, 1).unwrap();
        assert!(lanczos_tridiagonalize(&h, &psi, 5).is_err());
        let phased = StateVector::new(alloc::vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .unwrap();
        assert_eq!(householder_hessenberg(&h, &phased), Err(Error::ComplexState));
        assert!(lanczos_tridiagonalize(&h, &phased, 4).is_ok());
    }
}
