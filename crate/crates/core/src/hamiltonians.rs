//! Quench Hamiltonians: GOE samples and the disordered spin-1/2 ring in the
//! `S_z = 0` sector.
//!
//! Randomness: every realization owns a 64-bit seed and draws from a ChaCha20
//! generator seeded with it. An ensemble with master seed `s` uses the seeds
//! `s, s + 1, ..., s + R - 1` (wrapping), so any member can be rebuilt alone.

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::models::LdosSummary;
use crate::moments::MomentSequence;
use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

/// Largest supported chain length.
pub const MAX_SITES: usize = 20;

/// Seed of member `index` of an ensemble with master seed `master`.
pub fn realization_seed(master: u64, index: u64) -> u64 {
    master.wrapping_add(index)
}

pub fn rng_for(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinChainSpec {
    /// Number of sites, even.
    pub sites: usize,
    /// Disorder half-width: local fields are uniform in `[-h, h]`.
    pub h: f64,
    /// Strength of the nearest-neighbour exchange.
    pub g: f64,
    pub seed: u64,
}

impl SpinChainSpec {
    pub fn new(sites: usize, h: f64, seed: u64) -> Self {
        Self { sites, h, g: 1.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 || self.sites % 2 == 1 {
            return Err(Error::Domain(format!("L must be even and at least 2, got {}", self.sites)));
        }
        if self.sites > MAX_SITES {
            return Err(Error::Domain(format!("L = {} exceeds the supported maximum {MAX_SITES}", self.sites)));
        }
        if !(self.h >= 0.0) || !self.h.is_finite() {
            return Err(Error::Domain(format!("disorder h must be finite and non-negative, got {}", self.h)));
        }
        if !self.g.is_finite() {
            return Err(Error::Domain(format!("coupling g must be finite, got {}", self.g)));
        }
        Ok(())
    }

    /// `L! / ((L/2)!)^2`.
    pub fn sector_dim(&self) -> usize {
        binomial(self.sites, self.sites / 2)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Goe { seed: u64 },
    SpinChain { spec: SpinChainSpec, fields: Vec<f64> },
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorHamiltonian {
    pub h: SymMatrix,
    /// Up-spin bitmasks (site 1 is bit 0) for spin chains; `0..N` otherwise.
    pub basis: Vec<u64>,
    pub meta: Provenance,
}

impl SectorHamiltonian {
    pub fn from_matrix(h: SymMatrix) -> Self {
        let basis = (0..h.dim() as u64).collect();
        Self { h, basis, meta: Provenance::Custom }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn index_of(&self, label: u64) -> Option<usize> {
        self.basis.binary_search(&label).ok()
    }
}

/// Unit-norm state with complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

/// Allowed deviation of `<psi|psi>` from one.
pub const NORM_TOLERANCE: f64 = 1e-12;

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        let norm = libm::sqrt(amps.iter().map(|a| a.norm_sqr()).sum::<f64>());
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amps })
    }

    pub fn from_real(v: &[f64]) -> Result<Self> {
        Self::new(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Normalises `v` first.
    pub fn normalized(v: &[f64]) -> Result<Self> {
        let n = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotNormalized { norm: n });
        }
        Self::from_real(&v.iter().map(|x| x / n).collect::<Vec<_>>())
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: index });
        }
        let mut amps = alloc::vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>())
    }

    /// Real amplitudes after removing a global phase, or an error when the
    /// components carry relative phases.
    pub fn to_real(&self) -> Result<Vec<f64>> {
        let pivot =
            self.amps
                .iter()
                .copied()
                .fold(Complex64::new(0.0, 0.0), |m, a| if a.norm_sqr() > m.norm_sqr() { a } else { m });
        let phase = pivot.conj() / pivot.norm();
        let mut out = Vec::with_capacity(self.amps.len());
        for a in &self.amps {
            let r = a * phase;
            if r.im.abs() > 1e-12 {
                return Err(Error::ComplexState);
            }
            out.push(r.re);
        }
        Ok(out)
    }
}

/// Uniformly random real unit vector.
pub fn random_state(dim: usize, seed: u64) -> Result<StateVector> {
    let mut rng = rng_for(seed);
    let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    StateVector::normalized(&v)
}

/// GOE matrix with off-diagonal variance 1/2 and diagonal variance 1, so that
/// the spectrum fills `[-sqrt(2N), sqrt(2N)]`. Entries are drawn row by row
/// over the lower triangle.
pub fn sample_goe(dim: usize, seed: u64) -> Result<SectorHamiltonian> {
    if dim < 2 {
        return Err(Error::Domain(format!("GOE dimension must be at least 2, got {dim}")));
    }
    let mut rng = rng_for(seed);
    let h = SymMatrix::from_lower(dim, |i, j| {
        let x: f64 = rng.sample(StandardNormal);
        if i == j {
            x
        } else {
            x * core::f64::consts::FRAC_1_SQRT_2
        }
    })?;
    Ok(SectorHamiltonian { h, basis: (0..dim as u64).collect(), meta: Provenance::Goe { seed } })
}

/// Up-spin bitmasks with exactly `L/2` bits set, ascending.
pub fn sector_basis(sites: usize) -> Vec<u64> {
    let k = sites / 2;
    let mut out = Vec::with_capacity(binomial(sites, k));
    if k == 0 {
        out.push(0);
        return out;
    }
    // Gosper's hack walks same-popcount integers in increasing order
    let mut x: u64 = (1 << k) - 1;
    let limit = 1u64 << sites;
    while x < limit {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// Nearest-neighbour bonds of the ring. Two sites share a single bond.
pub fn ring_bonds(sites: usize) -> Vec<(usize, usize)> {
    if sites == 2 {
        return alloc::vec![(0, 1)];
    }
    (0..sites).map(|j| (j, (j + 1) % sites)).collect()
}

/// Local fields `h_j`, uniform in `[-h, h)`, one draw per site in site order.
pub fn disorder_fields(spec: &SpinChainSpec) -> Vec<f64> {
    let mut rng = rng_for(spec.seed);
    (0..spec.sites).map(|_| spec.h * (2.0 * rng.gen::<f64>() - 1.0)).collect()
}

/// `H = sum_j h_j S^z_j + g sum_<jk> S_j . S_k` on the `S_z = 0` sector of a
/// periodic chain of spins 1/2.
pub fn build_spin_sector(spec: &SpinChainSpec) -> Result<SectorHamiltonian> {
    spec.validate()?;
    let basis = sector_basis(spec.sites);
    let fields = disorder_fields(spec);
    let bonds = ring_bonds(spec.sites);
    let mut h = SymMatrix::zeros(basis.len())?;
    for (row, &mask) in basis.iter().enumerate() {
        let sz = |j: usize| if mask >> j & 1 == 1 { 0.5 } else { -0.5 };
        let mut diag: f64 = fields.iter().enumerate().map(|(j, hj)| hj * sz(j)).sum();
        for &(j, k) in &bonds {
            diag += spec.g * sz(j) * sz(k);
            if (mask >> j ^ mask >> k) & 1 == 1 {
                let flipped = mask ^ (1 << j) ^ (1 << k);
                let col = basis
                    .binary_search(&flipped)
                    .map_err(|_| Error::Integrity(format!("flip of {mask:#b} left the sector")))?;
                if col < row {
                    h.add_to(row, col, 0.5 * spec.g);
                }
            }
        }
        h.set(row, row, diag);
    }
    Ok(SectorHamiltonian { h, basis, meta: Provenance::SpinChain { spec: *spec, fields } })
}

/// First `L/2` sites up, the rest down.
pub fn domain_wall_state(ham: &SectorHamiltonian) -> Result<StateVector> {
    let sites = match &ham.meta {
        Provenance::SpinChain { spec, .. } => spec.sites,
        _ => return Err(Error::Integrity("domain wall needs a spin-chain sector".into())),
    };
    let label = (1u64 << (sites / 2)) - 1;
    let index = ham
        .index_of(label)
        .ok_or_else(|| Error::Integrity(format!("domain wall {label:#b} missing from the basis")))?;
    StateVector::basis(ham.dim(), index)
}

fn check_dims(ham: &SectorHamiltonian, psi: &StateVector) -> Result<()> {
    if ham.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: ham.dim(), found: psi.dim() });
    }
    Ok(())
}

/// Mean and width of the LDOS from `H psi`, without diagonalising.
pub fn ldos_summary(ham: &SectorHamiltonian, psi: &StateVector) -> Result<LdosSummary> {
    check_dims(ham, psi)?;
    let x = psi.amplitudes();
    let mut y = alloc::vec![Complex64::new(0.0, 0.0); x.len()];
    ham.h.matvec_complex(x, &mut y);
    let e0: f64 = x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum();
    // ||(H - E0) psi||^2 avoids the cancellation in <H^2> - E0^2
    let var: f64 = x.iter().zip(&y).map(|(a, b)| (b - a * e0).norm_sqr()).sum();
    Ok(LdosSummary { e0, sigma0: libm::sqrt(var.max(0.0)), moments: None })
}

/// `mu_n = <psi| H^n |psi>` for `n = 0..=order` by repeated products.
pub fn state_moments(ham: &SectorHamiltonian, psi: &StateVector, order: usize) -> Result<MomentSequence> {
    check_dims(ham, psi)?;
    let x = psi.amplitudes();
    // mu_{2k} = <v_k|v_k>, mu_{2k+1} = <v_k|H|v_k> with v_k = H^k psi
    let mut v = x.to_vec();
    let mut hv = alloc::vec![Complex64::new(0.0, 0.0); x.len()];
    let mut mu = alloc::vec![0.0; order + 1];
    for k in 0..=order / 2 {
        mu[2 * k] = v.iter().map(|a| a.norm_sqr()).sum();
        ham.h.matvec_complex(&v, &mut hv);
        if 2 * k < order {
            mu[2 * k + 1] = v.iter().zip(&hv).map(|(a, b)| (a.conj() * b).re).sum();
        }
        core::mem::swap(&mut v, &mut hv);
    }
    MomentSequence::from_f64(&mu)
}
