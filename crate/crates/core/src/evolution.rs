//! Exact evolution on the Krylov chain and the spread complexity.
//!
//! With `T = U diag(lambda) U^T` the amplitudes are
//! `phi_n(t) = sum_k U_nk exp(-i lambda_k t) U_0k`, exact at every time.

use crate::coeffs::LanczosCoefficients;
use crate::eigen::TridiagEigen;
use crate::error::{Error, Result};
use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Normalisation drift that [`spread_complexity`] tolerates.
pub const INTEGRITY_TOLERANCE: f64 = 1e-8;

/// Relative gap below which eigenvalues are merged for long-time averages.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// `phi_n(t)` on a time grid, stored time-major.
#[derive(Debug, Clone)]
pub struct KrylovAmplitudes {
    pub times: Vec<f64>,
    pub dim: usize,
    pub phi: Vec<Complex64>,
}

impl KrylovAmplitudes {
    pub fn at(&self, i: usize) -> &[Complex64] {
        &self.phi[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpreadComplexitySeries {
    pub times: Vec<f64>,
    pub c: Vec<f64>,
    pub f: Vec<f64>,
    /// Largest `|sum_n |phi_n|^2 - 1|` seen on the grid.
    pub norm_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongTimeAverage {
    pub c_bar: f64,
    pub f_bar: f64,
}

/// Eigen-decomposed Krylov chain, reusable across time grids.
#[derive(Debug, Clone)]
pub struct KrylovEvolution {
    eig: TridiagEigen,
    overlap: Vec<f64>,
}

impl KrylovEvolution {
    pub fn new(lc: &LanczosCoefficients) -> Result<Self> {
        if lc.is_formal() {
            return Err(Error::Domain("formal coefficients do not describe a physical evolution".into()));
        }
        let eig = TridiagEigen::new(lc.a(), lc.b())?;
        let overlap = eig.first_components();
        Ok(Self { eig, overlap })
    }

    pub fn dim(&self) -> usize {
        self.eig.dim()
    }

    pub fn eigen(&self) -> &TridiagEigen {
        &self.eig
    }

    /// Writes `phi(t)` into `re` and `im`.
    fn amplitudes_into(&self, t: f64, re: &mut [f64], im: &mut [f64]) {
        re.fill(0.0);
        im.fill(0.0);
        if t == 0.0 {
            re[0] = 1.0;
            return;
        }
        for (k, (&lam, &u0)) in self.eig.values().iter().zip(&self.overlap).enumerate() {
            let (s, c) = libm::sincos(lam * t);
            let (cr, ci) = (c * u0, -s * u0);
            for ((r, i), &u) in re.iter_mut().zip(im.iter_mut()).zip(self.eig.vector(k)) {
                *r += cr * u;
                *i += ci * u;
            }
        }
    }

    pub fn amplitudes(&self, times: &[f64]) -> Result<KrylovAmplitudes> {
        check_times(times)?;
        let k = self.dim();
        let mut phi = Vec::with_capacity(times.len() * k);
        let (mut re, mut im) = (alloc::vec![0.0; k], alloc::vec![0.0; k]);
        for &t in times {
            self.amplitudes_into(t, &mut re, &mut im);
            phi.extend(re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)));
        }
        Ok(KrylovAmplitudes { times: times.to_vec(), dim: k, phi })
    }

    /// `C(t)` and `F(t)` without storing the amplitudes.
    pub fn series(&self, times: &[f64]) -> Result<SpreadComplexitySeries> {
        check_times(times)?;
        let k = self.dim();
        let (mut re, mut im) = (alloc::vec![0.0; k], alloc::vec![0.0; k]);
        let mut out = SpreadComplexitySeries {
            times: Vec::with_capacity(times.len()),
            c: Vec::with_capacity(times.len()),
            f: Vec::with_capacity(times.len()),
            norm_error: 0.0,
        };
        for &t in times {
            self.amplitudes_into(t, &mut re, &mut im);
            let (c, f, norm) = observables(re.iter().zip(&im).map(|(&r, &i)| r * r + i * i));
            out.push(t, c, f, norm)?;
        }
        Ok(out)
    }

    pub fn long_time_average(&self) -> LongTimeAverage {
        let vals = self.eig.values();
        let k = vals.len();
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut c_bar = 0.0;
        let mut f_bar = 0.0;
        let mut start = 0;
        while start < k {
            let mut end = start + 1;
            while end < k && vals[end] - vals[end - 1] <= DEGENERACY_TOLERANCE * scale {
                end += 1;
            }
            // projection of the initial state onto the block, resolved over levels n
            let weight: f64 = self.overlap[start..end].iter().map(|u| u * u).sum();
            f_bar += weight * weight;
            for n in 1..k {
                let p: f64 = (start..end).map(|j| self.eig.vector(j)[n] * self.overlap[j]).sum();
                c_bar += n as f64 * p * p;
            }
            start = end;
        }
        LongTimeAverage { c_bar, f_bar }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(t) = times.iter().find(|t| !t.is_finite()) {
        return Err(Error::Domain(format!("time grid contains {t}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("time grid must be ascending".into()));
    }
    Ok(())
}

/// `(C, F, sum |phi|^2)` from level populations.
fn observables(pops: impl Iterator<Item = f64>) -> (f64, f64, f64) {
    let mut c = 0.0;
    let mut f = 0.0;
    let mut norm = 0.0;
    for (n, p) in pops.enumerate() {
        if n == 0 {
            f = p;
        }
        c += n as f64 * p;
        norm += p;
    }
    (c, f, norm)
}

impl SpreadComplexitySeries {
    fn push(&mut self, t: f64, c: f64, f: f64, norm: f64) -> Result<()> {
        let drift = (norm - 1.0).abs();
        if drift > INTEGRITY_TOLERANCE {
            return Err(Error::Integrity(format!("normalisation drifted by {drift:e} at t = {t}")));
        }
        self.norm_error = self.norm_error.max(drift);
        self.times.push(t);
        self.c.push(c);
        self.f.push(f);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub fn evolve_amplitudes(lc: &LanczosCoefficients, times: &[f64]) -> Result<KrylovAmplitudes> {
    KrylovEvolution::new(lc)?.amplitudes(times)
}

/// `C(t) = sum_n n |phi_n|^2` and `F(t) = |phi_0|^2`.
pub fn spread_complexity(amp: &KrylovAmplitudes) -> Result<SpreadComplexitySeries> {
    let mut out = SpreadComplexitySeries {
        times: Vec::with_capacity(amp.times.len()),
        c: Vec::with_capacity(amp.times.len()),
        f: Vec::with_capacity(amp.times.len()),
        norm_error: 0.0,
    };
    for (i, &t) in amp.times.iter().enumerate() {
        let (c, f, norm) = observables(amp.at(i).iter().map(|z| z.norm_sqr()));
        out.push(t, c, f, norm)?;
    }
    Ok(out)
}

pub fn long_time_average(lc: &LanczosCoefficients) -> Result<LongTimeAverage> {
    Ok(KrylovEvolution::new(lc)?.long_time_average())
}

/// `n` points spaced evenly in `log t` over `[t0, t1]`.
pub fn log_grid(t0: f64, t1: f64, n: usize) -> Result<Vec<f64>> {
    if !(t0 > 0.0 && t1 > t0 && t1.is_finite()) || n < 2 {
        return Err(Error::Domain(format!("bad log grid [{t0}, {t1}] with {n} points")));
    }
    let (l0, l1) = (libm::log(t0), libm::log(t1));
    Ok((0..n).map(|i| libm::exp(l0 + (l1 - l0) * i as f64 / (n - 1) as f64)).collect())
}

/// `n` evenly spaced points over `[t0, t1]`.
pub fn linear_grid(t0: f64, t1: f64, n: usize) -> Result<Vec<f64>> {
    if !(t1 > t0 && t0.is_finite() && t1.is_finite()) || n < 2 {
        return Err(Error::Domain(format!("bad grid [{t0}, {t1}] with {n} points")));
    }
    Ok((0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect())
}

/// Points in the default logarithmic grid.
pub const DEFAULT_POINTS: usize = 600;

/// Default plateau grid for a chain of dimension `k` and width `sigma0`:
/// logarithmic over `[1e-2/sigma0, 100 k/sigma0]`. The upper end grows with `k`
/// so that the grid reaches past the Heisenberg time of the chain.
pub fn default_grid(sigma0: f64, k: usize) -> Result<Vec<f64>> {
    let t1 = (100.0 * k as f64).max(1e3) / sigma0;
    log_grid(1e-2 / sigma0, t1, DEFAULT_POINTS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_level() -> LanczosCoefficients {
        LanczosCoefficients::new(vec![0.0, 0.0], vec![1.0]).unwrap()
    }

    #[test]
    fn two_level_amplitudes() {
        let times = [0.0, 0.3, 1.0, 2.5];
        let amp = evolve_amplitudes(&two_level(), &times).unwrap();
        for (i, &t) in times.iter().enumerate() {
            let phi = amp.at(i);
            assert!((phi[0] - Complex64::new(libm::cos(t), 0.0)).norm() < 1e-15);
            assert!((phi[1] - Complex64::new(0.0, -libm::sin(t))).norm() < 1e-15);
        }
        let s = spread_complexity(&amp).unwrap();
        for (c, &t) in s.c.iter().zip(&times) {
            assert!((c - libm::sin(t).powi(2)).abs() < 1e-15);
        }
        assert_eq!(s.c[0], 0.0);
        assert_eq!(s.f[0], 1.0);
    }

    #[test]
    fn long_time_averages() {
        let avg = long_time_average(&two_level()).unwrap();
        assert!((avg.f_bar - 0.5).abs() < 1e-15);
        assert!((avg.c_bar - 0.5).abs() < 1e-15);
        let one = LanczosCoefficients::new(vec![3.0], vec![]).unwrap();
        assert_eq!(long_time_average(&one).unwrap(), LongTimeAverage { c_bar: 0.0, f_bar: 1.0 });
    }

    #[test]
    fn series_matches_stored_amplitudes() {
        let lc = LanczosCoefficients::new(vec![0.1, -0.3, 0.2, 0.0], vec![1.0, 0.7, 1.3]).unwrap();
        let times = linear_grid(0.0, 20.0, 50).unwrap();
        let evo = KrylovEvolution::new(&lc).unwrap();
        let a = spread_complexity(&evo.amplitudes(&times).unwrap()).unwrap();
        let b = evo.series(&times).unwrap();
        assert_eq!(a, b);
        assert!(b.norm_error < 1e-13);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(evolve_amplitudes(&two_level(), &[1.0, 0.5]).is_err());
        assert!(evolve_amplitudes(&two_level(), &[f64::NAN]).is_err());
        assert!(log_grid(0.0, 1.0, 10).is_err());
        let formal = LanczosCoefficients::new_formal(vec![0.0, 0.0], vec![-1.0]).unwrap();
        assert!(KrylovEvolution::new(&formal).is_err());
    }

    #[test]
    fn drift_is_an_integrity_error() {
        let amp = KrylovAmplitudes {
            times: vec![0.0],
            dim: 2,
            phi: vec![Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0)],
        };
        assert!(matches!(spread_complexity(&amp), Err(Error::Integrity(_))));
    }

    #[test]
    fn grids() {
        let g = log_grid(1e-2, 1e2, 5).unwrap();
        assert!((g[2] - 1.0).abs() < 1e-15);
        assert_eq!(default_grid(2.0, 60).unwrap().len(), DEFAULT_POINTS);
    }
}
