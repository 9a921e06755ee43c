//! Power moments `mu_n = <psi_0| H^n |psi_0>` of a local density of states.
//!
//! The auto-correlation convention used throughout the crate is
//! `S(t) = sum_n mu_n (-i t)^n / n!`, so for even real amplitudes
//! `mu_{2k} = (-1)^k S^{(2k)}(0)` and odd moments vanish.

use crate::error::{Error, Result};
use crate::numeric::{big_from_f64, big_from_rational, BigFloat, Rational, Scalar};
use alloc::format;
use alloc::vec::Vec;

#[derive(Debug, Clone)]
pub enum MomentValues {
    Exact(Vec<Rational>),
    /// Values carried at (at least) the recorded working precision.
    Float(Vec<BigFloat>),
}

/// Moments `mu_0 .. mu_order`, normalised so that `mu_0 = 1`.
#[derive(Debug, Clone)]
pub struct MomentSequence {
    values: MomentValues,
    precision: Option<usize>,
}

impl MomentSequence {
    pub fn exact(values: Vec<Rational>) -> Result<Self> {
        match values.first() {
            Some(m0) if *m0 == Rational::ONE => Ok(Self { values: MomentValues::Exact(values), precision: None }),
            Some(m0) => Err(Error::Domain(format!("mu_0 must be 1, got {}", m0.approx()))),
            None => Err(Error::Domain("empty moment sequence".into())),
        }
    }

    /// Moments known to `bits` bits of precision.
    pub fn float(values: Vec<BigFloat>, bits: usize) -> Result<Self> {
        let Some(m0) = values.first() else {
            return Err(Error::Domain("empty moment sequence".into()));
        };
        if (m0.approx() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("mu_0 must be 1, got {}", m0.approx())));
        }
        Ok(Self { values: MomentValues::Float(values), precision: Some(bits) })
    }

    /// Double-precision moments, e.g. from repeated matrix-vector products.
    pub fn from_f64(values: &[f64]) -> Result<Self> {
        let lifted = values.iter().map(|&x| big_from_f64(x, 53)).collect();
        Self::float(lifted, 53)
    }

    /// Highest moment index available.
    pub fn order(&self) -> usize {
        self.len() - 1
    }

    pub fn len(&self) -> usize {
        match &self.values {
            MomentValues::Exact(v) => v.len(),
            MomentValues::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> &MomentValues {
        &self.values
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, MomentValues::Exact(_))
    }

    /// Bits of precision the values were produced at; `None` when exact.
    pub fn precision(&self) -> Option<usize> {
        self.precision
    }

    pub fn get(&self, n: usize) -> Option<f64> {
        match &self.values {
            MomentValues::Exact(v) => v.get(n).map(Scalar::approx),
            MomentValues::Float(v) => v.get(n).map(Scalar::approx),
        }
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        (0..self.len()).filter_map(|n| self.get(n)).collect()
    }

    /// The first `len` moments.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.clamp(1, self.len());
        let values = match &self.values {
            MomentValues::Exact(v) => MomentValues::Exact(v[..len].to_vec()),
            MomentValues::Float(v) => MomentValues::Float(v[..len].to_vec()),
        };
        Self { values, precision: self.precision }
    }

    /// Values lifted to `bits` of binary precision.
    pub(crate) fn as_big(&self, bits: usize) -> Vec<BigFloat> {
        match &self.values {
            MomentValues::Exact(v) => v.iter().map(|x| big_from_rational(x, bits)).collect(),
            MomentValues::Float(v) => v.iter().map(|x| x.clone().with_precision(bits).value()).collect(),
        }
    }

    /// Hankel determinants `det[mu_{i+j}]_{0<=i,j<=k}` for `k = 0 ..= max_k`,
    /// computed by elimination in the sequence's own arithmetic.
    pub fn hankel_determinants(&self, max_k: usize) -> Result<Vec<f64>> {
        if 2 * max_k > self.order() {
            return Err(Error::Arity { needed: 2 * max_k + 1, available: self.len() });
        }
        Ok(match &self.values {
            MomentValues::Exact(v) => (0..=max_k).map(|k| hankel_det(v, k).approx()).collect(),
            MomentValues::Float(v) => {
                let bits = self.precision.unwrap_or(53).max(128) * 2;
                let lifted: Vec<BigFloat> = v.iter().map(|x| x.clone().with_precision(bits).value()).collect();
                (0..=max_k).map(|k| hankel_det(&lifted, k).approx()).collect()
            }
        })
    }

    /// Largest `k` such that every Hankel determinant of size up to `k + 1` is
    /// strictly positive, capped at the available order.
    pub fn positive_depth(&self) -> usize {
        let max_k = self.order() / 2;
        let dets = self.hankel_determinants(max_k).unwrap_or_default();
        dets.iter().take_while(|&&d| d > 0.0).count().saturating_sub(1)
    }

    /// Whether all Hankel matrices up to size `depth` are positive definite.
    pub fn is_physical(&self, depth: usize) -> bool {
        depth == 0 || self.positive_depth() + 1 >= depth
    }
}

fn hankel_det<T: Scalar + Zero>(mu: &[T], k: usize) -> T {
    let n = k + 1;
    let mut m: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| mu[i + j].clone()).collect()).collect();
    let mut det = T::one_like(&mu[0]);
    for col in 0..n {
        let pivot = (col..n)
            .filter(|&r| !m[r][col].is_zero())
            .max_by(|&x, &y| m[x][col].approx().abs().total_cmp(&m[y][col].approx().abs()));
        let Some(p) = pivot else {
            return T::zero_like(&mu[0]);
        };
        if p != col {
            m.swap(p, col);
            det = det.neg();
        }
        det = det.mul(&m[col][col]);
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].div(&m[col][col]);
            for c in col..n {
                let v = m[r][c].sub(&f.mul(&m[col][c]));
                m[r][c] = v;
            }
        }
    }
    det
}

trait Zero: Sized {
    fn zero_like(x: &Self) -> Self;
    fn one_like(x: &Self) -> Self;
}

impl Zero for Rational {
    fn zero_like(_: &Self) -> Self {
        Rational::ZERO
    }
    fn one_like(_: &Self) -> Self {
        Rational::ONE
    }
}

impl Zero for BigFloat {
    fn zero_like(x: &Self) -> Self {
        BigFloat::ZERO.with_precision(x.precision()).value()
    }
    fn one_like(x: &Self) -> Self {
        BigFloat::ONE.with_precision(x.precision()).value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational_from_f64;
    use alloc::vec;

    fn exact(v: &[f64]) -> MomentSequence {
        MomentSequence::exact(v.iter().map(|&x| rational_from_f64(x)).collect()).unwrap()
    }

    #[test]
    fn requires_unit_mu0() {
        assert!(MomentSequence::exact(vec![rational_from_f64(2.0)]).is_err());
        assert!(MomentSequence::from_f64(&[0.5, 0.0]).is_err());
        assert!(MomentSequence::from_f64(&[]).is_err());
    }

    #[test]
    fn hankel_of_two_point_measure() {
        // +-1 with equal weight: H_0 = 1, H_1 = 1, H_2 = 0 (finite support)
        let mu = exact(&[1.0, 0.0, 1.0, 0.0, 1.0]);
        let d = mu.hankel_determinants(2).unwrap();
        assert_eq!(d, vec![1.0, 1.0, 0.0]);
        assert_eq!(mu.positive_depth(), 1);
    }

    #[test]
    fn truncated_quadratic_hankel_goes_negative() {
        let s2 = 1.5f64 * 1.5;
        let mu = exact(&[1.0, 0.0, s2, 0.0, 0.0]);
        let d = mu.hankel_determinants(2).unwrap();
        assert_eq!(d[1], s2);
        assert!((d[2] + s2 * s2 * s2).abs() < 1e-12);
        assert!(!mu.is_physical(3));
        assert!(mu.is_physical(2));
    }

    #[test]
    fn float_and_exact_agree() {
        let v = [1.0, 0.25, 1.0, 0.5, 3.0];
        let a = exact(&v).hankel_determinants(2).unwrap();
        let b = MomentSequence::from_f64(&v).unwrap().hankel_determinants(2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}
