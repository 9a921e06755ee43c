//! Moments to Lanczos coefficients through the auxiliary-matrix recursion.
//!
//! Two triangular arrays are built from the moments,
//!
//! ```text
//! M_k^(0) = (-1)^k mu_k            L_k^(0) = (-1)^(k+1) mu_(k+1)
//! M_k^(n) = L_k^(n-1) - L_(n-1)^(n-1) M_k^(n-1) / M_(n-1)^(n-1)
//! L_k^(n) = M_(k+1)^(n) / M_n^(n) - M_k^(n-1) / M_(n-1)^(n-1)
//! ```
//!
//! and the coefficients are read off the diagonals: `b_n^2 = M_n^(n)`,
//! `a_n = -L_n^(n)`. With moments up to index `m`, level `n` of `M` spans
//! `k in n..=m-n` and of `L` spans `n..=m-n-1`, so depth `K` needs `m >= 2K-1`.

use crate::coeffs::LanczosCoefficients;
use crate::error::{Error, Result};
use crate::moments::{MomentSequence, MomentValues};
use crate::numeric::{rational_from_f64, BigFloat, Rational, Scalar};
use alloc::vec::Vec;

/// Relative size of `b_n^2` below which the Krylov space counts as exhausted.
pub const EXHAUSTION_TOLERANCE: f64 = 1e-24;

/// Relative agreement on the deepest `b` required between two precision levels.
pub const PRECISION_AGREEMENT: f64 = 1e-9;

/// Hard ceiling for the automatic precision escalation.
pub const MAX_BITS: usize = 1 << 15;

#[derive(Debug, Clone, Copy, Default)]
pub struct RecursionOptions {
    /// Continue through negative `b_n^2`, returning sign-carrying coefficients.
    pub formal: bool,
    /// Starting working precision for floating input. Defaults to `max(128, 12 K)`.
    pub precision_bits: Option<usize>,
}

/// Lanczos coefficients `(a_0..a_{K-1}, b_1..b_{K-1})` from the first `2K` moments.
///
/// Stops early when the Krylov space is exhausted. Fails on a non positive-definite
/// sequence; see [`moments_to_lanczos_with`] for formal mode.
pub fn moments_to_lanczos(mu: &MomentSequence, k: usize) -> Result<LanczosCoefficients> {
    moments_to_lanczos_with(mu, k, RecursionOptions::default())
}

pub fn moments_to_lanczos_with(mu: &MomentSequence, k: usize, opts: RecursionOptions) -> Result<LanczosCoefficients> {
    if k == 0 {
        return Err(Error::Domain("Krylov depth must be at least 1".into()));
    }
    if mu.len() < 2 * k {
        return Err(Error::Arity { needed: 2 * k, available: mu.len() });
    }
    let (a, b2) = match mu.values() {
        MomentValues::Exact(v) => {
            let (a, b2) = recurse(&v[..2 * k], k, opts.formal)?;
            (a.iter().map(Scalar::approx).collect(), b2.iter().map(Scalar::approx).collect())
        }
        MomentValues::Float(_) => escalate(mu, k, opts)?,
    };
    finish(a, b2, opts.formal)
}

fn escalate(mu: &MomentSequence, k: usize, opts: RecursionOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut bits = opts.precision_bits.unwrap_or((12 * k).max(128));
    let run = |bits: usize| -> Result<(Vec<f64>, Vec<f64>)> {
        let v = mu.truncated(2 * k).as_big(bits);
        let (a, b2) = recurse::<BigFloat>(&v, k, opts.formal)?;
        Ok((a.iter().map(Scalar::approx).collect(), b2.iter().map(Scalar::approx).collect()))
    };
    let mut prev = run(bits)?;
    while bits < MAX_BITS {
        bits *= 2;
        let next = run(bits)?;
        if agree(&prev.1, &next.1) && agree(&prev.0[prev.0.len() - 1..], &next.0[next.0.len() - 1..]) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::PrecisionInsufficient { order: 2 * k - 1, bits })
}

fn agree(x: &[f64], y: &[f64]) -> bool {
    if x.len() != y.len() {
        return false;
    }
    match (x.last(), y.last()) {
        (Some(p), Some(q)) => (p - q).abs() <= PRECISION_AGREEMENT * p.abs().max(q.abs()).max(f64::MIN_POSITIVE),
        _ => true,
    }
}

fn finish(a: Vec<f64>, b2: Vec<f64>, formal: bool) -> Result<LanczosCoefficients> {
    let b: Vec<f64> = b2.iter().map(|&x| libm::copysign(libm::sqrt(x.abs()), x)).collect();
    if formal {
        LanczosCoefficients::new_formal(a, b)
    } else {
        LanczosCoefficients::new(a, b)
    }
}

/// Runs the recursion, returning `a_n` and `b_n^2` (the latter with sign in formal mode).
fn recurse<T: Scalar>(mu: &[T], k: usize, formal: bool) -> Result<(Vec<T>, Vec<T>)> {
    let m = mu.len() - 1;
    let mut m_prev: Vec<T> = mu.iter().enumerate().map(|(i, x)| if i % 2 == 0 { x.clone() } else { x.neg() }).collect();
    let mut l_prev: Vec<T> =
        mu[1..].iter().enumerate().map(|(i, x)| if i % 2 == 0 { x.neg() } else { x.clone() }).collect();

    let mut a = Vec::with_capacity(k);
    let mut b2 = Vec::with_capacity(k.saturating_sub(1));
    a.push(l_prev[0].neg());
    let mu2 = mu.get(2).map(Scalar::approx).unwrap_or(0.0).abs();
    let mut scale = 0.0;

    // Arrays are stored with offset n: index j holds k = n + j.
    for n in 1..k {
        let pivot_l = &l_prev[0];
        let pivot_m = &m_prev[0];
        let ratio = pivot_l.div(pivot_m);
        let m_cur: Vec<T> = (n..=m - n).map(|kk| l_prev[kk - n + 1].sub(&ratio.mul(&m_prev[kk - n + 1]))).collect();

        let bn2 = m_cur[0].clone();
        let v = bn2.approx();
        if n == 1 {
            scale = mu2;
        }
        if v.abs() <= EXHAUSTION_TOLERANCE * scale || bn2.is_zero() {
            break;
        }
        if bn2.is_negative() && !formal {
            return Err(Error::NotPositive { depth: n, value: v });
        }
        if n == 1 {
            scale = v.abs();
        }

        let l_cur: Vec<T> =
            (n..m - n).map(|kk| m_cur[kk - n + 1].div(&m_cur[0]).sub(&m_prev[kk - n + 1].div(pivot_m))).collect();
        a.push(l_cur[0].neg());
        b2.push(bn2);
        m_prev = m_cur;
        l_prev = l_cur;
    }
    Ok((a, b2))
}

/// Moments `mu_n = (T^n)_00` of the tridiagonal matrix of `lc`, `n = 0..=order`,
/// computed exactly over the rationals from the stored `f64` coefficients.
pub fn lanczos_to_moments(lc: &LanczosCoefficients, order: usize) -> MomentSequence {
    let a: Vec<Rational> = lc.a().iter().map(|&x| rational_from_f64(x)).collect();
    // beta_n = b_n^2, keeping the sign of formal coefficients
    let beta: Vec<Rational> = lc
        .b()
        .iter()
        .map(|&x| {
            let r = rational_from_f64(x);
            let sq = &r * &r;
            if x < 0.0 {
                -sq
            } else {
                sq
            }
        })
        .collect();
    let dim = lc.dim();
    // Walk weights in the monic form: row i of w holds the weight of paths 0 -> i.
    let mut w: Vec<Rational> = alloc::vec![Rational::ZERO; dim];
    w[0] = Rational::ONE;
    let mut out = Vec::with_capacity(order + 1);
    out.push(Rational::ONE);
    for step in 1..=order {
        // only levels reachable and able to return in time matter
        let reach = step.min(dim - 1).min(order - step + 1);
        let mut next: Vec<Rational> = alloc::vec![Rational::ZERO; dim];
        for (i, slot) in next.iter_mut().enumerate().take(reach + 1) {
            let mut acc = &a[i] * &w[i];
            if i > 0 {
                acc += &w[i - 1];
            }
            if i + 1 < dim {
                acc += &beta[i] * &w[i + 1];
            }
            *slot = acc;
        }
        w = next;
        out.push(w[0].clone());
    }
    MomentSequence::exact(out).expect("mu_0 = 1 by construction")
}
