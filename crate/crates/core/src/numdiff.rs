//! Moments by numerical differentiation of `S(t)` at the origin.
//!
//! Even derivatives come from central differences in arbitrary precision on
//! steps `h0 / 2^i`, refined by Richardson extrapolation in `h^2`. The working
//! precision doubles until two levels agree on the highest moment.

use crate::error::{Error, Result};
use crate::models::AutocorrModel;
use crate::moments::MomentSequence;
use crate::numeric::{big_from_f64, big_from_rational, BigFloat, Rational, Scalar};
use alloc::vec::Vec;

/// Relative agreement required between two precision levels.
pub const AGREEMENT: f64 = 1e-3;

/// Number of step halvings in the Richardson table.
pub const LEVELS: usize = 7;

const MAX_BITS: usize = 1 << 14;

/// Even moments `mu_0 ..= mu_order` of an even amplitude model by Richardson
/// differentiation, starting from `bits` of working precision.
pub fn richardson_moments(model: &AutocorrModel, order: usize, bits: usize) -> Result<MomentSequence> {
    if !model.is_amplitude() {
        return Err(Error::VariantMismatch { expected: "amplitude", found: model.name() });
    }
    model.validate()?;
    let half = order / 2;
    let h0 = 0.5 * time_scale(model);
    // cancellation in a 2k-th difference costs about 2k log2(1/h) bits
    let steps = libm::log2(1.0 / (h0 / (1u64 << LEVELS) as f64)).max(1.0);
    let mut bits = bits.max(64 + (2.0 * half as f64 * (steps + 2.0)) as usize);
    let mut prev = derivatives(model, half, h0, bits);
    while bits < MAX_BITS {
        bits *= 2;
        let next = derivatives(model, half, h0, bits);
        let (p, q) = (prev[half].approx(), next[half].approx());
        if (p - q).abs() <= AGREEMENT * q.abs() {
            let mut mu = alloc::vec![BigFloat::ZERO; order + 1];
            for (k, d) in next.into_iter().enumerate() {
                mu[2 * k] = if k % 2 == 0 { d } else { d.neg() };
            }
            mu[0] = BigFloat::ONE.with_precision(bits).value();
            return MomentSequence::float(mu, bits);
        }
        prev = next;
    }
    Err(Error::PrecisionInsufficient { order, bits })
}

/// Scale below which the Taylor series of `S` converges comfortably.
fn time_scale(model: &AutocorrModel) -> f64 {
    match *model {
        AutocorrModel::Interpolation { sigma0, gamma } => (1.0 / sigma0).min(gamma / (2.0 * sigma0 * sigma0)),
        _ => 1.0 / model.sigma0(),
    }
}

/// `S^(2k)(0)` for `k = 0..=half`.
fn derivatives(model: &AutocorrModel, half: usize, h0: f64, bits: usize) -> Vec<BigFloat> {
    let finest = 1usize << LEVELS;
    let dt = big_from_f64(h0, bits) / big_from_f64(finest as f64, bits);
    // samples on the finest grid; S is even so t >= 0 suffices
    let samples: Vec<BigFloat> =
        (0..=half * finest).map(|m| eval_big(model, &(&dt * big_from_f64(m as f64, bits)), bits)).collect();
    let mut out = Vec::with_capacity(half + 1);
    out.push(samples[0].clone());
    for k in 1..=half {
        let binom: Vec<BigFloat> = (0..=k).map(|j| big_from_rational(&binomial(2 * k, k + j), bits)).collect();
        let mut table: Vec<Vec<BigFloat>> = Vec::with_capacity(LEVELS + 1);
        for level in 0..=LEVELS {
            let stride = finest >> level;
            let h = &dt * big_from_f64(stride as f64, bits);
            let mut acc = &binom[0] * &samples[0];
            if k % 2 == 1 {
                acc = acc.neg();
            }
            for j in 1..=k {
                let term = &binom[j] * &samples[j * stride] * big_from_f64(2.0, bits);
                acc = if (k - j) % 2 == 0 { acc + term } else { acc - term };
            }
            let mut hp = h.clone();
            for _ in 1..2 * k {
                hp = &hp * &h;
            }
            let mut row = Vec::with_capacity(level + 1);
            row.push(acc / hp);
            for j in 1..=level {
                let factor = big_from_f64((1u64 << (2 * j)) as f64 - 1.0, bits);
                let diff = &row[j - 1] - &table[level - 1][j - 1];
                let v = &row[j - 1] + diff / factor;
                row.push(v);
            }
            table.push(row);
        }
        out.push(table[LEVELS][LEVELS].clone());
    }
    out
}

fn binomial(n: usize, k: usize) -> Rational {
    let mut r = Rational::ONE;
    for i in 0..k {
        r = r * Rational::from((n - i) as u64) / Rational::from((i + 1) as u64);
    }
    r
}

/// `S(t)` in arbitrary precision for the even real models.
fn eval_big(model: &AutocorrModel, t: &BigFloat, bits: usize) -> BigFloat {
    let f = |x: f64| big_from_f64(x, bits);
    let t2 = t * t;
    match *model {
        AutocorrModel::Gaussian { sigma0 } => (-(f(sigma0) * f(sigma0) * t2 / f(2.0))).exp(),
        AutocorrModel::TruncatedQuadratic { sigma0 } => f(1.0) - f(sigma0) * f(sigma0) * t2 / f(2.0),
        AutocorrModel::Interpolation { sigma0, gamma } => {
            let g2 = f(gamma) * f(gamma);
            let c = &g2 / (f(4.0) * f(sigma0) * f(sigma0));
            let q = g2 / f(4.0);
            let r = (&c * &c + q * t2).sqrt();
            (c - r).exp()
        }
        AutocorrModel::Semicircle { alpha } => {
            // J1(2x)/x = sum_j (-1)^j x^(2j) / (j! (j+1)!)
            let x2 = f(alpha) * f(alpha) * t2;
            let mut term = f(1.0);
            let mut sum = term.clone();
            let eps = libm::ldexp(1.0, -(bits as i32));
            let mut j = 1u64;
            loop {
                term = -(term * &x2) / (f(j as f64) * f((j + 1) as f64));
                sum = &sum + &term;
                if term.approx().abs() <= eps * sum.approx().abs() {
                    break;
                }
                j += 1;
            }
            sum
        }
        _ => unreachable!("survival models have no amplitude"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{moments_of_model, Precision};

    fn compare(model: AutocorrModel, order: usize, tol: f64) {
        let exact = moments_of_model(&model, order, Precision::Exact).unwrap().to_f64_vec();
        let numeric = richardson_moments(&model, order, 128).unwrap().to_f64_vec();
        for (n, (x, y)) in exact.iter().zip(&numeric).enumerate() {
            assert!((x - y).abs() <= tol * x.abs().max(1e-300), "{} mu_{n}: {x} vs {y}", model.name());
        }
    }

    #[test]
    fn gaussian_and_semicircle() {
        compare(AutocorrModel::Gaussian { sigma0: 1.3 }, 12, 1e-9);
        compare(AutocorrModel::Semicircle { alpha: 0.8 }, 12, 1e-9);
    }

    #[test]
    fn interpolation_matches_taylor_jet() {
        compare(AutocorrModel::Interpolation { sigma0: 2.0, gamma: 0.5 }, 12, 1e-9);
        compare(AutocorrModel::Interpolation { sigma0: 1.2, gamma: 0.5 }, 12, 1e-9);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), Rational::from(20u8));
        assert_eq!(binomial(10, 0), Rational::ONE);
    }
}
