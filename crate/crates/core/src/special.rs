//! Special functions used by the analytic survival-probability models.

use crate::error::{Error, Result};
use alloc::format;

/// Below this argument the removable singularities are evaluated from their
/// Taylor series.
pub const SERIES_CUTOFF: f64 = 1e-4;

/// Two-level form factor of the Gaussian orthogonal ensemble.
///
/// `1 - 2t + t ln(1 + 2t)` for `t <= 1`, `t ln((2t + 1)/(2t - 1)) - 1` beyond.
/// Both branches give `ln 3 - 1` at `t = 1`.
pub fn form_factor_b2(t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("form factor needs finite t >= 0, got {t}")));
    }
    Ok(if t <= 1.0 { b2_short(t) } else { b2_long(t) })
}

/// Short-time branch, valid for `t <= 1`.
pub fn b2_short(t: f64) -> f64 {
    1.0 - 2.0 * t + t * libm::log1p(2.0 * t)
}

/// Long-time branch, valid for `t >= 1`.
pub fn b2_long(t: f64) -> f64 {
    // t ln((2t+1)/(2t-1)) - 1 = atanh(x)/x - 1 with x = 1/(2t)
    let x = 0.5 / t;
    if x < 0.125 {
        let x2 = x * x;
        let mut term = x2;
        let mut sum = 0.0f64;
        let mut k = 1u32;
        while term > 1e-20 * sum.max(f64::MIN_POSITIVE) || k == 1 {
            sum += term / f64::from(2 * k + 1);
            term *= x2;
            k += 1;
            if k > 60 {
                break;
            }
        }
        sum
    } else {
        t * libm::log((2.0 * t + 1.0) / (2.0 * t - 1.0)) - 1.0
    }
}

/// `J1(x) / x`, equal to `1/2` at the origin.
pub fn jinc(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        let x2 = x * x;
        0.5 - x2 / 16.0 + x2 * x2 / 384.0
    } else {
        libm::j1(x) / x
    }
}

/// `(1 - e^{-u}) / u`, equal to `1` at the origin.
pub fn one_minus_exp_over(u: f64) -> f64 {
    if u.abs() < SERIES_CUTOFF {
        1.0 - u / 2.0 + u * u / 6.0
    } else {
        -libm::expm1(-u) / u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn b2_endpoints() {
        assert_eq!(form_factor_b2(0.0).unwrap(), 1.0);
        let at_one = libm::log(3.0) - 1.0;
        assert!((b2_short(1.0) - at_one).abs() < 1e-15);
        assert!((b2_long(1.0) - at_one).abs() < 1e-15);
        let direct = 10.0 * libm::log(21.0 / 19.0) - 1.0;
        assert!((form_factor_b2(10.0).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.000_834_585_569_826).abs() < 1e-15);
    }

    #[test]
    fn b2_series_branch_matches_log_form() {
        for &t in &[4.01, 5.0, 8.0] {
            let direct = t * libm::log((2.0 * t + 1.0) / (2.0 * t - 1.0)) - 1.0;
            assert!((b2_long(t) - direct).abs() < 1e-14, "t = {t}");
        }
    }

    #[test]
    fn b2_rejects_negative() {
        assert!(form_factor_b2(-0.1).is_err());
        assert!(form_factor_b2(f64::NAN).is_err());
    }

    #[test]
    fn removable_singularities() {
        assert_eq!(jinc(0.0), 0.5);
        let x = 2e-4;
        assert!((jinc(x) - libm::j1(x) / x).abs() < 1e-15);
        assert!((jinc(x * 0.4) - 0.5).abs() < 1e-8);
        assert_eq!(one_minus_exp_over(0.0), 1.0);
        assert!((one_minus_exp_over(2e-4) - (1.0 - libm::exp(-2e-4)) / 2e-4).abs() < 1e-12);
    }
}
