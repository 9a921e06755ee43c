//! Closed-form auto-correlation and survival-probability models.

use crate::error::{Error, Result};
use crate::moments::MomentSequence;
use crate::numeric::{big_from_rational, rational_from_f64, Rational};
use crate::special::{form_factor_b2, jinc, one_minus_exp_over};
use alloc::format;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Parameters of the phenomenological disorder-averaged survival probability of
/// a spin chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSpParams {
    pub sigma0: f64,
    /// Sector dimension.
    pub dim: usize,
    /// Dimensionless tail weight of `g(t)`.
    pub a: f64,
    /// Long-time saturation value, in `(0, 1]`.
    pub fbar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutocorrModel {
    /// `S(t) = exp(-sigma0^2 t^2 / 2)`.
    Gaussian { sigma0: f64 },
    /// `S(t) = 1 - sigma0^2 t^2 / 2`; a formal model with no positive LDOS.
    TruncatedQuadratic { sigma0: f64 },
    /// Crossover from quadratic to exponential decay,
    /// `S(t) = exp[G^2/(4 s^2) - sqrt(G^4/(16 s^4) + G^2 t^2/4)]`.
    Interpolation { sigma0: f64, gamma: f64 },
    /// `S(t) = J1(2 alpha t) / (alpha t)`, LDOS supported on `[-2 alpha, 2 alpha]`.
    Semicircle { alpha: f64 },
    /// Ensemble-averaged survival probability of a GOE quench.
    FrmSurvival { dim: usize },
    /// Disorder-averaged survival probability of a spin chain.
    SpinPhenomenological(SpinSpParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Exact rational moments.
    Exact,
    /// Moments rounded to this many bits.
    Bits(usize),
}

/// Mean and width of a local density of states.
#[derive(Debug, Clone, PartialEq)]
pub struct LdosSummary {
    pub e0: f64,
    pub sigma0: f64,
    pub moments: Option<Vec<f64>>,
}

impl AutocorrModel {
    pub fn name(&self) -> &'static str {
        match self {
            AutocorrModel::Gaussian { .. } => "gaussian",
            AutocorrModel::TruncatedQuadratic { .. } => "truncated-quadratic",
            AutocorrModel::Interpolation { .. } => "interpolation",
            AutocorrModel::Semicircle { .. } => "semicircle",
            AutocorrModel::FrmSurvival { .. } => "frm",
            AutocorrModel::SpinPhenomenological(_) => "spin-phenomenological",
        }
    }

    /// Whether the model describes an amplitude `S(t)` rather than a probability.
    pub fn is_amplitude(&self) -> bool {
        !matches!(self, AutocorrModel::FrmSurvival { .. } | AutocorrModel::SpinPhenomenological(_))
    }

    /// Formal models have no positive-definite LDOS.
    pub fn is_formal(&self) -> bool {
        matches!(self, AutocorrModel::TruncatedQuadratic { .. })
    }

    /// Width of the LDOS, the natural inverse time scale.
    pub fn sigma0(&self) -> f64 {
        match *self {
            AutocorrModel::Gaussian { sigma0 }
            | AutocorrModel::TruncatedQuadratic { sigma0 }
            | AutocorrModel::Interpolation { sigma0, .. } => sigma0,
            AutocorrModel::Semicircle { alpha } => alpha,
            AutocorrModel::FrmSurvival { dim } => libm::sqrt(2.0 * dim as f64) / 2.0,
            AutocorrModel::SpinPhenomenological(p) => p.sigma0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive and finite, got {x}")))
            }
        };
        let dim_ok = |dim: usize| {
            if dim >= 2 {
                Ok(())
            } else {
                Err(Error::Domain(format!("dimension must be at least 2, got {dim}")))
            }
        };
        match *self {
            AutocorrModel::Gaussian { sigma0 } | AutocorrModel::TruncatedQuadratic { sigma0 } => {
                positive("sigma0", sigma0)
            }
            AutocorrModel::Interpolation { sigma0, gamma } => {
                positive("sigma0", sigma0)?;
                positive("gamma", gamma)
            }
            AutocorrModel::Semicircle { alpha } => positive("alpha", alpha),
            AutocorrModel::FrmSurvival { dim } => dim_ok(dim),
            AutocorrModel::SpinPhenomenological(p) => {
                positive("sigma0", p.sigma0)?;
                dim_ok(p.dim)?;
                if !(p.a >= 0.0 && p.a.is_finite()) {
                    return Err(Error::Domain(format!("A must be non-negative and finite, got {}", p.a)));
                }
                if !(p.fbar > 0.0 && p.fbar <= 1.0) {
                    return Err(Error::Domain(format!("fbar must lie in (0, 1], got {}", p.fbar)));
                }
                Ok(())
            }
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be finite, got {t}")))
    }
}

/// Auto-correlation `S(t)` of an amplitude model.
pub fn eval_autocorr(model: &AutocorrModel, t: f64) -> Result<Complex64> {
    check_time(t)?;
    model.validate()?;
    let re = match *model {
        AutocorrModel::Gaussian { sigma0 } => libm::exp(-0.5 * sigma0 * sigma0 * t * t),
        AutocorrModel::TruncatedQuadratic { sigma0 } => 1.0 - 0.5 * sigma0 * sigma0 * t * t,
        AutocorrModel::Interpolation { sigma0, gamma } => {
            let c = gamma * gamma / (4.0 * sigma0 * sigma0);
            let qt2 = gamma * gamma * t * t / 4.0;
            // c - sqrt(c^2 + q t^2) without cancellation
            libm::exp(-qt2 / (c + libm::sqrt(c * c + qt2)))
        }
        AutocorrModel::Semicircle { alpha } => 2.0 * jinc(2.0 * alpha * t),
        _ => return Err(Error::VariantMismatch { expected: "amplitude", found: model.name() }),
    };
    Ok(Complex64::new(re, 0.0))
}

/// Two-level form factor of the GOE.
pub fn eval_b2(t: f64) -> Result<f64> {
    form_factor_b2(t)
}

/// Ensemble-averaged long-time survival probability `3 / (N + 2)` of GOE quenches.
pub fn frm_saturation(dim: usize) -> f64 {
    3.0 / (dim as f64 + 2.0)
}

/// Ensemble-averaged GOE survival probability.
pub fn eval_frm_sp(dim: usize, t: f64) -> Result<f64> {
    eval_frm_sp_with(dim, t, true)
}

/// [`eval_frm_sp`] with the level-correlation term optionally switched off.
pub fn eval_frm_sp_with(dim: usize, t: f64, form_factor: bool) -> Result<f64> {
    if dim < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {dim}")));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    let n = dim as f64;
    let eta = libm::sqrt(2.0 * n);
    let fbar = frm_saturation(dim);
    let j = jinc(eta * t);
    let b2 = if form_factor { form_factor_b2(eta * t / (4.0 * n))? } else { 0.0 };
    Ok((1.0 - fbar) / (n - 1.0) * (4.0 * n * j * j - b2) + fbar)
}

/// The smooth part of [`eval_frm_sp`] that remains once the Bessel term has
/// decayed: `F_bar - (1 - F_bar) B2(eta t / 4N) / (N - 1)`.
pub fn frm_background(dim: usize, t: f64) -> Result<f64> {
    let n = dim as f64;
    let fbar = frm_saturation(dim);
    let b2 = form_factor_b2(libm::sqrt(2.0 * n) * t / (4.0 * n))?;
    Ok(fbar - (1.0 - fbar) / (n - 1.0) * b2)
}

/// `g(t) = exp(-s^2 t^2) + A (1 - exp(-s^2 t^2)) / (s^2 t^2)`.
pub fn spin_g(p: &SpinSpParams, t: f64) -> f64 {
    let u = p.sigma0 * p.sigma0 * t * t;
    libm::exp(-u) + p.a * one_minus_exp_over(u)
}

/// Disorder-averaged survival probability of a spin chain. The prefactor uses
/// `1 - fbar` so that `F(0) = 1` and `F(t -> inf) = fbar`.
pub fn eval_spin_sp(p: &SpinSpParams, t: f64) -> Result<f64> {
    AutocorrModel::SpinPhenomenological(*p).validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
    }
    let n = p.dim as f64;
    let g = spin_g(p, t) / (1.0 + p.a);
    let b2 = form_factor_b2(p.sigma0 * t / n)?;
    Ok((1.0 - p.fbar) / (n - 1.0) * (n * g - b2) + p.fbar)
}

/// `F(t)` for any model: `|S(t)|^2` for amplitudes, the model itself otherwise.
pub fn eval_survival(model: &AutocorrModel, t: f64) -> Result<f64> {
    match model {
        AutocorrModel::FrmSurvival { dim } => eval_frm_sp(*dim, t),
        AutocorrModel::SpinPhenomenological(p) => eval_spin_sp(p, t),
        _ => eval_autocorr(model, t).map(|s| s.norm_sqr()),
    }
}

/// LDOS moments `mu_0 ..= mu_order` of an amplitude model.
///
/// All models here have rational Taylor coefficients in their (f64) parameters,
/// so moments are generated exactly and then rounded if `precision` asks for it.
pub fn moments_of_model(model: &AutocorrModel, order: usize, precision: Precision) -> Result<MomentSequence> {
    if !model.is_amplitude() {
        return Err(Error::VariantMismatch { expected: "amplitude", found: model.name() });
    }
    model.validate()?;
    if order < 2 {
        return Err(Error::Domain(format!("moment order must be at least 2, got {order}")));
    }
    if let Precision::Bits(bits) = precision {
        if order > 20 && bits < 128 {
            return Err(Error::PrecisionInsufficient { order, bits });
        }
    }
    let half = order / 2;
    let even: Vec<Rational> = match *model {
        AutocorrModel::Gaussian { sigma0 } => {
            let s2 = square(sigma0);
            let mut out = Vec::with_capacity(half + 1);
            let mut m = Rational::ONE;
            for k in 0..=half {
                out.push(m.clone());
                m = m * Rational::from(2 * k as u64 + 1) * &s2;
            }
            out
        }
        AutocorrModel::Semicircle { alpha } => {
            let a2 = square(alpha);
            let mut out = Vec::with_capacity(half + 1);
            let mut catalan = Rational::ONE;
            let mut pow = Rational::ONE;
            for k in 0..=half {
                out.push(&catalan * &pow);
                // C_{k+1} = C_k 2(2k+1)/(k+2)
                let k = k as u64;
                catalan = catalan * Rational::from(2 * (2 * k + 1)) / Rational::from(k + 2);
                pow = pow * &a2;
            }
            out
        }
        AutocorrModel::TruncatedQuadratic { sigma0 } => {
            let mut out = alloc::vec![Rational::ZERO; half + 1];
            out[0] = Rational::ONE;
            out[1] = square(sigma0);
            out
        }
        AutocorrModel::Interpolation { sigma0, gamma } => interpolation_even_moments(sigma0, gamma, half),
        _ => unreachable!(),
    };
    let mut mu = alloc::vec![Rational::ZERO; order + 1];
    for (k, m) in even.into_iter().enumerate() {
        mu[2 * k] = m;
    }
    match precision {
        Precision::Exact => MomentSequence::exact(mu),
        Precision::Bits(bits) => MomentSequence::float(mu.iter().map(|m| big_from_rational(m, bits)).collect(), bits),
    }
}

fn square(x: f64) -> Rational {
    let r = rational_from_f64(x);
    &r * &r
}

/// Even moments of the interpolation model from its Taylor jet in `u = t^2`.
///
/// With `c = G^2/(4 s^2)` and `q = G^2/4`, the exponent is `c - r(u)` where
/// `r^2 = c^2 + q u`; the series of `r` follows from squaring, the series of the
/// exponential from `k e_k = sum_j j g_j e_{k-j}`, and `mu_2k = (-1)^k (2k)! e_k`.
fn interpolation_even_moments(sigma0: f64, gamma: f64, half: usize) -> Vec<Rational> {
    let g2 = square(gamma);
    let c = &g2 / (Rational::from(4u8) * square(sigma0));
    let q = &g2 / Rational::from(4u8);
    let two_c = &c * Rational::from(2u8);

    let mut r = alloc::vec![Rational::ZERO; half + 1];
    r[0] = c.clone();
    for k in 1..=half {
        let mut acc = if k == 1 { q.clone() } else { Rational::ZERO };
        for j in 1..k {
            acc -= &r[j] * &r[k - j];
        }
        r[k] = acc / &two_c;
    }
    let mut e = alloc::vec![Rational::ZERO; half + 1];
    e[0] = Rational::ONE;
    for k in 1..=half {
        let mut acc = Rational::ZERO;
        for j in 1..=k {
            // g_j = -r_j
            acc -= Rational::from(j as u64) * &r[j] * &e[k - j];
        }
        e[k] = acc / Rational::from(k as u64);
    }
    let mut fact = Rational::ONE;
    let mut out = Vec::with_capacity(half + 1);
    for (k, ek) in e.into_iter().enumerate() {
        if k > 0 {
            fact = fact * Rational::from((2 * k - 1) as u64) * Rational::from((2 * k) as u64);
        }
        let m = &fact * ek;
        out.push(if k % 2 == 0 { m } else { -m });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amplitudes_at_origin() {
        for m in [
            AutocorrModel::Gaussian { sigma0: 1.0 },
            AutocorrModel::TruncatedQuadratic { sigma0: 3.0 },
            AutocorrModel::Interpolation { sigma0: 2.0, gamma: 0.5 },
            AutocorrModel::Semicircle { alpha: 1.0 },
        ] {
            let s = eval_autocorr(&m, 0.0).unwrap();
            assert_eq!(s, Complex64::new(1.0, 0.0), "{}", m.name());
        }
        let s = eval_autocorr(&AutocorrModel::Semicircle { alpha: 1.0 }, 1e-7).unwrap();
        assert!((s.re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn interpolation_starts_gaussian() {
        let m = AutocorrModel::Interpolation { sigma0: 2.0, gamma: 0.5 };
        let t = 0.01;
        let s = eval_autocorr(&m, t).unwrap().re;
        let g = libm::exp(-0.5 * 4.0 * t * t);
        // the first correction is s^6 t^4 / (2 G^2) = 1.28e-6
        let quartic = 64.0 * t.powi(4) / (2.0 * 0.25);
        assert!((s / g - 1.0 - quartic).abs() < 2e-8);
    }

    #[test]
    fn rejects_bad_input() {
        let g = AutocorrModel::Gaussian { sigma0: 1.0 };
        assert!(matches!(eval_autocorr(&g, f64::NAN), Err(Error::Domain(_))));
        let frm = AutocorrModel::FrmSurvival { dim: 10 };
        assert!(matches!(eval_autocorr(&frm, 1.0), Err(Error::VariantMismatch { .. })));
        assert!(eval_autocorr(&AutocorrModel::Gaussian { sigma0: -1.0 }, 1.0).is_err());
        assert!(eval_frm_sp(1, 0.0).is_err());
        assert!(moments_of_model(&frm, 4, Precision::Exact).is_err());
        assert!(matches!(
            moments_of_model(&g, 30, Precision::Bits(64)),
            Err(Error::PrecisionInsufficient { order: 30, bits: 64 })
        ));
    }

    #[test]
    fn b2_values() {
        assert_eq!(eval_b2(0.0).unwrap(), 1.0);
        assert!((eval_b2(1.0).unwrap() - 0.098_612_288_668_109_7).abs() < 1e-15);
        assert!(eval_b2(-1.0).is_err());
    }

    #[test]
    fn frm_limits() {
        assert!((eval_frm_sp(1000, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let late = eval_frm_sp(1000, 1e7).unwrap();
        assert!((late - 3.0 / 1002.0).abs() < 1e-9);
        // correlation hole around the Heisenberg time
        let mut min = f64::INFINITY;
        for i in 1..2000 {
            let t = i as f64 * 0.1;
            min = min.min(eval_frm_sp(1000, t).unwrap());
        }
        assert!(min < 3.0 / 1002.0);
    }

    #[test]
    fn spin_sp_limits() {
        let p = SpinSpParams { sigma0: 1.3, dim: 3432, a: 0.7, fbar: 0.02 };
        assert!((eval_spin_sp(&p, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((eval_spin_sp(&p, 1e9).unwrap() - 0.02).abs() < 1e-6);
        let q = SpinSpParams { a: 0.0, sigma0: 1.0, ..p };
        let t = 1.5;
        let expected = (1.0 - q.fbar) / (q.dim as f64 - 1.0)
            * (q.dim as f64 * libm::exp(-t * t) - eval_b2(t / q.dim as f64).unwrap())
            + q.fbar;
        assert!((eval_spin_sp(&q, t).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn closed_form_moments() {
        let mu = moments_of_model(&AutocorrModel::Gaussian { sigma0: 1.0 }, 6, Precision::Exact).unwrap();
        assert_eq!(mu.to_f64_vec(), [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0]);
        let mu = moments_of_model(&AutocorrModel::Semicircle { alpha: 1.0 }, 8, Precision::Exact).unwrap();
        assert_eq!(mu.to_f64_vec(), [1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 5.0, 0.0, 14.0]);
        let mu = moments_of_model(&AutocorrModel::TruncatedQuadratic { sigma0: 2.0 }, 6, Precision::Exact).unwrap();
        assert_eq!(mu.to_f64_vec(), [1.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0]);
        let mu =
            moments_of_model(&AutocorrModel::Interpolation { sigma0: 2.0, gamma: 0.5 }, 4, Precision::Exact).unwrap();
        assert_eq!(mu.get(2), Some(4.0));
    }

    #[test]
    fn interpolation_fourth_moment_by_hand() {
        // mu_4 = 3 s^4 + 12 s^6 / G^2 from expanding the exponent to order t^4
        let (s, g) = (1.5f64, 0.5f64);
        let mu = moments_of_model(&AutocorrModel::Interpolation { sigma0: s, gamma: g }, 4, Precision::Exact).unwrap();
        let expected = 3.0 * s.powi(4) + 12.0 * s.powi(6) / (g * g);
        assert!((mu.get(4).unwrap() / expected - 1.0).abs() < 1e-15);
    }
}
