//! Least-squares fits of coefficient profiles and decay laws.

use crate::error::{Error, Result};
use alloc::format;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// `b_n = n1 n^n2`, fitted in log-log space.
    Power,
    /// `b_n = n1 (N - n)^n2`, fitted in log-log space.
    GoeProfile,
    /// `b_n = n1 n`, a slope through the origin.
    Linear,
    /// `F(t) = n1 t^-n2`, so `n2` is the decay exponent.
    PowerDecay,
}

impl FitModel {
    pub fn tag(&self) -> &'static str {
        match self {
            FitModel::Power => "n1*n^n2",
            FitModel::GoeProfile => "n1*(N-n)^n2",
            FitModel::Linear => "linear",
            FitModel::PowerDecay => "power-decay",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: FitModel,
    pub n1: f64,
    pub n2: f64,
    /// RMS residual: in log space for the log-log fits, in `b` for `Linear`.
    pub rms: f64,
    /// Inclusive window in `n` or `t`.
    pub window: (f64, f64),
    pub points: usize,
    /// Quadratic departure in log-log space, for decay fits.
    pub curvature: Option<f64>,
}

/// Fewest points a fit accepts.
pub const MIN_POINTS: usize = 3;

/// Decay fits whose log-log curvature exceeds this are rejected as not a power law.
pub const CURVATURE_LIMIT: f64 = 0.5;

/// Default power-fit window `[2, K/2]` for `b_1 .. b_{K-1}`.
pub fn default_window(b_len: usize) -> (usize, usize) {
    (2, b_len.div_ceil(2).max(2))
}

/// Points `(n, b_n)` with `n` in the inclusive window; `b[0]` is `b_1`.
fn window_points(b: &[f64], window: (usize, usize)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    if lo == 0 || hi < lo || hi > b.len() {
        return Err(Error::Fit(format!("window [{lo}, {hi}] outside 1..={}", b.len())));
    }
    let pts: Vec<(f64, f64)> = (lo..=hi).map(|n| (n as f64, b[n - 1])).collect();
    if pts.len() < MIN_POINTS {
        return Err(Error::Fit(format!("{} points in window, need {MIN_POINTS}", pts.len())));
    }
    Ok(pts)
}

/// Ordinary least squares `y = c0 + c1 x`, summed in sorted order so the result
/// does not depend on how the points were presented.
fn line(points: &mut [(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < MIN_POINTS {
        return Err(Error::Fit(format!("{} points, need {MIN_POINTS}", points.len())));
    }
    points.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let c1 = sxy / sxx;
    let c0 = my - c1 * mx;
    let rms = libm::sqrt(
        points
            .iter()
            .map(|p| {
                let r = p.1 - c0 - c1 * p.0;
                r * r
            })
            .sum::<f64>()
            / n,
    );
    Ok((c0, c1, rms))
}

fn log_points(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    points
        .iter()
        .map(|&(x, y)| {
            if x > 0.0 && y > 0.0 {
                Ok((libm::log(x), libm::log(y)))
            } else {
                Err(Error::Fit(format!("non-positive value ({x}, {y}) in a log-log fit")))
            }
        })
        .collect()
}

/// `b_n = n1 n^n2` over `window` (default `[2, K/2]`).
pub fn fit_bn_power(b: &[f64], window: Option<(usize, usize)>) -> Result<FitResult> {
    let window = window.unwrap_or_else(|| default_window(b.len()));
    let pts = window_points(b, window)?;
    let mut lp = log_points(&pts)?;
    let (c0, c1, rms) = line(&mut lp)?;
    Ok(FitResult {
        model: FitModel::Power,
        n1: libm::exp(c0),
        n2: c1,
        rms,
        window: (window.0 as f64, window.1 as f64),
        points: pts.len(),
        curvature: None,
    })
}

/// `b_n = n1 n` through the origin over `window` (default `[2, K/2]`).
pub fn fit_bn_linear(b: &[f64], window: Option<(usize, usize)>) -> Result<FitResult> {
    let window = window.unwrap_or_else(|| default_window(b.len()));
    let mut pts = window_points(b, window)?;
    pts.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let slope = sxy / sxx;
    let rms = libm::sqrt(
        pts.iter()
            .map(|p| {
                let r = p.1 - slope * p.0;
                r * r
            })
            .sum::<f64>()
            / pts.len() as f64,
    );
    Ok(FitResult {
        model: FitModel::Linear,
        n1: slope,
        n2: 1.0,
        rms,
        window: (window.0 as f64, window.1 as f64),
        points: pts.len(),
        curvature: None,
    })
}

/// Levels kept clear of the end of the chain by the default GOE window. There
/// `b_n` is a chi variable with few degrees of freedom and its logarithm sits
/// visibly below `log sqrt((N - n)/2)`.
pub const GOE_TAIL: usize = 10;

/// `b_n = n1 (N - n)^n2` over `window` (default: `1 <= n <= N - GOE_TAIL`, or
/// every `n < N` for short chains).
pub fn fit_goe_profile(b: &[f64], dim: usize, window: Option<(usize, usize)>) -> Result<FitResult> {
    let last = if dim > 2 * GOE_TAIL { dim - GOE_TAIL } else { dim.saturating_sub(1) };
    let window = window.unwrap_or((1, b.len().min(last)));
    if window.1 >= dim {
        return Err(Error::Fit(format!("window end {} must stay below N = {dim}", window.1)));
    }
    let pts: Vec<(f64, f64)> = window_points(b, window)?.into_iter().map(|(n, y)| (dim as f64 - n, y)).collect();
    let mut lp = log_points(&pts)?;
    let (c0, c1, rms) = line(&mut lp)?;
    Ok(FitResult {
        model: FitModel::GoeProfile,
        n1: libm::exp(c0),
        n2: c1,
        rms,
        window: (window.0 as f64, window.1 as f64),
        points: pts.len(),
        curvature: None,
    })
}

/// What is subtracted from `F` before a decay fit.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Baseline {
    #[default]
    None,
    Constant(f64),
    /// One value per time point.
    Series(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DecayOptions {
    pub baseline: Baseline,
    /// Fit only the local maxima, the envelope of an oscillating decay.
    pub envelope: bool,
}

/// `F(t) ~ t^-gamma` on `t in [lo, hi]`, fitted in log-log space.
///
/// The fit is rejected when a quadratic in `log t` departs from the line by
/// more than [`CURVATURE_LIMIT`] over the window.
pub fn fit_decay_exponent(times: &[f64], f: &[f64], window: (f64, f64), opts: &DecayOptions) -> Result<FitResult> {
    if times.len() != f.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: f.len() });
    }
    let base = |i: usize| match &opts.baseline {
        Baseline::None => Ok(0.0),
        Baseline::Constant(c) => Ok(*c),
        Baseline::Series(s) => {
            s.get(i).copied().ok_or(Error::DimensionMismatch { expected: times.len(), found: s.len() })
        }
    };
    let mut residual = Vec::with_capacity(f.len());
    for (i, &y) in f.iter().enumerate() {
        residual.push(y - base(i)?);
    }
    let inside: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= window.0 && times[i] <= window.1).collect();
    let chosen: Vec<usize> = if opts.envelope {
        inside
            .iter()
            .copied()
            .filter(|&i| i > 0 && i + 1 < f.len() && residual[i] > residual[i - 1] && residual[i] >= residual[i + 1])
            .collect()
    } else {
        inside
    };
    if chosen.len() < MIN_POINTS {
        return Err(Error::Fit(format!("{} usable points in [{}, {}]", chosen.len(), window.0, window.1)));
    }
    if let Some(&i) = chosen.iter().find(|&&i| !(residual[i] > 0.0)) {
        return Err(Error::Fit(format!("non-positive F = {} at t = {}", residual[i], times[i])));
    }
    let pts: Vec<(f64, f64)> = chosen.iter().map(|&i| (times[i], residual[i])).collect();
    let mut lp = log_points(&pts)?;
    let (c0, c1, rms) = line(&mut lp)?;
    let curvature = curvature(&lp)?;
    if curvature > CURVATURE_LIMIT {
        return Err(Error::Fit(format!("not a power law: log-log curvature {curvature:.3} exceeds {CURVATURE_LIMIT}")));
    }
    Ok(FitResult {
        model: FitModel::PowerDecay,
        n1: libm::exp(c0),
        n2: -c1,
        rms,
        window,
        points: pts.len(),
        curvature: Some(curvature),
    })
}

/// `|c2| (x_hi - x_lo)^2 / 4` for the least-squares parabola `c0 + c1 x + c2 x^2`:
/// how far the best parabola bends away from its chord over the window.
fn curvature(points: &[(f64, f64)]) -> Result<f64> {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    // centred powers keep the normal equations well conditioned
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for &(x, y) in points {
        let d = x - mx;
        let mut p = 1.0;
        for (k, sk) in s.iter_mut().enumerate() {
            *sk += p;
            if k < 3 {
                t[k] += p * y;
            }
            p *= d;
        }
    }
    let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
    let det = det3(&m);
    if det.abs() <= f64::EPSILON * s[0] * s[2] * s[4] {
        return Err(Error::Fit("too few distinct abscissae for the curvature test".into()));
    }
    let mut m2 = m;
    for r in 0..3 {
        m2[r][2] = t[r];
    }
    let c2 = det3(&m2) / det;
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    Ok(c2.abs() * (hi - lo) * (hi - lo) / 4.0)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_square_root() {
        let b: Vec<f64> = (1..=40).map(|n| libm::sqrt(n as f64)).collect();
        let fit = fit_bn_power(&b, None).unwrap();
        assert!((fit.n1 - 1.0).abs() < 1e-12);
        assert!((fit.n2 - 0.5).abs() < 1e-12);
        assert!(fit.rms < 1e-12);
        assert_eq!(fit.window, (2.0, 20.0));
    }

    #[test]
    fn slope_through_origin() {
        let b: Vec<f64> = (1..=10).map(|n| 3.0 * n as f64).collect();
        let fit = fit_bn_linear(&b, Some((1, 10))).unwrap();
        assert!((fit.n1 - 3.0).abs() < 1e-14);
    }

    #[test]
    fn goe_profile_exact() {
        let dim = 200;
        let b: Vec<f64> = (1..dim).map(|n| libm::sqrt((dim - n) as f64 / 2.0)).collect();
        let fit = fit_goe_profile(&b, dim, None).unwrap();
        assert!((fit.n1 - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((fit.n2 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let b = [1.0, 2.0, 3.0];
        assert!(matches!(fit_bn_power(&b, Some((1, 2))), Err(Error::Fit(_))));
        assert!(fit_bn_power(&b, Some((2, 5))).is_err());
        assert!(fit_bn_power(&[1.0, -1.0, 2.0], Some((1, 3))).is_err());
    }

    #[test]
    fn cubic_decay() {
        let t: Vec<f64> = (1..=50).map(|i| i as f64 * 0.5).collect();
        let f: Vec<f64> = t.iter().map(|x| x.powi(-3)).collect();
        let fit = fit_decay_exponent(&t, &f, (1.0, 20.0), &DecayOptions::default()).unwrap();
        assert!((fit.n2 - 3.0).abs() < 1e-12);
        assert!(fit.curvature.unwrap() < 1e-10);
    }

    #[test]
    fn gaussian_is_not_a_power_law() {
        let t: Vec<f64> = (1..=100).map(|i| i as f64 * 0.03).collect();
        let f: Vec<f64> = t.iter().map(|x| libm::exp(-x * x)).collect();
        let err = fit_decay_exponent(&t, &f, (0.5, 3.0), &DecayOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Fit(_)));
    }

    #[test]
    fn baseline_and_envelope() {
        let t: Vec<f64> = (1..=2000).map(|i| i as f64 * 0.01).collect();
        let f: Vec<f64> = t.iter().map(|x| 0.1 + libm::cos(5.0 * x).powi(2) / x.powi(3)).collect();
        let opts = DecayOptions { baseline: Baseline::Constant(0.1), envelope: true };
        let fit = fit_decay_exponent(&t, &f, (1.0, 20.0), &opts).unwrap();
        assert!((fit.n2 - 3.0).abs() < 0.02, "{}", fit.n2);
        let err = fit_decay_exponent(&t, &f, (1.0, 20.0), &DecayOptions { baseline: Baseline::Constant(0.2), ..opts });
        assert!(err.is_err());
    }
}
