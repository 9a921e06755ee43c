//! Histograms and variances of Lanczos coefficient sets.

use crate::coeffs::LanczosCoefficients;
use crate::error::{Error, Result};
use alloc::format;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Binning {
    /// Bin width `2 IQR / n^(1/3)`.
    #[default]
    FreedmanDiaconis,
    Count(usize),
    Width(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// `counts.len() + 1` ascending edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Rows `(bin_lo, bin_hi, count)`.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.edges.windows(2).zip(&self.counts).map(|(e, &c)| (e[0], e[1], c))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = libm::floor(pos) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn histogram(data: &[f64], binning: Binning) -> Result<Histogram> {
    if data.is_empty() {
        return Err(Error::Domain("histogram of an empty set".into()));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("histogram data must be finite".into()));
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let span = hi - lo;
    let bins = match binning {
        _ if span == 0.0 => 1,
        Binning::Count(n) if n > 0 => n,
        Binning::Count(_) => return Err(Error::Domain("bin count must be positive".into())),
        Binning::Width(w) if w > 0.0 => libm::ceil(span / w).max(1.0) as usize,
        Binning::Width(w) => return Err(Error::Domain(format!("bin width must be positive, got {w}"))),
        Binning::FreedmanDiaconis => {
            let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
            let width = 2.0 * iqr / libm::cbrt(sorted.len() as f64);
            if width > 0.0 {
                libm::ceil(span / width).max(1.0) as usize
            } else {
                // fall back to Sturges when half the data sit on one value
                libm::ceil(libm::log2(sorted.len() as f64)) as usize + 1
            }
        }
    };
    let width = if span == 0.0 { 1.0 } else { span / bins as f64 };
    let base = if span == 0.0 { lo - 0.5 } else { lo };
    let edges: Vec<f64> =
        (0..=bins).map(|i| if i == bins && span > 0.0 { hi } else { base + width * i as f64 }).collect();
    let mut counts = alloc::vec![0u64; bins];
    for &x in &sorted {
        let i = (((x - base) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(Histogram { edges, counts })
}

/// Sample mean and unbiased variance (zero for a single value).
pub fn mean_variance(data: &[f64]) -> (f64, f64) {
    let n = data.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = data.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var)
}

/// Coefficient statistics of one parameter regime.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientStats {
    pub realizations: usize,
    /// Mean over realizations of the variance of `{a_n}` within each one.
    pub var_a: f64,
    pub var_b: f64,
    /// Variance of all coefficients pooled across realizations.
    pub pooled_var_a: f64,
    pub pooled_var_b: f64,
    pub per_realization: Vec<(f64, f64)>,
    pub hist_a: Histogram,
    pub hist_b: Histogram,
}

pub fn coefficient_stats(sets: &[LanczosCoefficients], binning: Binning) -> Result<CoefficientStats> {
    if sets.is_empty() {
        return Err(Error::Domain("coefficient statistics need at least one realization".into()));
    }
    let per: Vec<(f64, f64)> = sets
        .iter()
        .map(|lc| (mean_variance(lc.a()).1, if lc.b().is_empty() { 0.0 } else { mean_variance(lc.b()).1 }))
        .collect();
    let all_a: Vec<f64> = sets.iter().flat_map(|lc| lc.a().iter().copied()).collect();
    let all_b: Vec<f64> = sets.iter().flat_map(|lc| lc.b().iter().copied()).collect();
    let r = sets.len() as f64;
    let hist_b = if all_b.is_empty() { histogram(&[0.0], binning)? } else { histogram(&all_b, binning)? };
    Ok(CoefficientStats {
        realizations: sets.len(),
        var_a: per.iter().map(|p| p.0).sum::<f64>() / r,
        var_b: per.iter().map(|p| p.1).sum::<f64>() / r,
        pooled_var_a: mean_variance(&all_a).1,
        pooled_var_b: if all_b.is_empty() { 0.0 } else { mean_variance(&all_b).1 },
        per_realization: per,
        hist_a: histogram(&all_a, binning)?,
        hist_b,
    })
}
