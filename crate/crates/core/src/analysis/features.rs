//! Peak and plateau of a spread-complexity series, and the correlation hole of a
//! survival probability.

use crate::error::{Error, Result};
use crate::evolution::SpreadComplexitySeries;
use alloc::format;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakPlateau {
    pub c_peak: f64,
    pub t_peak: f64,
    pub c_plateau: f64,
    pub ratio: f64,
}

/// Plateau is the mean of the grid points in the last decade `t >= t_max/10`;
/// the peak is the maximum before that window.
pub fn detect_peak_plateau(series: &SpreadComplexitySeries) -> Result<PeakPlateau> {
    peak_plateau(&series.times, &series.c)
}

pub fn peak_plateau(times: &[f64], c: &[f64]) -> Result<PeakPlateau> {
    if times.len() != c.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: c.len() });
    }
    let t_max = *times.last().ok_or_else(|| Error::Window("empty series".into()))?;
    let cut = t_max / 10.0;
    let split = times.partition_point(|&t| t < cut);
    let tail = &c[split..];
    if split == 0 || tail.len() < 2 {
        return Err(Error::Window(format!(
            "series needs points on both sides of t_max/10 = {cut} ({split} before, {} after)",
            tail.len()
        )));
    }
    let c_plateau = tail.iter().sum::<f64>() / tail.len() as f64;
    let (i_peak, &c_peak) =
        c[..split]
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |best, (i, v)| if *v > *best.1 { (i, v) } else { best });
    if !(c_plateau > 0.0) {
        return Err(Error::Window(format!("plateau {c_plateau} is not positive")));
    }
    Ok(PeakPlateau { c_peak, t_peak: times[i_peak], c_plateau, ratio: c_peak / c_plateau })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationHole {
    pub f_min: f64,
    pub t_min: f64,
    /// `f_min / f_bar`; below one when a hole exists.
    pub depth: f64,
}

/// Deepest point of `f` over `t >= t_from`, relative to the saturation `f_bar`.
pub fn correlation_hole(times: &[f64], f: &[f64], t_from: f64, f_bar: f64) -> Result<CorrelationHole> {
    let (t_min, f_min) = times
        .iter()
        .zip(f)
        .filter(|(t, _)| **t >= t_from)
        .fold((f64::NAN, f64::INFINITY), |best, (&t, &v)| if v < best.1 { (t, v) } else { best });
    if t_min.is_nan() {
        return Err(Error::Window(format!("no points after t = {t_from}")));
    }
    Ok(CorrelationHole { f_min, t_min, depth: f_min / f_bar })
}
