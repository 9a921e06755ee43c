//! Pointwise ensemble averages with a fixed reduction order.

use crate::error::{Error, Result};
use crate::hamiltonians::realization_seed;
use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSeries {
    /// Ascending.
    pub seeds: Vec<u64>,
    pub members: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Standard error of the mean, zero for a single member.
    pub stderr: Vec<f64>,
}

impl EnsembleSeries {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Averages member series, summing in ascending seed order whatever order they
/// arrive in.
pub fn ensemble_reduce(mut members: Vec<(u64, Vec<f64>)>) -> Result<EnsembleSeries> {
    if members.is_empty() {
        return Err(Error::Domain("an ensemble needs at least one realization".into()));
    }
    members.sort_by_key(|m| m.0);
    let len = members[0].1.len();
    if let Some((seed, m)) = members.iter().find(|m| m.1.len() != len) {
        return Err(Error::Realization {
            seed: *seed,
            source: Box::new(Error::DimensionMismatch { expected: len, found: m.len() }),
        });
    }
    if members.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::Domain(format!("duplicate seeds in ensemble of {}", members.len())));
    }
    let r = members.len() as f64;
    let mut mean = alloc::vec![0.0; len];
    for (_, m) in &members {
        mean.iter_mut().zip(m).for_each(|(a, x)| *a += x);
    }
    mean.iter_mut().for_each(|a| *a /= r);
    let mut stderr = alloc::vec![0.0; len];
    if members.len() > 1 {
        for (_, m) in &members {
            stderr.iter_mut().zip(m.iter().zip(&mean)).for_each(|(s, (x, mu))| *s += (x - mu) * (x - mu));
        }
        stderr.iter_mut().for_each(|s| *s = libm::sqrt(*s / (r - 1.0) / r));
    }
    let (seeds, members) = members.into_iter().unzip();
    Ok(EnsembleSeries { seeds, members, mean, stderr })
}

/// Runs `count` realizations with seeds `master, master + 1, ...` one after
/// another and averages them. The first failure aborts, naming its seed.
pub fn ensemble_average<F>(master: u64, count: usize, mut job: F) -> Result<EnsembleSeries>
where
    F: FnMut(u64) -> Result<Vec<f64>>,
{
    let mut members = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let seed = realization_seed(master, i);
        let series = job(seed).map_err(|e| Error::Realization { seed, source: Box::new(e) })?;
        members.push((seed, series));
    }
    ensemble_reduce(members)
}
