use crate::error::{Error, Result};
use alloc::format;
use alloc::vec::Vec;

/// Diagonal (`a_n`) and off-diagonal (`b_n`) entries of the Hamiltonian in the
/// Krylov basis of a given initial state.
///
/// `a` holds `a_0 .. a_{K-1}` and `b` holds `b_1 .. b_{K-1}`, so `b[0]` is
/// `b_1`, the standard deviation of the local density of states. Coefficients
/// are positive unless the set was produced in formal mode, where a negative
/// entry carries the sign of a negative `b_n^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct LanczosCoefficients {
    a: Vec<f64>,
    b: Vec<f64>,
    formal: bool,
}

impl LanczosCoefficients {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Domain("Krylov dimension must be at least 1".into()));
        }
        if b.len() + 1 != a.len() {
            return Err(Error::DimensionMismatch { expected: a.len() - 1, found: b.len() });
        }
        if let Some(x) = a.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite a_n = {x}")));
        }
        if let Some((n, x)) = b.iter().enumerate().find(|(_, x)| !(**x > 0.0) || !x.is_finite()) {
            return Err(Error::Domain(format!("b_{} = {x} must be positive and finite", n + 1)));
        }
        Ok(Self { a, b, formal: false })
    }

    /// Coefficients from a non positive-definite moment sequence. Negative `b_n`
    /// encode negative `b_n^2`; nothing built from them is a physical state.
    pub fn new_formal(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() || b.len() + 1 != a.len() {
            return Err(Error::DimensionMismatch { expected: a.len().saturating_sub(1), found: b.len() });
        }
        Ok(Self { a, b, formal: true })
    }

    /// Krylov dimension `K`.
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn is_formal(&self) -> bool {
        self.formal
    }

    /// `b_1`, or zero for a one-dimensional Krylov space.
    pub fn b1(&self) -> f64 {
        self.b.first().copied().unwrap_or(0.0)
    }

    /// Keep the first `k` Krylov levels.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.clamp(1, self.dim());
        Self { a: self.a[..k].to_vec(), b: self.b[..k - 1].to_vec(), formal: self.formal }
    }

    /// Rows `(n, a_n, b_n)` with `b_0 = 0` by convention.
    pub fn rows(&self) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.a.iter().enumerate().map(move |(n, &a)| {
            let b = if n == 0 { 0.0 } else { self.b[n - 1] };
            (n, a, b)
        })
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.a, self.b)
    }
}
