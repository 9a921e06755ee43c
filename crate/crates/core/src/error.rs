use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    Domain(String),
    /// A survival-probability model was passed where an amplitude model is required
    /// (or vice versa).
    VariantMismatch { expected: &'static str, found: &'static str },
    /// Moment sequence is not positive definite at the given Krylov depth.
    NotPositive { depth: usize, value: f64 },
    /// Not enough moments for the requested depth.
    Arity { needed: usize, available: usize },
    /// Working precision could not be raised far enough for results to stabilise.
    PrecisionInsufficient { order: usize, bits: usize },
    /// Operand dimensions disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// Initial state is not normalised.
    NotNormalized { norm: f64 },
    /// A state with a non-trivial complex structure was passed to a real-only path.
    ComplexState,
    /// An internal invariant failed (normalisation drift, basis lookup, ...).
    Integrity(String),
    /// Fit preconditions violated or the fitted model was rejected.
    Fit(String),
    /// Observation window is empty or too short for the requested feature.
    Window(String),
    /// The eigensolver did not converge.
    NoConvergence { index: usize },
    /// Storage for a dense matrix could not be allocated.
    Allocation { elements: usize },
    /// One member of an ensemble failed.
    Realization { seed: u64, source: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::VariantMismatch { expected, found } => {
                write!(f, "variant mismatch: expected {expected} model, got {found}")
            }
            Error::NotPositive { depth, value } => write!(
                f,
                "moment sequence is not positive definite at depth {depth} (b^2 = {value:e}); \
                 request formal mode to continue"
            ),
            Error::Arity { needed, available } => {
                write!(f, "insufficient moment order: need {needed} moments, have {available}")
            }
            Error::PrecisionInsufficient { order, bits } => {
                write!(f, "results for order {order} did not stabilise up to {bits} bits of working precision")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NotNormalized { norm } => {
                write!(f, "initial state is not normalised (norm = {norm})")
            }
            Error::ComplexState => {
                write!(f, "initial state has a relative phase between components; the real path needs a real state")
            }
            Error::Integrity(msg) => write!(f, "integrity error: {msg}"),
            Error::Fit(msg) => write!(f, "fit error: {msg}"),
            Error::Window(msg) => write!(f, "window error: {msg}"),
            Error::NoConvergence { index } => {
                write!(f, "eigensolver failed to converge at index {index}")
            }
            Error::Allocation { elements } => {
                write!(f, "cannot allocate dense storage for {elements} elements")
            }
            Error::Realization { seed, source } => {
                write!(f, "realization with seed {seed} failed: {source}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
