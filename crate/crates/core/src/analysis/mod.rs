//! Fits, statistics, and feature detection on coefficient profiles and series.

pub mod ensemble;
pub mod features;
pub mod fit;
pub mod stats;

pub use ensemble::{ensemble_average, ensemble_reduce, EnsembleSeries};
pub use features::{correlation_hole, detect_peak_plateau, CorrelationHole, PeakPlateau};
pub use fit::{
    fit_bn_linear, fit_bn_power, fit_decay_exponent, fit_goe_profile, Baseline, DecayOptions, FitModel, FitResult,
};
pub use stats::{coefficient_stats, histogram, Binning, CoefficientStats, Histogram};
