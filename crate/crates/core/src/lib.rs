#![no_std]
extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod analysis;
pub mod coeffs;
pub mod eigen;
pub mod error;
pub mod evolution;
pub mod hamiltonians;
pub mod matrix;
pub mod models;
pub mod moments;
pub mod numdiff;
pub mod numeric;
pub mod recursion;
pub mod special;
pub mod tridiag;

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use coeffs::LanczosCoefficients;
pub use error::{Error, Result};
pub use evolution::{
    evolve_amplitudes, long_time_average, spread_complexity, KrylovAmplitudes, KrylovEvolution, LongTimeAverage,
    SpreadComplexitySeries,
};
pub use hamiltonians::{
    build_spin_sector, domain_wall_state, ldos_summary, sample_goe, SectorHamiltonian, SpinChainSpec, StateVector,
};
pub use matrix::SymMatrix;
pub use models::{
    eval_autocorr, eval_b2, eval_frm_sp, eval_spin_sp, eval_survival, moments_of_model, AutocorrModel, LdosSummary,
    Precision, SpinSpParams,
};
pub use moments::{MomentSequence, MomentValues};
pub use recursion::{lanczos_to_moments, moments_to_lanczos, moments_to_lanczos_with, RecursionOptions};
pub use tridiag::{householder_hessenberg, lanczos_tridiagonalize};
