//! Sparse common-support finite-rate-of-innovation (SCS-FRI) estimation of
//! multipath channels observed on several receive antennas.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: dense complex kernels (SVD, TLS, polynomial roots, Bessel
//!   functions, Cholesky).
//! * [`channel`]: the periodic Dirichlet kernel, the spatial correlation model
//!   and random channel/sample synthesis.
//! * [`pilots`]: DFT and Walsh-Hadamard pilot layouts and extraction of the
//!   baseband channel coefficients.
//! * [`estimator`]: block-Toeplitz data matrices, Block-Prony, Block-ESPRIT,
//!   Block-Cadzow, amplitude recovery and the lowpass baseline.
//! * [`bounds`]: Cramér-Rao bounds, deterministic and averaged over Rayleigh
//!   fading.
//! * [`harness`]: configuration, experiment drivers and the CLI.
//!
//! Monte-Carlo loops go through [`parallel::map_trials`], which uses rayon when
//! the `parallel` feature is enabled (the default) and a plain loop otherwise.

pub mod bounds;
pub mod channel;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod numerics;
pub mod parallel;
pub mod pilots;

pub use error::{Error, Result};
pub use numerics::ComplexMatrix;

pub use num_complex::Complex64;
