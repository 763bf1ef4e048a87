//! Energy-constrained classical capacity of multi-mode Gaussian quantum
//! measurement channels, with Monte Carlo validation.
//!
//! - [`symplectic`]: symplectic spectra, bases, complex structures.
//! - [`channel`]: Gaussian POVMs, outcome distributions, sampling, entropy.
//! - [`capacity`]: input-covariance optimizers, threshold check, capacity.
//! - [`montecarlo`]: channel simulation and mutual-information estimators.
//! - [`cli`]: configuration and commands behind the `gmcap` binary.

pub mod capacity;
pub mod channel;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod symplectic;

pub use error::{Error, Result};
