//! Two-site entanglement dynamics in quasi-periodic XXZ chains.
//!
//! Engines:
//! * [`propagator`]: exact Krylov evolution in the zero-magnetisation sector.
//! * [`freefermion`]: correlation-matrix evolution for the non-interacting chain.
//! * [`lbit`]: closed-form correlators of the phenomenological ℓ-bit model.
//!
//! [`ensemble`] averages any of them over disorder realisations.

pub mod ensemble;
pub mod error;
pub mod freefermion;
pub mod lbit;
mod linalg;
pub mod model;
pub mod observables;
pub mod propagator;
pub mod spectral;

pub use error::{Error, Result};
