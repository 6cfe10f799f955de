//! Markovian coarse-graining of linear overdamped Langevin dynamics.
//!
//! A full system `dq = −Aq dt + √(2/β) dW` is observed through a linear map
//! `ξ = Φq`. Three Markovian surrogates for `ξ` are built ([`model`]), their
//! statistics compared in closed form ([`analytics`]) and by Monte Carlo
//! ([`mc`]).

pub mod analytics;
pub mod csvfmt;
pub mod document;
pub mod error;
pub mod matcore;
pub mod mc;
pub mod model;
pub mod systems;

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use matcore::{Matrix, SymMatrix, Vector};
pub use model::{Approach, CoarseGrainingMap, ReducedModel, SystemSpec};
