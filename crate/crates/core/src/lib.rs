//! Simulation and audit toolkit for differentially private protocols in the
//! local and distributed communication models.
//!
//! The crate covers the building blocks (randomized response, Laplace and
//! Gaussian noise), runners for local-model and oblivious point-to-point
//! protocols, secret-shared aggregation, and the statistical audits that
//! check privacy and accuracy claims against exact or Monte Carlo oracles.

pub mod audit;
pub mod distributed;
pub mod domain;
pub mod error;
pub mod local;
pub mod mechanisms;
pub mod montecarlo;
pub mod rng;
pub mod stats;
pub mod symbol;

pub use domain::{BitVector, GapOutcome, GapParams};
pub use error::{Error, Result};
pub use symbol::{Symbol, TapeSpace};
