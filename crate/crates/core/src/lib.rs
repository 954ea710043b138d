//! Parameter tuning for the firefly algorithm.
//!
//! Draws (θ, β, γ) settings with Monte Carlo, scrambled Sobol or Latin
//! hypercube sampling, runs the firefly algorithm on six benchmark problems
//! for each setting, and compares the tuners with classical hypothesis tests.

pub mod analysis;
pub mod benchmarks;
pub mod error;
pub mod firefly;
pub mod sampling;
pub mod stats;
pub mod tuning;

pub use error::{Error, Result};
