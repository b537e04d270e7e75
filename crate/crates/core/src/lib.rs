//! Subcritical Markov branching process with logarithmic-mixture reproduction.
//!
//! The number of particles `X(t)` alive at time `t`, started from a single
//! particle, follows a shifted extended Sibuya law whose conditional limit
//! given survival is the logarithmic-series law. This crate evaluates those
//! laws in closed form and checks them against numerical integration of the
//! Kolmogorov equation and exact event-driven simulation.

pub mod closed_form;
pub mod error;
pub mod law;
pub mod magnitude;
pub mod model;
pub mod monte_carlo;
pub mod report;
pub mod rng;
pub mod sampler;
pub mod stats;
pub mod verifier;
pub mod zoo;

pub use closed_form::TimePoint;
pub use error::{Error, Result};
pub use law::DiscreteLaw;
pub use magnitude::{falling_factorial, SignedMagnitude};
pub use model::{alpha_star, solve_alpha_star, ModelParams};
