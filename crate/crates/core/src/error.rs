use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or argument lies outside the region where the model is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A result is too large to be represented as an `f64`; use the log-scale accessor.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Invalid simulation configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// `step` was called on an extinct population.
    #[error("population is extinct; zero is absorbing")]
    Absorbed,

    #[error("population cap exceeded: {count} > {cap}")]
    PopulationCapExceeded { count: u64, cap: u64 },

    /// An ODE iterate left the unit interval.
    #[error("numerical divergence at t = {t}: value {value} left [0, 1]")]
    NumericalDivergence { t: f64, value: f64 },

    #[error("precision loss: {0}")]
    PrecisionLoss(String),
}

pub type Result<T> = std::result::Result<T, Error>;
