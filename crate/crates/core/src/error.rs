use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("a Gaussian state needs at least one mode")]
    NoModes,
    #[error("mode {mode} out of range for a {num_modes}-mode state")]
    ModeOutOfRange { mode: usize, num_modes: usize },
    #[error("modes of a two-mode operation must be distinct (got {0} twice)")]
    RepeatedMode(usize),
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("conditional outcome covariance is singular: information is unbounded")]
    UnboundedInformation,
    #[error("unknown scheme id `{0}`")]
    UnknownScheme(String),
    #[error("photon budget {budget} is infeasible for {scheme}: symbol variance would be {symbol_variance}")]
    InfeasibleBudget {
        scheme: &'static str,
        budget: f64,
        symbol_variance: f64,
    },
    #[error("{0} has no free variance to optimize")]
    NoFreeVariance(&'static str),
    #[error("{0} does not depend on the gain")]
    GainInvariant(&'static str),
    #[error("no feasible variance in the search bracket")]
    EmptyFeasibleRegion,
    #[error("no sign change of the difference on [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },
    #[error("{0} samples requested, at least {1} required")]
    TooFewSamples(usize, usize),
    #[error("measured quadratures must sit on distinct modes (port {0} measured twice)")]
    ConflictingMeasurement(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, value: impl Into<f64>, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value: value.into(),
        reason,
    }
}
