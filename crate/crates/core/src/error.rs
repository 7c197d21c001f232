use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A copula or mechanism parameter outside its admissible set.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid marginal: {0}")]
    InvalidMarginal(String),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("state {state} out of range 1..={states} for series {series}")]
    StateOutOfRange { series: usize, state: usize, states: usize },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    /// An observed transition has (numerically) zero probability under the parameters.
    #[error("observation at t={t} has probability {prob:e} under the parameters")]
    ZeroProbability { t: usize, prob: f64 },

    #[error(
        "state {state} of series {series} never occurs in the data; collapse it into a neighbouring state before fitting"
    )]
    UnobservedState { series: usize, state: usize },

    #[error("stationary distribution undefined: pi11 = {0}")]
    DegenerateMechanism(f64),

    #[error("state space of {0} joint states is too large for dense evaluation")]
    StateSpaceTooLarge(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
