use thiserror::Error;

use crate::fit::MleResult;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum BpgcError {
    #[error("parameter {0} must be strictly positive")]
    NonPositiveParameter(&'static str),
    #[error("interaction parameter {0} must be non-negative")]
    NegativeInteraction(&'static str),
    #[error("parameter {0} is not finite")]
    NonFiniteParameter(&'static str),
    #[error(
        "normalizing series diverges: need m11 > 0, or m11 = 0 with m12 < 1, \
         or m11 = 0, m12 = 1 and m10 < log(m01)"
    )]
    DivergentSeries,
    #[error("series did not converge within {terms} terms")]
    NoConvergence { terms: usize },
    #[error("non-finite intermediate value while summing the normalizing series")]
    Overflow,
    #[error("invalid observation: {0}")]
    InvalidObservation(String),
    #[error("invalid tolerance {0}: must lie in (0, 1)")]
    InvalidTolerance(f64),
    #[error("invalid distribution parameter: {0}")]
    InvalidDistributionParameter(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("{n} observations are too few to identify five parameters (need at least {min})")]
    NonIdentifiable { n: usize, min: usize },
    #[error("maximum likelihood iterations did not converge")]
    DidNotConverge(Box<MleResult>),
    #[error("observed information matrix is singular")]
    SingularInformation,
    #[error("optimum on the boundary for {0:?}; standard errors withheld")]
    BoundaryOptimum(Vec<&'static str>),
    #[error("each sample needs at least 2 points (got {0} and {1})")]
    TooFewPoints(usize, usize),
    #[error("all points in the pooled sample are identical")]
    DegenerateSample,
}

pub type Result<T> = std::result::Result<T, BpgcError>;
