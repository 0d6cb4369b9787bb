//! The bivariate Poisson–Gamma conditionals distribution.
//!
//! `(X, Y)` with `X | Y = y ~ Poisson(exp(m10 - m11 y + m12 log y))` and
//! `Y | X = x ~ Gamma(shape m02 + m12 x, rate m01 + m11 x)`. The crate
//! evaluates the joint, marginal and conditional densities with a series
//! normalizing constant, provides dependence and ordering diagnostics, draws
//! samples (Gibbs and exact), fits the parameters by constrained maximum
//! likelihood, and runs a two-sample Fasano–Franceschini goodness-of-fit test.

pub mod dataset;
pub mod density;
pub mod diagnostics;
pub mod error;
pub mod fit;
pub mod gof;
pub mod normalizer;
pub mod params;
pub mod quad;
pub mod sample;
pub mod special;

pub use dataset::{Dataset, SuffStats};
pub use density::{
    cdf_x, conditional_gamma, conditional_poisson_mean, log_pdf, log_pdf_y, log_pmf_x,
    quantile_x, CountMarginal, GammaConditional, Observation,
};
pub use diagnostics::{
    dependence_report, find_conditional_mode, local_dependence, ordering_diagnostics,
    regression_curves, score_x, score_y, ContinuousMarginal, DependenceReport, OrderingReport,
    RegressionCurves,
};
pub use error::{BpgcError, Result};
pub use fit::{
    fit_mle, gradient, log_likelihood, observed_information, standard_errors, MleConfig,
    MleResult, StartStrategy,
};
pub use gof::{ff_statistic, ff_test, fitted_gof, FfStatistic, GofConfig, GofResult};
pub use normalizer::{log_normalizer, LogNormalizer, MarginalSeries};
pub use params::{Params, HOSPITAL_ESTIMATES, PARAM_NAMES, SIMULATION_CASES};
pub use sample::{exact_sample, gibbs_sample, GibbsConfig, Generator, SampleBatch};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
