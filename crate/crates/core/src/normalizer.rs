//! The log normalizing constant `c`, summed as a series over the count
//! variate after integrating out `y` analytically.
//!
//! Term `x` of the series is
//! `Γ(m02 + m12 x) e^{m10 x} / (x! (m01 + m11 x)^{m02 + m12 x})`,
//! accumulated in log space. Summation stops once the terms are decreasing,
//! [`QUIET_RUN`] consecutive terms have each contributed less than `rel_tol`
//! of the running sum, and a geometric bound on the remaining tail is itself
//! below `rel_tol`.

use crate::error::{BpgcError, Result};
use crate::params::Params;
use crate::special::{ln_factorial, ln_gamma, log_add_exp, log_sum_exp};

/// Hard cap on the number of series terms.
pub const MAX_TERMS: usize = 100_000;
/// Consecutive negligible, decreasing terms required before stopping.
pub const QUIET_RUN: usize = 50;
/// Tolerance used by convenience entry points that do not take one.
pub const DEFAULT_REL_TOL: f64 = 1e-15;

/// `c` on log scale together with truncation metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalizer {
    pub c: f64,
    pub terms_used: usize,
    /// Upper bound on the truncated mass relative to the summed mass.
    pub tail_bound: f64,
}

/// Log of the unnormalized marginal mass of `X` at `x`; the marginal pmf is
/// `exp(log_term + c)`.
#[inline]
pub fn log_term(params: &Params, x: f64) -> f64 {
    let shape = params.shape_at(x);
    ln_gamma(shape) + params.m10 * x - shape * params.rate_at(x).ln() - ln_factorial(x)
}

/// The summed series, retaining every term for reuse by the likelihood
/// gradient and the count-marginal tables.
#[derive(Debug, Clone)]
pub struct MarginalSeries {
    log_terms: Vec<f64>,
    log_sum: f64,
    tail_bound: f64,
}

impl MarginalSeries {
    pub fn compute(params: &Params, rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(BpgcError::InvalidTolerance(rel_tol));
        }
        let ln_tol = rel_tol.ln();
        let mut log_terms = Vec::with_capacity(64);
        let mut running = f64::NEG_INFINITY;
        let mut quiet = 0usize;
        let mut tail_bound = f64::INFINITY;

        for x in 0..MAX_TERMS {
            let t = log_term(params, x as f64);
            if !t.is_finite() {
                return Err(BpgcError::Overflow);
            }
            let prev = log_terms.last().copied();
            log_terms.push(t);
            running = log_add_exp(running, t);

            let Some(prev) = prev else { continue };
            let decreasing = t < prev;
            if decreasing && t - running < ln_tol {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if quiet >= QUIET_RUN {
                let ratio = (t - prev).exp();
                let bound = (t - running).exp() * ratio / (1.0 - ratio);
                if bound <= rel_tol {
                    tail_bound = bound;
                    break;
                }
            }
        }
        if !tail_bound.is_finite() {
            return Err(BpgcError::NoConvergence { terms: MAX_TERMS });
        }
        let log_sum = log_sum_exp(&log_terms);
        if !log_sum.is_finite() {
            return Err(BpgcError::Overflow);
        }
        Ok(Self {
            log_terms,
            log_sum,
            tail_bound,
        })
    }

    pub fn normalizer(&self) -> LogNormalizer {
        LogNormalizer {
            c: -self.log_sum,
            terms_used: self.log_terms.len(),
            tail_bound: self.tail_bound,
        }
    }

    pub fn log_terms(&self) -> &[f64] {
        &self.log_terms
    }

    /// Marginal probabilities `P(X = x)` for the summed range of `x`.
    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_terms.iter().map(move |t| (t - self.log_sum).exp())
    }
}

/// Computes `c` to relative tolerance `rel_tol`.
pub fn log_normalizer(params: &Params, rel_tol: f64) -> Result<LogNormalizer> {
    MarginalSeries::compute(params, rel_tol).map(|s| s.normalizer())
}
