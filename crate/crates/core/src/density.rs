//! Joint, marginal and conditional densities.
//!
//! All functions return log-scale values. The joint density is
//! `f(x, y) = (x! y)^{-1} exp(c + m10 x - m01 y - m11 x y + m02 log y + m12 x log y)`
//! for `x = 0, 1, ...` and `y > 0`.

use crate::error::{BpgcError, Result};
use crate::normalizer::{log_term, LogNormalizer, MarginalSeries, MAX_TERMS, QUIET_RUN};
use crate::params::Params;
use crate::special::{gamma_ln_pdf, ln_factorial};

/// Largest accepted count value.
pub const MAX_COUNT: u64 = i32::MAX as u64;
/// Smallest accepted continuous value.
pub const MIN_POSITIVE_Y: f64 = 1e-300;

/// One `(x, y)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    x: u64,
    y: f64,
}

impl Observation {
    pub fn new(x: u64, y: f64) -> Result<Self> {
        if x > MAX_COUNT {
            return Err(BpgcError::InvalidObservation(format!(
                "count {x} exceeds {MAX_COUNT}"
            )));
        }
        check_y(y)?;
        Ok(Self { x, y })
    }

    /// Validates a count supplied as a real number.
    pub fn from_reals(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || x < 0.0 || x.fract() != 0.0 {
            return Err(BpgcError::InvalidObservation(format!(
                "count {x} is not a non-negative integer"
            )));
        }
        Self::new(x as u64, y)
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }
}

pub(crate) fn check_y(y: f64) -> Result<()> {
    if !y.is_finite() || y < MIN_POSITIVE_Y {
        return Err(BpgcError::InvalidObservation(format!(
            "continuous value {y} is not a finite number >= {MIN_POSITIVE_Y:e}"
        )));
    }
    Ok(())
}

/// Log joint density at `obs`.
pub fn log_pdf(params: &Params, obs: &Observation, norm: &LogNormalizer) -> f64 {
    let x = obs.x as f64;
    let y = obs.y;
    let ln_y = y.ln();
    -ln_factorial(x) - ln_y + norm.c + params.m10 * x
        - params.m01 * y
        - params.m11 * x * y
        + params.m02 * ln_y
        + params.m12 * x * ln_y
}

/// Log marginal pmf of the count variate.
pub fn log_pmf_x(params: &Params, x: u64, norm: &LogNormalizer) -> f64 {
    log_term(params, x as f64) + norm.c
}

/// Log marginal density of the continuous variate:
/// `(m02 - 1) log y + λ(y) + c - m01 y` with `λ(y)` the Poisson conditional mean.
pub fn log_pdf_y(params: &Params, y: f64, norm: &LogNormalizer) -> Result<f64> {
    check_y(y)?;
    let lambda = params.log_lambda(y).exp();
    Ok((params.m02 - 1.0) * y.ln() + lambda + norm.c - params.m01 * y)
}

/// `E(X | Y = y) = exp(m10 - m11 y + m12 log y)`, the Poisson mean.
pub fn conditional_poisson_mean(params: &Params, y: f64) -> Result<f64> {
    check_y(y)?;
    Ok(params.log_lambda(y).exp())
}

/// Gamma law of `Y | X = x` in shape/rate form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaConditional {
    pub shape: f64,
    pub rate: f64,
}

impl GammaConditional {
    pub fn ln_pdf(&self, y: f64) -> f64 {
        gamma_ln_pdf(y, self.shape, self.rate)
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    /// Interior mode, if the shape exceeds one.
    pub fn mode(&self) -> Option<f64> {
        (self.shape > 1.0).then(|| (self.shape - 1.0) / self.rate)
    }
}

/// Shape `m02 + m12 x`, rate `m01 + m11 x`.
pub fn conditional_gamma(params: &Params, x: u64) -> Result<GammaConditional> {
    if x > MAX_COUNT {
        return Err(BpgcError::InvalidObservation(format!(
            "count {x} exceeds {MAX_COUNT}"
        )));
    }
    let x = x as f64;
    Ok(GammaConditional {
        shape: params.shape_at(x),
        rate: params.rate_at(x),
    })
}

/// `P(X <= x)`.
pub fn cdf_x(params: &Params, x: u64, norm: &LogNormalizer) -> Result<f64> {
    if x as usize > MAX_TERMS {
        return Err(BpgcError::NoConvergence { terms: x as usize });
    }
    let s: f64 = (0..=x).map(|k| log_pmf_x(params, k, norm).exp()).sum();
    Ok(s.min(1.0))
}

/// Smallest `x` with `P(X <= x) >= u`, for `u` in `(0, 1)`.
///
/// Once the pmf has become negligible beyond the summed range of the
/// normalizer, rounding may keep the accumulated cdf just below `u`; the
/// current count is returned in that case.
pub fn quantile_x(params: &Params, u: f64, norm: &LogNormalizer) -> Result<u64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(BpgcError::InvalidDistributionParameter(format!(
            "quantile level {u} outside (0, 1)"
        )));
    }
    let mut acc = 0.0;
    for k in 0..MAX_TERMS as u64 {
        let p = log_pmf_x(params, k, norm).exp();
        acc += p;
        if acc >= u {
            return Ok(k);
        }
        if k as usize >= norm.terms_used + QUIET_RUN && p < f64::EPSILON * 1e-3 {
            return Ok(k);
        }
    }
    Err(BpgcError::NoConvergence { terms: MAX_TERMS })
}

/// Cumulative table of the count marginal for repeated inversion.
#[derive(Debug, Clone)]
pub struct CountMarginal {
    cdf: Vec<f64>,
}

impl CountMarginal {
    pub fn new(params: &Params, rel_tol: f64) -> Result<Self> {
        let series = MarginalSeries::compute(params, rel_tol)?;
        let mut acc = 0.0;
        let cdf = series
            .probabilities()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { cdf })
    }

    /// Inverse cdf; levels above the last tabulated cdf value (a gap no
    /// larger than the series tail bound) map to the last tabulated count.
    pub fn quantile(&self, u: f64) -> u64 {
        let idx = self.cdf.partition_point(|&c| c < u);
        idx.min(self.cdf.len() - 1) as u64
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// `sum_x x P(X = x)` over the tabulated range.
    pub fn mean(&self) -> f64 {
        let mut prev = 0.0;
        let mut m = 0.0;
        for (x, &c) in self.cdf.iter().enumerate() {
            m += x as f64 * (c - prev);
            prev = c;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalizer::log_normalizer;
    use crate::special::{ln_gamma, poisson_ln_pmf};
    use std::f64::consts::E;

    fn setup(raw: [f64; 5]) -> (Params, LogNormalizer) {
        let p = Params::from_array(raw).unwrap();
        let n = log_normalizer(&p, 1e-15).unwrap();
        (p, n)
    }

    #[test]
    fn independence_point_value() {
        let (p, n) = setup([1.0, 1.0, 0.0, 1.0, 0.0]);
        let obs = Observation::new(0, 1.0).unwrap();
        let lp = log_pdf(&p, &obs, &n);
        assert!((lp - (-E - 1.0)).abs() < 1e-13);
        let lpx = log_pmf_x(&p, 3, &n);
        assert!((lpx - poisson_ln_pmf(3, 1.0)).abs() < 1e-13);
        let lpy = log_pdf_y(&p, 2.0, &n).unwrap();
        assert!((lpy + 2.0).abs() < 1e-13);
    }

    #[test]
    fn conditional_gamma_arithmetic() {
        let (p, _) = setup([1.0, 1.0, 0.1, 1.0, 0.1]);
        let g0 = conditional_gamma(&p, 0).unwrap();
        assert_eq!((g0.shape, g0.rate), (1.0, 1.0));
        let g5 = conditional_gamma(&p, 5).unwrap();
        assert!((g5.shape - 1.5).abs() < 1e-15 && (g5.rate - 1.5).abs() < 1e-15);
    }

    #[test]
    fn conditional_decomposition() {
        let (p, n) = setup([1.0, 1.0, 0.1, 1.0, 0.1]);
        for (x, y) in [(1u64, 0.5), (2, 2.0), (4, 1.0)] {
            let obs = Observation::new(x, y).unwrap();
            let lhs = log_pdf(&p, &obs, &n) - log_pmf_x(&p, x, &n);
            let g = conditional_gamma(&p, x).unwrap();
            assert!((lhs.exp() - g.ln_pdf(y).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn poisson_mean_special_values() {
        let (p, _) = setup([1.0, 1.0, 0.0, 1.0, 0.0]);
        for y in [0.1, 1.0, 7.0] {
            assert!((conditional_poisson_mean(&p, y).unwrap() - E).abs() < 1e-14);
        }
        let (p, _) = setup([1.0, 1.0, 1.0, 1.0, 1.0]);
        assert!((conditional_poisson_mean(&p, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let (p, _) = setup([1.0, 1.0, 0.1, 1.0, 0.1]);
        let expected = (1.0 - 0.3 + 0.1 * 3f64.ln()).exp();
        assert!((conditional_poisson_mean(&p, 3.0).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_observations() {
        assert!(Observation::new(1, 0.0).is_err());
        assert!(Observation::new(1, -2.0).is_err());
        assert!(Observation::new(1, f64::INFINITY).is_err());
        assert!(Observation::new(1, 1e-301).is_err());
        assert!(Observation::new(MAX_COUNT + 1, 1.0).is_err());
        assert!(Observation::from_reals(1.5, 1.0).is_err());
        assert!(Observation::from_reals(-1.0, 1.0).is_err());
        assert!(Observation::from_reals(2.0, 1.0).is_ok());
        let (p, n) = setup([1.0, 1.0, 0.0, 1.0, 0.0]);
        assert!(log_pdf_y(&p, -1.0, &n).is_err());
        assert!(conditional_poisson_mean(&p, 0.0).is_err());
    }

    #[test]
    fn quantiles_match_poisson_in_independence_case() {
        let (p, n) = setup([1.0, 1.0, 0.0, 1.0, 0.0]);
        let mean = E;
        let poisson_cdf = |k: u64| -> f64 {
            (0..=k)
                .map(|j| (j as f64 * mean.ln() - mean - ln_gamma(j as f64 + 1.0)).exp())
                .sum()
        };
        for u in [1e-12, 0.01, 0.2, 0.5, 0.8, 0.99, 0.999999] {
            let q = quantile_x(&p, u, &n).unwrap();
            assert!(poisson_cdf(q) >= u - 1e-14);
            if q > 0 {
                assert!(poisson_cdf(q - 1) < u);
            }
        }
        assert_eq!(quantile_x(&p, 1e-300, &n).unwrap(), 0);
        assert!(quantile_x(&p, 0.0, &n).is_err());
        assert!(quantile_x(&p, 1.0, &n).is_err());
    }

    #[test]
    fn cdf_monotone_and_table_consistent() {
        let (p, n) = setup([1.0, 1.0, 1.0, 1.0, 1.0]);
        let mut prev = 0.0;
        for x in 0..=100 {
            let c = cdf_x(&p, x, &n).unwrap();
            assert!(c >= prev);
            prev = c;
        }
        assert!((prev - 1.0).abs() < 1e-12);
        let table = CountMarginal::new(&p, 1e-15).unwrap();
        for u in [0.05, 0.3, 0.6, 0.95, 0.9999] {
            assert_eq!(table.quantile(u), quantile_x(&p, u, &n).unwrap());
        }
        // quantile(cdf(x) + eps) steps past x
        for x in 0..5 {
            let c = cdf_x(&p, x, &n).unwrap();
            assert_eq!(quantile_x(&p, c - 1e-9, &n).unwrap(), x);
            assert_eq!(quantile_x(&p, c + 1e-9, &n).unwrap(), x + 1);
        }
    }
}
