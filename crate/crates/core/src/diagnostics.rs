//! Shape, dependence, ordering and regression diagnostics.
//!
//! These are numerical checks over user-supplied grids: nothing here asserts
//! a property beyond the points it was evaluated at.

use crate::density::{
    check_y, conditional_gamma, conditional_poisson_mean, log_pdf, log_pdf_y, log_pmf_x,
    Observation,
};
use crate::error::{BpgcError, Result};
use crate::normalizer::{log_normalizer, LogNormalizer, MarginalSeries, DEFAULT_REL_TOL};
use crate::params::Params;
use crate::quad::{integrate, integrate_half_line};
use crate::special::digamma;

/// Mixed second derivative of the log density, `m12 / y - m11`.
pub fn local_dependence(params: &Params, y: f64) -> Result<f64> {
    check_y(y)?;
    Ok(params.m12 / y - params.m11)
}

fn check_real_count(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(BpgcError::InvalidObservation(format!(
            "count {x} must be finite and non-negative"
        )));
    }
    Ok(())
}

/// `d log f / dx` with `x!` extended to `Γ(x + 1)`.
pub fn score_x(params: &Params, x: f64, y: f64) -> Result<f64> {
    check_real_count(x)?;
    check_y(y)?;
    Ok(-digamma(x + 1.0) + params.log_lambda(y))
}

/// `d log f / dy = (-m01 y + m02 - m11 x y + m12 x - 1) / y`.
pub fn score_y(params: &Params, x: f64, y: f64) -> Result<f64> {
    check_real_count(x)?;
    check_y(y)?;
    Ok((-params.m01 * y + params.m02 - params.m11 * x * y + params.m12 * x - 1.0) / y)
}

/// Interior maximizer in `y` of `f(x, y)` for fixed `x`; `None` when the
/// Gamma conditional has shape at most one and the density peaks at `y -> 0`.
pub fn find_conditional_mode(params: &Params, x: u64) -> Result<Option<f64>> {
    Ok(conditional_gamma(params, x)?.mode())
}

/// Sign counts of a set of values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SignSummary {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
}

impl SignSummary {
    fn push(&mut self, v: f64) {
        if v > 0.0 {
            self.positive += 1;
        } else if v < 0.0 {
            self.negative += 1;
        } else {
            self.zero += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DependenceReport {
    /// Minimum over grid pairs `x1 < x2`, `y1 < y2` of
    /// `log f(x1,y1) + log f(x2,y2) - log f(x1,y2) - log f(x2,y1)`.
    pub min_determinant_stat: f64,
    pub max_determinant_stat: f64,
    pub determinant_signs: SignSummary,
    pub pairs: usize,
    pub is_independent: bool,
    pub is_compound_poisson: bool,
    pub is_log_convex: bool,
    pub is_rr2: bool,
    pub local_dependence_signs: SignSummary,
}

/// Evaluates the 2x2 log-determinant statistic on `{0..=x_max} x y_grid`.
pub fn dependence_report(params: &Params, x_max: u64, y_grid: &[f64]) -> Result<DependenceReport> {
    if x_max < 1 {
        return Err(BpgcError::InvalidConfig("x_max must be at least 1".into()));
    }
    if y_grid.len() < 2 {
        return Err(BpgcError::InvalidConfig("y grid needs at least 2 points".into()));
    }
    let norm = log_normalizer(params, DEFAULT_REL_TOL)?;
    let mut ys = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        check_y(y)?;
        ys.push(y);
    }
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    if ys.len() < 2 {
        return Err(BpgcError::InvalidConfig("y grid is degenerate".into()));
    }

    let rows: Vec<Vec<f64>> = (0..=x_max)
        .map(|x| {
            ys.iter()
                .map(|&y| Observation::new(x, y).map(|o| log_pdf(params, &o, &norm)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut signs = SignSummary::default();
    let mut pairs = 0;
    for x1 in 0..rows.len() {
        for x2 in x1 + 1..rows.len() {
            for j1 in 0..ys.len() {
                for j2 in j1 + 1..ys.len() {
                    let s = rows[x1][j1] + rows[x2][j2] - rows[x1][j2] - rows[x2][j1];
                    // cancellation leaves rounding noise of a few ulps of the terms
                    let scale = rows[x1][j1].abs() + rows[x2][j2].abs() + 1.0;
                    let s = if s.abs() < 64.0 * f64::EPSILON * scale { 0.0 } else { s };
                    min = min.min(s);
                    max = max.max(s);
                    signs.push(s);
                    pairs += 1;
                }
            }
        }
    }

    let mut local = SignSummary::default();
    for &y in &ys {
        local.push(local_dependence(params, y)?);
    }

    Ok(DependenceReport {
        min_determinant_stat: min,
        max_determinant_stat: max,
        determinant_signs: signs,
        pairs,
        is_independent: params.is_independent(),
        is_compound_poisson: params.is_compound_poisson(),
        is_log_convex: params.m11 > 0.0,
        is_rr2: params.m11 > params.m12,
        local_dependence_signs: local,
    })
}

/// Marginal of the continuous variate, with cdf and survival by quadrature.
#[derive(Debug, Clone)]
pub struct ContinuousMarginal {
    params: Params,
    norm: LogNormalizer,
    breaks: Vec<f64>,
}

impl ContinuousMarginal {
    pub fn new(params: &Params, norm: LogNormalizer) -> Result<Self> {
        let series = MarginalSeries::compute(params, DEFAULT_REL_TOL)?;
        let mean: f64 = series
            .probabilities()
            .enumerate()
            .map(|(x, p)| p * params.shape_at(x as f64) / params.rate_at(x as f64))
            .sum();
        Ok(Self {
            params: *params,
            norm,
            breaks: vec![0.25 * mean, mean, 2.0 * mean],
        })
    }

    pub fn pdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        log_pdf_y(&self.params, y, &self.norm).map_or(0.0, f64::exp)
    }

    /// `P(Y <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let mut edges: Vec<f64> = self.breaks.iter().copied().filter(|b| *b < t).collect();
        edges.insert(0, 0.0);
        edges.push(t);
        edges
            .windows(2)
            .map(|w| integrate(|y| self.pdf(y), w[0], w[1], 1e-300, 1e-12).value)
            .sum::<f64>()
            .min(1.0)
    }

    /// `P(Y > t)`, integrated directly over the upper tail.
    pub fn sf(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        let shifted: Vec<f64> = self.breaks.iter().map(|b| b - t).collect();
        integrate_half_line(|u| self.pdf(t + u), &shifted, 1e-12)
            .value
            .min(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UsualOrderPoint {
    pub t: f64,
    pub cdf_x: f64,
    pub cdf_y: f64,
    /// `F_X(t) <= F_Y(t)`
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HazardPoint {
    pub k: u64,
    pub hazard_x: f64,
    pub hazard_y: f64,
    /// `h_X(k) <= h_Y(k)`
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    /// `m12 >= 1` (the remaining sign conditions hold for every valid vector).
    pub conditions_met: bool,
    pub usual: Vec<UsualOrderPoint>,
    pub hazard: Vec<HazardPoint>,
    /// `(k, log f_X(k) - log f_Y(k))` at integer grid points.
    pub log_density_ratio: Vec<(u64, f64)>,
    pub usual_order_holds: bool,
    pub hazard_order_holds: bool,
    pub ratio_decreasing: bool,
    pub ratio_increasing: bool,
}

/// Compares the count marginal with the continuous marginal over `t_grid`:
/// the usual stochastic order, the hazard-rate order at integer points, and
/// monotonicity of the density ratio at integer points.
pub fn ordering_diagnostics(params: &Params, t_grid: &[f64]) -> Result<OrderingReport> {
    if t_grid.is_empty() {
        return Err(BpgcError::InvalidConfig("empty t grid".into()));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(BpgcError::InvalidConfig("t grid must be positive and finite".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(BpgcError::InvalidConfig("t grid must be increasing".into()));
    }
    let norm = log_normalizer(params, DEFAULT_REL_TOL)?;
    let ymarg = ContinuousMarginal::new(params, norm)?;

    let x_cdf = |k: u64| -> f64 {
        (0..=k).map(|j| log_pmf_x(params, j, &norm).exp()).sum::<f64>().min(1.0)
    };
    // survival of the count variate, summed over the upper tail for accuracy
    let x_sf = |k: u64| -> f64 {
        let mut s = 0.0;
        let mut j = k + 1;
        loop {
            let p = log_pmf_x(params, j, &norm).exp();
            s += p;
            if (j as usize) > norm.terms_used && p <= 1e-18 * s.max(1e-300) {
                break;
            }
            if j as usize > norm.terms_used + 100_000 {
                break;
            }
            j += 1;
        }
        s
    };

    let usual: Vec<UsualOrderPoint> = t_grid
        .iter()
        .map(|&t| {
            let cdf_x = x_cdf(t.floor() as u64);
            let cdf_y = ymarg.cdf(t);
            UsualOrderPoint {
                t,
                cdf_x,
                cdf_y,
                holds: cdf_x <= cdf_y,
            }
        })
        .collect();

    let first = t_grid[0].ceil().max(1.0) as u64;
    let last = t_grid[t_grid.len() - 1].floor() as u64;
    let mut hazard = Vec::new();
    let mut ratio = Vec::new();
    for k in first..=last {
        let fx = log_pmf_x(params, k, &norm).exp();
        let fy = ymarg.pdf(k as f64);
        let hx = fx / x_sf(k);
        let hy = fy / ymarg.sf(k as f64);
        hazard.push(HazardPoint {
            k,
            hazard_x: hx,
            hazard_y: hy,
            holds: hx <= hy,
        });
        ratio.push((
            k,
            log_pmf_x(params, k, &norm) - log_pdf_y(params, k as f64, &norm)?,
        ));
    }

    Ok(OrderingReport {
        conditions_met: params.m12 >= 1.0,
        usual_order_holds: usual.iter().all(|p| p.holds),
        hazard_order_holds: hazard.iter().all(|p| p.holds),
        ratio_decreasing: ratio.windows(2).all(|w| w[1].1 <= w[0].1),
        ratio_increasing: ratio.windows(2).all(|w| w[1].1 >= w[0].1),
        usual,
        hazard,
        log_density_ratio: ratio,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionCurves {
    /// `(x, E(Y | X = x))`
    pub y_on_x: Vec<(u64, f64)>,
    /// `(y, E(X | Y = y))`
    pub x_on_y: Vec<(f64, f64)>,
}

/// Both conditional-mean curves: `E(Y|X=x) = (m02 + m12 x) / (m01 + m11 x)`
/// and `E(X|Y=y) = exp(m10 - m11 y + m12 log y)`.
pub fn regression_curves(params: &Params, xs: &[u64], ys: &[f64]) -> Result<RegressionCurves> {
    let y_on_x = xs
        .iter()
        .map(|&x| conditional_gamma(params, x).map(|g| (x, g.mean())))
        .collect::<Result<_>>()?;
    let x_on_y = ys
        .iter()
        .map(|&y| conditional_poisson_mean(params, y).map(|m| (y, m)))
        .collect::<Result<_>>()?;
    Ok(RegressionCurves { y_on_x, x_on_y })
}
