//! Maximum likelihood under `m10, m01, m02 > 0` and `m11, m12 >= 0`.
//!
//! The likelihood depends on the data only through [`SuffStats`]. It is
//! maximized with an adaptive log barrier: an outer loop shrinks the barrier
//! weight `mu`, and each inner problem
//! `max l(m) + mu [log m10 + log m01 + log m02 + log(m11 + eps) + log(m12 + eps)]`
//! is solved by BFGS with a backtracking line search that only accepts
//! strictly feasible points (including convergence of the normalizing
//! series). Interactions that end up numerically at zero with an outward
//! pointing gradient are clamped to the boundary.

use nalgebra::{SMatrix, SVector};

use crate::dataset::{Dataset, SuffStats};
use crate::error::{BpgcError, Result};
use crate::normalizer::{MarginalSeries, DEFAULT_REL_TOL};
use crate::params::{Params, PARAM_NAMES};
use crate::special::digamma;

pub type Vector5 = SVector<f64, 5>;
pub type Matrix5 = SMatrix<f64, 5, 5>;

/// Fewest observations accepted by [`fit_mle`].
pub const MIN_OBSERVATIONS: usize = 5;
/// Softening for the non-strict constraints `m11, m12 >= 0`.
pub const BARRIER_SOFTENING: f64 = 1e-10;
/// Interactions below this value are candidates for clamping to zero.
pub const CLAMP_THRESHOLD: f64 = 1e-8;
/// Scaled-gradient threshold for declaring the final estimate converged.
pub const CONVERGED_GRAD_NORM: f64 = 1e-4;

const STRICT: [bool; 5] = [true, true, false, true, false];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartStrategy {
    /// Start from [`MleConfig::init`].
    #[default]
    Fixed,
    /// Method-of-moments guess; see [`moment_start`].
    Moments,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleConfig {
    pub init: [f64; 5],
    pub start: StartStrategy,
    pub barrier_mu0: f64,
    pub barrier_shrink: f64,
    pub outer_iters: usize,
    pub inner_tol: f64,
    pub max_inner_iters: usize,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            init: [1.0; 5],
            start: StartStrategy::Fixed,
            barrier_mu0: 1.0,
            barrier_shrink: 0.2,
            outer_iters: 12,
            inner_tol: 1e-8,
            max_inner_iters: 500,
        }
    }
}

impl MleConfig {
    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(BpgcError::InvalidConfig(msg.to_string()));
        if !(self.barrier_mu0 > 0.0 && self.barrier_mu0.is_finite()) {
            return bad("barrier_mu0 must be positive");
        }
        if !(self.barrier_shrink > 0.0 && self.barrier_shrink < 1.0) {
            return bad("barrier_shrink must lie in (0, 1)");
        }
        if self.outer_iters == 0 || self.max_inner_iters == 0 {
            return bad("iteration limits must be positive");
        }
        if !(self.inner_tol > 0.0) {
            return bad("inner_tol must be positive");
        }
        Ok(())
    }
}

/// One outer (barrier) round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterStep {
    pub mu: f64,
    pub loglik: f64,
    /// Infinity norm of the unpenalized gradient divided by `n`.
    pub grad_norm: f64,
    pub inner_iters: usize,
    /// Whether the penalized gradient reached `inner_tol`.
    pub inner_converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleResult {
    pub estimates: Params,
    pub loglik: f64,
    pub converged: bool,
    pub trace: Vec<OuterStep>,
    pub std_errors: Option<[f64; 5]>,
    /// Interactions clamped to zero at the end.
    pub clamped: Vec<&'static str>,
    /// Infinity norm of the unpenalized gradient over the free coordinates,
    /// divided by `n`.
    pub grad_norm: f64,
    pub n: usize,
}

/// Likelihood and gradient from a single pass over the normalizing series.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub loglik: f64,
    pub gradient: [f64; 5],
    /// `c`, for reuse by callers.
    pub log_normalizer: f64,
}

/// Evaluates the log likelihood and its gradient for data summarized by
/// `stats` (`n` observations with parameter-free part `base_measure`).
pub fn evaluate(params: &Params, stats: &SuffStats, n: usize, base_measure: f64) -> Result<Evaluation> {
    let series = MarginalSeries::compute(params, DEFAULT_REL_TOL)?;
    let c = series.normalizer().c;
    let n_f = n as f64;

    // E[g_j(X)] under the count marginal; dc/dθ_j = -E[g_j]
    let mut expect = [0.0; 5];
    for (x, p) in series.probabilities().enumerate() {
        if p == 0.0 {
            continue;
        }
        let x = x as f64;
        let shape = params.shape_at(x);
        let rate = params.rate_at(x);
        let mean_y = shape / rate;
        let mean_ln_y = digamma(shape) - rate.ln();
        expect[0] += p * x;
        expect[1] -= p * mean_y;
        expect[2] -= p * x * mean_y;
        expect[3] += p * mean_ln_y;
        expect[4] += p * x * mean_ln_y;
    }

    let t = [
        stats.sum_x,
        -stats.sum_y,
        -stats.sum_xy,
        stats.sum_log_y,
        stats.sum_x_log_y,
    ];
    let m = params.to_array();
    let linear: f64 = m.iter().zip(&t).map(|(a, b)| a * b).sum();
    let loglik = -base_measure + n_f * c + linear;
    let mut gradient = [0.0; 5];
    for j in 0..5 {
        gradient[j] = t[j] - n_f * expect[j];
    }
    if !loglik.is_finite() || gradient.iter().any(|g| !g.is_finite()) {
        return Err(BpgcError::Overflow);
    }
    Ok(Evaluation {
        loglik,
        gradient,
        log_normalizer: c,
    })
}

pub fn log_likelihood(params: &Params, data: &Dataset) -> Result<f64> {
    evaluate(params, data.suffstats(), data.n(), data.base_measure()).map(|e| e.loglik)
}

/// Analytic gradient of the log likelihood in canonical parameter order.
pub fn gradient(params: &Params, data: &Dataset) -> Result<[f64; 5]> {
    gradient_from_suffstats(params, data.suffstats(), data.n())
}

/// Gradient for arbitrary sufficient statistics (which need not come from
/// an actual sample).
pub fn gradient_from_suffstats(params: &Params, stats: &SuffStats, n: usize) -> Result<[f64; 5]> {
    evaluate(params, stats, n, 0.0).map(|e| e.gradient)
}

/// Method-of-moments starting point: `m10 = log mean(x)`, Gamma rate and
/// shape from the mean and variance of `y`, interactions `0.01`; every
/// coordinate is kept inside `[0.05, 50]`.
pub fn moment_start(data: &Dataset) -> [f64; 5] {
    let n = data.n() as f64;
    let s = data.suffstats();
    let mean_x = s.sum_x / n;
    let mean_y = s.sum_y / n;
    let var_y = data
        .observations()
        .iter()
        .map(|o| (o.y() - mean_y).powi(2))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let guard = |v: f64| if v.is_finite() { v.clamp(0.05, 50.0) } else { 1.0 };
    let rate = guard(mean_y / var_y);
    [guard(mean_x.ln()), rate, 0.01, guard(rate * mean_y), 0.01]
}

fn barrier(theta: &Vector5) -> (f64, Vector5) {
    let mut value = 0.0;
    let mut grad = Vector5::zeros();
    for j in 0..5 {
        let slack = if STRICT[j] {
            theta[j]
        } else {
            theta[j] + BARRIER_SOFTENING
        };
        value += slack.ln();
        grad[j] = 1.0 / slack;
    }
    (value, grad)
}

/// Penalized objective to minimize: `-(l + mu B) / n`. Frozen coordinates
/// get a zero gradient, so BFGS never moves them.
struct Objective<'a> {
    data: &'a Dataset,
    mu: f64,
    frozen: [bool; 5],
}

struct Point {
    theta: Vector5,
    value: f64,
    grad: Vector5,
    eval: Evaluation,
}

impl Objective<'_> {
    fn at(&self, theta: Vector5) -> Option<Point> {
        let params = Params::new(theta[0], theta[1], theta[2], theta[3], theta[4]).ok()?;
        let eval = evaluate(
            &params,
            self.data.suffstats(),
            self.data.n(),
            self.data.base_measure(),
        )
        .ok()?;
        let n = self.data.n() as f64;
        let (b, bg) = barrier(&theta);
        let value = -(eval.loglik + self.mu * b) / n;
        let mut grad = -(Vector5::from(eval.gradient) + self.mu * bg) / n;
        for j in (0..5).filter(|&j| self.frozen[j]) {
            grad[j] = 0.0;
        }
        value.is_finite().then_some(Point {
            theta,
            value,
            grad,
            eval,
        })
    }
}

/// Largest step along `d` keeping every slack positive, shortened to 99%.
fn max_feasible_step(theta: &Vector5, d: &Vector5) -> f64 {
    let mut alpha = f64::INFINITY;
    for j in 0..5 {
        if d[j] < 0.0 {
            let slack = if STRICT[j] {
                theta[j]
            } else {
                theta[j] + BARRIER_SOFTENING
            };
            alpha = alpha.min(-slack / d[j]);
        }
    }
    0.99 * alpha
}

struct InnerOutcome {
    point: Point,
    iters: usize,
    converged: bool,
}

fn minimize_inner(obj: &Objective<'_>, start: Point, tol: f64, max_iters: usize) -> InnerOutcome {
    let mut cur = start;
    let mut h = Matrix5::identity();
    let mut scaled = false;
    for it in 0..max_iters {
        if cur.grad.amax() < tol {
            return InnerOutcome {
                point: cur,
                iters: it,
                converged: true,
            };
        }
        let mut dir = -(h * cur.grad);
        let mut slope = cur.grad.dot(&dir);
        if !(slope < 0.0) {
            h = Matrix5::identity();
            scaled = false;
            dir = -cur.grad;
            slope = cur.grad.dot(&dir);
        }
        let mut alpha = max_feasible_step(&cur.theta, &dir).min(1.0);
        let mut accepted = None;
        for _ in 0..60 {
            if let Some(trial) = obj.at(cur.theta + alpha * dir) {
                let sufficient = trial.value <= cur.value + 1e-4 * alpha * slope;
                // near the optimum f differences drown in rounding; accept
                // steps that hold f and shrink the gradient
                let roundoff = trial.value <= cur.value + 1e-13 * cur.value.abs().max(1.0)
                    && trial.grad.amax() < cur.grad.amax();
                if sufficient || roundoff {
                    accepted = Some(trial);
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some(next) = accepted else {
            if scaled {
                // retry once along steepest descent with a fresh metric
                h = Matrix5::identity();
                scaled = false;
                continue;
            }
            return InnerOutcome {
                point: cur,
                iters: it,
                converged: false,
            };
        };
        let s = next.theta - cur.theta;
        let y = next.grad - cur.grad;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            if !scaled {
                h = Matrix5::identity() * (sy / y.dot(&y));
                scaled = true;
            }
            let rho = 1.0 / sy;
            let i = Matrix5::identity();
            let left = i - rho * s * y.transpose();
            let right = i - rho * y * s.transpose();
            h = left * h * right + rho * s * s.transpose();
        }
        let stalled = s.amax() <= 1e-15 * cur.theta.amax().max(1.0);
        cur = next;
        if stalled {
            let converged = cur.grad.amax() < tol.max(1e-7);
            return InnerOutcome {
                point: cur,
                iters: it + 1,
                converged,
            };
        }
    }
    let converged = cur.grad.amax() < tol;
    InnerOutcome {
        point: cur,
        iters: max_iters,
        converged,
    }
}

fn free_grad_norm(grad: &[f64; 5], clamped: &[usize], n: usize) -> f64 {
    grad.iter()
        .enumerate()
        .filter(|(j, _)| !clamped.contains(j))
        .map(|(_, g)| g.abs())
        .fold(0.0, f64::max)
        / n as f64
}

/// Fits the five parameters by maximum likelihood.
///
/// Returns [`BpgcError::DidNotConverge`] carrying the final state when the
/// iterations stop without meeting the convergence criteria.
pub fn fit_mle(data: &Dataset, cfg: &MleConfig) -> Result<MleResult> {
    cfg.validate()?;
    let n = data.n();
    if n < MIN_OBSERVATIONS {
        return Err(BpgcError::NonIdentifiable {
            n,
            min: MIN_OBSERVATIONS,
        });
    }
    let init = match cfg.start {
        StartStrategy::Fixed => cfg.init,
        StartStrategy::Moments => moment_start(data),
    };
    Params::from_array(init)?;

    let mut mu = cfg.barrier_mu0;
    let mut obj = Objective {
        data,
        mu,
        frozen: [false; 5],
    };
    let mut point = obj.at(Vector5::from(init)).ok_or_else(|| {
        BpgcError::InvalidConfig("likelihood cannot be evaluated at the initial point".into())
    })?;
    let mut trace = Vec::with_capacity(cfg.outer_iters);

    for round in 0..cfg.outer_iters {
        obj.mu = mu;
        // re-evaluate the current point under the new barrier weight
        let start = obj.at(point.theta).expect("feasible point stays feasible");
        let before = start.theta;
        let outcome = minimize_inner(&obj, start, cfg.inner_tol, cfg.max_inner_iters);
        point = outcome.point;
        trace.push(OuterStep {
            mu,
            loglik: point.eval.loglik,
            grad_norm: free_grad_norm(&point.eval.gradient, &[], n),
            inner_iters: outcome.iters,
            inner_converged: outcome.converged,
        });
        let movement = (point.theta - before).amax();
        if round > 0 && movement < cfg.inner_tol {
            break;
        }
        if round + 1 < cfg.outer_iters {
            mu *= cfg.barrier_shrink;
        }
    }

    // Terminal active-set detection for the interactions. At a barrier
    // stationary point a boundary-held coordinate sits near mu / |dl/dm_j|,
    // which exceeds the fixed threshold whenever that gradient is small, so
    // both tests nominate candidates. A candidate is kept only if the
    // gradient still points outward at the clamped point; by concavity this
    // rejects interior optima.
    let tol = CONVERGED_GRAD_NORM * n as f64;
    let mut theta = point.theta;
    let mut final_eval = point.eval;
    let mut clamped = Vec::new();
    let mut clamped_idx = Vec::new();
    for j in [2usize, 4] {
        let g = final_eval.gradient[j];
        let candidate = g <= 0.0 && (theta[j] < CLAMP_THRESHOLD || theta[j] * -g < 10.0 * mu);
        if !candidate {
            continue;
        }
        let mut trial = theta;
        trial[j] = 0.0;
        let Ok(p) = Params::from_array(trial.into()) else { continue };
        let Ok(e) = evaluate(&p, data.suffstats(), n, data.base_measure()) else { continue };
        if e.gradient[j] <= tol {
            theta = trial;
            final_eval = e;
            clamped.push(PARAM_NAMES[j]);
            clamped_idx.push(j);
        }
    }
    // re-settle the free coordinates now that the clamped ones are fixed
    if !clamped_idx.is_empty() {
        for &j in &clamped_idx {
            obj.frozen[j] = true;
        }
        if let Some(start) = obj.at(theta) {
            let polished = minimize_inner(&obj, start, cfg.inner_tol, cfg.max_inner_iters).point;
            theta = polished.theta;
            final_eval = polished.eval;
        }
    }
    let estimates = Params::from_array(theta.into())?;
    let grad_norm = free_grad_norm(&final_eval.gradient, &clamped_idx, n);
    let converged = grad_norm.is_finite() && grad_norm < CONVERGED_GRAD_NORM;

    let std_errors = if clamped.is_empty() {
        standard_errors(&estimates, data).ok()
    } else {
        None
    };
    let result = MleResult {
        estimates,
        loglik: final_eval.loglik,
        converged,
        trace,
        std_errors,
        clamped,
        grad_norm,
        n,
    };
    if converged {
        Ok(result)
    } else {
        Err(BpgcError::DidNotConverge(Box::new(result)))
    }
}

/// Negative Hessian of the log likelihood by central differences of the
/// analytic gradient, step `1e-5 * max(|m_j|, 1)`. Coordinates whose lower
/// neighbour is infeasible fall back to a forward difference.
pub fn observed_information(params: &Params, data: &Dataset) -> Result<Matrix5> {
    let theta = params.to_array();
    let mut info = Matrix5::zeros();
    for j in 0..5 {
        let h = 1e-5 * theta[j].abs().max(1.0);
        let shifted = |delta: f64| -> Option<[f64; 5]> {
            let mut t = theta;
            t[j] += delta;
            let p = Params::from_array(t).ok()?;
            gradient(&p, data).ok()
        };
        let up = shifted(h).ok_or(BpgcError::SingularInformation)?;
        let (down, width) = match shifted(-h) {
            Some(g) => (g, 2.0 * h),
            None => (gradient(params, data)?, h),
        };
        for k in 0..5 {
            info[(k, j)] = -(up[k] - down[k]) / width;
        }
    }
    Ok(info)
}

/// Square roots of the diagonal of the inverse observed information.
/// Withheld when an interaction sits on its boundary.
pub fn standard_errors(params: &Params, data: &Dataset) -> Result<[f64; 5]> {
    let boundary: Vec<&'static str> = [(2usize, params.m11), (4, params.m12)]
        .into_iter()
        .filter(|(_, v)| *v == 0.0)
        .map(|(j, _)| PARAM_NAMES[j])
        .collect();
    if !boundary.is_empty() {
        return Err(BpgcError::BoundaryOptimum(boundary));
    }
    let info = observed_information(params, data)?;
    let sym = (info + info.transpose()) * 0.5;
    let chol = sym.cholesky().ok_or(BpgcError::SingularInformation)?;
    let inv = chol.inverse();
    let mut se = [0.0; 5];
    for (j, s) in se.iter_mut().enumerate() {
        let v = inv[(j, j)];
        if !(v.is_finite() && v > 0.0) {
            return Err(BpgcError::SingularInformation);
        }
        *s = v.sqrt();
    }
    Ok(se)
}
