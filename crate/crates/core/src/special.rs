//! Log-scale helpers shared by the density and fitting code.

pub use statrs::function::gamma::{digamma, ln_gamma};

/// `log(x!)` for a real-valued `x`, via the gamma function.
#[inline]
pub fn ln_factorial(x: f64) -> f64 {
    ln_gamma(x + 1.0)
}

/// Numerically stable `log(exp(a) + exp(b))`.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Numerically stable `log(sum(exp(v)))`; `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    let s: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

/// Log pmf of Poisson(mean) at `k`, with the mean given on log scale.
#[inline]
pub fn poisson_ln_pmf(k: u64, ln_mean: f64) -> f64 {
    let k = k as f64;
    k * ln_mean - ln_mean.exp() - ln_factorial(k)
}

/// Log density of Gamma(shape, rate) at `y > 0`.
#[inline]
pub fn gamma_ln_pdf(y: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * y.ln() - rate * y
}
