//! Poisson and Gamma variates driven by a [`UniformStream`].

use super::rng::UniformStream;
use crate::error::{BpgcError, Result};
use crate::special::ln_factorial;

/// Means below this use sequential inversion, above it PTRS rejection.
const INVERSION_CUTOFF: f64 = 10.0;

/// Poisson(mean) draw.
pub fn poisson_variate(mean: f64, stream: &mut UniformStream) -> Result<u64> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(BpgcError::InvalidDistributionParameter(format!(
            "Poisson mean {mean} must be positive and finite"
        )));
    }
    if mean < INVERSION_CUTOFF {
        Ok(poisson_inversion(mean, stream))
    } else {
        Ok(poisson_ptrs(mean, stream))
    }
}

fn poisson_inversion(mean: f64, stream: &mut UniformStream) -> u64 {
    let u = stream.next_open01();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    // the loop bound only matters when rounding keeps cdf below u
    while u > cdf && k < 1000 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
    }
    k
}

/// Hörmann's transformed rejection with squeeze (PTRS).
fn poisson_ptrs(mean: f64, stream: &mut UniformStream) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = stream.next_open01() - 0.5;
        let v = stream.next_open01();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln() <= -mean + k * loglam - ln_factorial(k)
        {
            return k as u64;
        }
    }
}

/// Gamma(shape, rate) draw: Marsaglia–Tsang for `shape >= 1`, and the
/// `G(shape + 1) * U^{1/shape}` boost below one.
pub fn gamma_variate(shape: f64, rate: f64, stream: &mut UniformStream) -> Result<f64> {
    if !(shape.is_finite() && shape > 0.0) {
        return Err(BpgcError::InvalidDistributionParameter(format!(
            "Gamma shape {shape} must be positive and finite"
        )));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(BpgcError::InvalidDistributionParameter(format!(
            "Gamma rate {rate} must be positive and finite"
        )));
    }
    if shape >= 1.0 {
        Ok(marsaglia_tsang(shape, stream) / rate)
    } else {
        let g = marsaglia_tsang(shape + 1.0, stream);
        let ln_u = stream.next_open01().ln();
        Ok((g.ln() + ln_u / shape).exp() / rate)
    }
}

fn marsaglia_tsang(shape: f64, stream: &mut UniformStream) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z = stream.standard_normal();
        let v = 1.0 + c * z;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = stream.next_open01();
        let z2 = z * z;
        if u < 1.0 - 0.0331 * z2 * z2 || u.ln() < 0.5 * z2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma_lr;

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, var)
    }

    #[test]
    fn exponential_mean() {
        let mut s = UniformStream::new(1);
        let d: Vec<f64> = (0..1_000_000)
            .map(|_| gamma_variate(1.0, 1.0, &mut s).unwrap())
            .collect();
        let (m, _) = mean_var(&d);
        assert!((m - 1.0).abs() < 0.004, "{m}");
    }

    #[test]
    fn poisson_equidispersion() {
        for (seed, mean) in [(2u64, 4.0), (3, 37.5)] {
            let mut s = UniformStream::new(seed);
            let d: Vec<f64> = (0..1_000_000)
                .map(|_| poisson_variate(mean, &mut s).unwrap() as f64)
                .collect();
            let (m, v) = mean_var(&d);
            assert!((m - mean).abs() < 4.0 * (mean / 1e6f64).sqrt(), "{m}");
            assert!((v / m - 1.0).abs() < 0.01, "{}", v / m);
        }
    }

    #[test]
    fn small_shape_gamma_ks_distance() {
        let mut s = UniformStream::new(4);
        let n = 1_000_000;
        let mut d: Vec<f64> = (0..n)
            .map(|_| gamma_variate(0.5, 2.0, &mut s).unwrap())
            .collect();
        d.sort_by(f64::total_cmp);
        let ks = d
            .iter()
            .enumerate()
            .map(|(i, &y)| {
                let f = gamma_lr(0.5, 2.0 * y);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.002, "{ks}");
    }

    #[test]
    fn large_shape_gamma_moments() {
        let mut s = UniformStream::new(5);
        let d: Vec<f64> = (0..200_000)
            .map(|_| gamma_variate(9.0, 3.0, &mut s).unwrap())
            .collect();
        let (m, v) = mean_var(&d);
        assert!((m - 3.0).abs() < 0.01);
        assert!((v - 1.0).abs() < 0.02);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = UniformStream::new(0);
        assert!(poisson_variate(0.0, &mut s).is_err());
        assert!(poisson_variate(f64::NAN, &mut s).is_err());
        assert!(gamma_variate(-1.0, 1.0, &mut s).is_err());
        assert!(gamma_variate(1.0, 0.0, &mut s).is_err());
    }
}
