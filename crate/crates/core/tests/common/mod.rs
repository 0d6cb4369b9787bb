//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the series, quadrature or FF code under test.

#![allow(dead_code)]

use statrs::function::gamma::{digamma, ln_gamma};

/// Unnormalized log joint density, written out term by term.
pub fn log_kernel(m: [f64; 5], x: u64, y: f64) -> f64 {
    let [m10, m01, m11, m02, m12] = m;
    let xf = x as f64;
    let ly = y.ln();
    -ln_gamma(xf + 1.0) - ly + m10 * xf - m01 * y - m11 * xf * y + m02 * ly + m12 * xf * ly
}

pub fn poisson_ln_pmf(k: u64, mean: f64) -> f64 {
    let kf = k as f64;
    kf * mean.ln() - mean - ln_gamma(kf + 1.0)
}

pub fn gamma_ln_pdf(y: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * y.ln() - rate * y
}

/// Composite Simpson on `y = e^u` over a window wide enough for the
/// Gamma-shaped integrand `exp(log_kernel(m, x, .))`.
pub fn integrate_y(m: [f64; 5], x: u64) -> f64 {
    let xf = x as f64;
    let shape = m[3] + m[4] * xf;
    let rate = m[1] + m[2] * xf;
    let hi = ((shape + 60.0 * shape.sqrt() + 200.0) / rate).ln();
    let lo = ((shape / rate).ln() - 80.0 / shape.max(0.05)).max(-700.0);
    let steps = 40_000;
    let h = (hi - lo) / steps as f64;
    let f = |u: f64| (log_kernel(m, x, u.exp()) + u).exp();
    let mut s = f(lo) + f(hi);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(lo + i as f64 * h);
    }
    s * h / 3.0
}

/// `sum_x int f(x, y) dy` for the unnormalized kernel, by brute force.
pub fn total_mass(m: [f64; 5]) -> f64 {
    let mut total = 0.0;
    let mut peak: f64 = 0.0;
    for x in 0..20_000u64 {
        let v = integrate_y(m, x);
        total += v;
        peak = peak.max(v);
        if x > 20 && v < 1e-18 * total && v < peak {
            break;
        }
    }
    total
}

pub fn trigamma(mut z: f64) -> f64 {
    let mut acc = 0.0;
    while z < 20.0 {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    let z2 = 1.0 / (z * z);
    acc + 1.0 / z
        + z2 / 2.0
        + z2 / z * (1.0 / 6.0 - z2 * (1.0 / 30.0 - z2 * (1.0 / 42.0 - z2 / 30.0)))
}

/// Fisher information of one observation for the natural statistic
/// `(x, -y, -xy, ln y, x ln y)`, i.e. its covariance matrix, accumulated
/// from the count marginal (built here from `log_kernel`'s closed-form
/// y-integral) and Gamma conditional moments.
pub fn unit_information(m: [f64; 5]) -> [[f64; 5]; 5] {
    let [m10, m01, m11, m02, m12] = m;
    let mut log_w = Vec::new();
    for x in 0..20_000u64 {
        let xf = x as f64;
        let a = m02 + m12 * xf;
        let b = m01 + m11 * xf;
        let t = ln_gamma(a) + m10 * xf - a * b.ln() - ln_gamma(xf + 1.0);
        log_w.push(t);
        let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if x > 50 && t < top - 60.0 {
            break;
        }
    }
    let top = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = log_w.iter().map(|t| (t - top).exp()).sum();

    let mut mean = [0.0; 5];
    let mut second = [[0.0; 5]; 5];
    for (x, t) in log_w.iter().enumerate() {
        let p = (t - top).exp() / z;
        let xf = x as f64;
        let a = m02 + m12 * xf;
        let b = m01 + m11 * xf;
        let ey = a / b;
        let eyy = a * (a + 1.0) / (b * b);
        let el = digamma(a) - b.ln();
        let ell = trigamma(a) + el * el;
        let eyl = ey * (digamma(a + 1.0) - b.ln());
        // coordinates as polynomials in (1, x) times (1, y, ln y)
        let s = [xf, -ey, -xf * ey, el, xf * el];
        for j in 0..5 {
            mean[j] += p * s[j];
        }
        // E[s_j s_k | x]
        let cross = |j: usize, k: usize| -> f64 {
            // factor each coordinate as c * x^e * base with base in {1, y, ln y}
            let f = |i: usize| match i {
                0 => (1.0, 1, 0),
                1 => (-1.0, 0, 1),
                2 => (-1.0, 1, 1),
                3 => (1.0, 0, 2),
                _ => (1.0, 1, 2),
            };
            let (cj, ej, bj) = f(j);
            let (ck, ek, bk) = f(k);
            let e = match (bj.min(bk), bj.max(bk)) {
                (0, 0) => 1.0,
                (0, 1) => ey,
                (0, 2) => el,
                (1, 1) => eyy,
                (1, 2) => eyl,
                _ => ell,
            };
            cj * ck * xf.powi(ej + ek) * e
        };
        for j in 0..5 {
            for k in 0..5 {
                second[j][k] += p * cross(j, k);
            }
        }
    }
    let mut cov = [[0.0; 5]; 5];
    for j in 0..5 {
        for k in 0..5 {
            cov[j][k] = second[j][k] - mean[j] * mean[k];
        }
    }
    cov
}

/// Fasano–Franceschini statistic by direct enumeration of anchors and
/// open quadrants.
pub fn brute_force_ff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let quadrant = |p: (f64, f64), o: (f64, f64)| -> Option<usize> {
        if p.0 == o.0 || p.1 == o.1 {
            return None;
        }
        Some(match (p.0 > o.0, p.1 > o.1) {
            (true, true) => 0,
            (false, true) => 1,
            (false, false) => 2,
            (true, false) => 3,
        })
    };
    let frac = |s: &[(f64, f64)], o: (f64, f64)| -> [f64; 4] {
        let mut c = [0usize; 4];
        for &p in s {
            if let Some(q) = quadrant(p, o) {
                c[q] += 1;
            }
        }
        c.map(|v| v as f64 / s.len() as f64)
    };
    let directed = |anchors: &[(f64, f64)]| -> f64 {
        let mut d: f64 = 0.0;
        for &o in anchors {
            let fa = frac(a, o);
            let fb = frac(b, o);
            for q in 0..4 {
                d = d.max((fa[q] - fb[q]).abs());
            }
        }
        d
    };
    directed(a) + directed(b)
}

/// Two-sided one-sample KS distance of `values` from Uniform(0, 1).
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &u)| ((i + 1) as f64 / n - u).max(u - i as f64 / n))
        .fold(0.0, f64::max)
}
