//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use onescan::bounds::KValue;

/// Tanh-sinh quadrature of `f` over `[0, 1]`. `f(x, 1 - x)` receives the
/// complement computed without cancellation, so integrable endpoint
/// singularities like `(1 - x)^-0.9` are resolved.
pub fn tanh_sinh<F: Fn(f64, f64) -> f64>(f: F) -> f64 {
    let h = 1.0 / 128.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut sum = 0.0;
    let mut k: i64 = -(6.0 / h) as i64;
    while k as f64 * h <= 6.0 {
        let t = k as f64 * h;
        let s = half_pi * t.sinh();
        // x = (1 + tanh s) / 2, 1 - x = 1 / (1 + e^{2s}).
        let x = 1.0 / (1.0 + (-2.0 * s).exp());
        let c = 1.0 / (1.0 + (2.0 * s).exp());
        let w = half_pi * t.cosh() / (2.0 * s.cosh().powi(2));
        if x > 0.0 && c > 0.0 && w > 0.0 && w.is_finite() {
            sum += w * f(x, c);
        }
        k += 1;
    }
    sum * h
}

/// `ln u` for `u = 1 - c`.
fn ln_u(u: f64, c: f64) -> f64 {
    if c < 0.5 {
        (-c).ln_1p()
    } else {
        u.ln()
    }
}

/// H1 from the integral of the expectation before series expansion.
pub fn h1_quadrature(t: f64, eps: f64, k: KValue) -> f64 {
    match k {
        KValue::Finite(k) => {
            let b = (k - 1) as f64;
            let bracket = tanh_sinh(|u, c| {
                let ub = (b * ln_u(u, c)).exp();
                let one_minus = -(b * ln_u(u, c)).exp_m1();
                0.5 * ((1.0 + ub).powf(t) + one_minus.powf(t))
            });
            eps * t - k as f64 * bracket.ln()
        }
        KValue::Infinite => {
            let s = tanh_sinh(|v, c| {
                let plus = (t * v.ln_1p()).exp_m1();
                let minus = (t * ln_u(c, v)).exp_m1();
                0.5 * (plus + minus) / v
            });
            eps * t - s
        }
    }
}

/// H4 (H2 at `gamma = 0`) from its integral form.
pub fn h4_quadrature(t: f64, eps: f64, k: KValue, gamma: f64) -> f64 {
    let w = 1.0 - 2.0 * gamma;
    match k {
        KValue::Finite(k) => {
            let b = (k - 1) as f64;
            let a = tanh_sinh(|u, c| {
                let ub = (b * ln_u(u, c)).exp();
                let one_minus = -(b * ln_u(u, c)).exp_m1();
                let p = (1.0 + ub).powf(-t);
                let m = one_minus.powf(-t);
                0.5 * (p + m) - 0.5 * w * ub * (m - p)
            });
            -eps * t - k as f64 * a.ln()
        }
        KValue::Infinite => {
            let s = tanh_sinh(|v, c| {
                let plus = (-t * v.ln_1p()).exp_m1();
                let minus = (-t * ln_u(c, v)).exp_m1();
                let even = 0.5 * (plus + minus) / v;
                let odd = 0.5 * (minus - plus);
                even - w * odd
            });
            -eps * t - s
        }
    }
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}
