//! Chernoff exponents as series in `t`.
//!
//! With `b = K - 1`, `C(t, n)` the generalized binomial coefficient
//! `prod_{l<n} (t-l)/(n-l)` and `R(t, n) = prod_{l<n} (t+l)/(n-l)`:
//!
//! ```text
//! H1(t; eps, K)      = eps t - K log(1 + sum_{n even} C(t,n) / (n b + 1))
//! H2(t; eps, K)      = -eps t - K log(A)
//! A                  = 1 + sum_{n even} R(t,n) / (n b + 1) - sum_{n odd} R(t,n) / ((n+1) b + 1)
//! H4(t; eps, K, gam) = same as H2 with the odd terms weighted by (1 - 2 gam)
//! ```
//!
//! and the `K -> inf` limits replace `K log(1 + X)` by the first-order term
//! with `n b + 1 -> n`. `A` is `E (1 + T)^-t` for the false-negative score
//! term, which forces the rising products `R`. Odd and even terms of `A`
//! are summed in pairs sharing the denominator `(n+1) b + 1`.

use super::series::{accelerated_sum, SeriesConfig};
use super::KValue;
use crate::error::{Error, Result};

/// Relative residual above which a series evaluation is reported as
/// unconverged.
pub const SERIES_TOLERANCE: f64 = 1e-9;

fn checked(t: f64, acc: super::series::Accelerated) -> Result<f64> {
    if !acc.value.is_finite() || acc.residual > SERIES_TOLERANCE * acc.value.abs().max(1.0) {
        return Err(Error::SeriesNotConverged { t, residual: acc.residual });
    }
    Ok(acc.value)
}

/// `sum_{n = 2, 4, ...} C(t, n) / d(n)` with `d(n) = n b + 1`, or `n` when
/// `K` is infinite.
pub fn falling_even_sum(t: f64, k: KValue, cfg: SeriesConfig) -> Result<f64> {
    let mut coeff = 1.0; // C(t, n) at the current n
    let mut n = 0usize;
    let denom = denominator(k);
    let acc = accelerated_sum(
        |_| {
            for _ in 0..2 {
                n += 1;
                coeff *= (t - (n - 1) as f64) / n as f64;
            }
            coeff / denom(n as f64)
        },
        t + 1.0,
        cfg,
    );
    checked(t, acc)
}

/// `sum_{n even} R(t,n)/d(n) - w sum_{n odd} R(t,n)/d(n+1)`, pairing each odd
/// `n` with `n + 1`.
pub fn rising_pair_sum(t: f64, k: KValue, odd_weight: f64, cfg: SeriesConfig) -> Result<f64> {
    let mut coeff = 1.0; // R(t, n)
    let mut n = 0usize;
    let denom = denominator(k);
    // Pairs decay like m^(t-2) when the odd terms are down-weighted, like
    // m^(t-3) when they cancel the leading order.
    let q0 = if odd_weight == 1.0 { 2.0 - t } else { 1.0 - t };
    let acc = accelerated_sum(
        |_| {
            n += 1;
            coeff *= (t + (n - 1) as f64) / n as f64;
            let odd = coeff;
            n += 1;
            coeff *= (t + (n - 1) as f64) / n as f64;
            (coeff - odd_weight * odd) / denom(n as f64)
        },
        q0,
        cfg,
    );
    checked(t, acc)
}

fn denominator(k: KValue) -> impl Fn(f64) -> f64 {
    move |n: f64| match k {
        KValue::Finite(k) => n * (k as f64 - 1.0) + 1.0,
        KValue::Infinite => n,
    }
}

fn log_term(k: KValue, x: f64) -> f64 {
    match k {
        KValue::Finite(k) => k as f64 * x.ln_1p(),
        KValue::Infinite => x,
    }
}

fn check_k(k: KValue) -> Result<()> {
    match k {
        KValue::Finite(k) if k < 2 => Err(Error::InvalidSparsity(k as f64)),
        _ => Ok(()),
    }
}

/// False-positive exponent, `t >= 0`.
pub fn h1_with(t: f64, epsilon: f64, k: KValue, cfg: SeriesConfig) -> Result<f64> {
    check_k(k)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("H1 needs t >= 0, got {t}")));
    }
    Ok(epsilon * t - log_term(k, falling_even_sum(t, k, cfg)?))
}

/// False-negative exponent, `0 < t < 1`.
pub fn h2_with(t: f64, epsilon: f64, k: KValue, cfg: SeriesConfig) -> Result<f64> {
    h4_with(t, epsilon, k, 0.0, cfg)
}

/// False-negative exponent under sign-flip noise, `0 < t < 1`,
/// `0 <= gamma <= 1/2`.
pub fn h4_with(t: f64, epsilon: f64, k: KValue, gamma: f64, cfg: SeriesConfig) -> Result<f64> {
    check_k(k)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} outside (0, 1)")));
    }
    if !(0.0..=0.5).contains(&gamma) {
        return Err(Error::InvalidParameter(format!("flip probability {gamma} outside [0, 1/2]")));
    }
    let pairs = rising_pair_sum(t, k, 1.0 - 2.0 * gamma, cfg)?;
    Ok(-epsilon * t - log_term(k, pairs))
}

pub fn h1(t: f64, epsilon: f64, k: KValue) -> Result<f64> {
    h1_with(t, epsilon, k, SeriesConfig::default())
}

pub fn h2(t: f64, epsilon: f64, k: KValue) -> Result<f64> {
    h2_with(t, epsilon, k, SeriesConfig::default())
}

pub fn h4(t: f64, epsilon: f64, k: KValue, gamma: f64) -> Result<f64> {
    h4_with(t, epsilon, k, gamma, SeriesConfig::default())
}
