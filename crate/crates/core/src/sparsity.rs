//! Harmonic-mean estimate of the sparsity from a few full-precision
//! measurements.
//!
//! With `c = -(2/pi) Gamma(-alpha) sin(pi alpha / 2)` and
//! `d = -pi Gamma(-2 alpha) sin(pi alpha) / [Gamma(-alpha) sin(pi alpha / 2)]^2`,
//!
//! ```text
//! K_hat = c / sum_j |y_j|^-alpha * (M - (d - 1))
//! ```
//!
//! As `alpha -> 0`, `c -> 1` and `d -> 2`, so `K_hat -> (M - 1) / sum_j |y_j|^-alpha`.
//! The estimate targets `sum_i |x_i|^alpha`, which equals `K` for `+-1` signals.

use std::f64::consts::PI;

use statrs::function::gamma::gamma as gamma_positive;

use crate::encoder::RawMeasurements;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KEstimate {
    pub k_hat: f64,
    pub m_used: usize,
}

/// `Gamma(x)` for negative non-integer `x`, by reflection
/// `Gamma(x) = pi / (sin(pi x) Gamma(1 - x))`.
pub fn gamma_negative(x: f64) -> Result<f64> {
    if !(x < 0.0) || x.fract() == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("gamma_negative needs a negative non-integer, got {x}")));
    }
    Ok(PI / ((PI * x).sin() * gamma_positive(1.0 - x)))
}

/// The two constants `(c, d)` of the estimator at `alpha`.
pub fn harmonic_constants(alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let g1 = gamma_negative(-alpha)?;
    let g2 = gamma_negative(-2.0 * alpha)?;
    let half = (PI * alpha / 2.0).sin();
    let c = -(2.0 / PI) * g1 * half;
    let d = -PI * g2 * (PI * alpha).sin() / (g1 * half).powi(2);
    Ok((c, d))
}

fn check_alpha(alpha: f64) -> Result<()> {
    // Gamma(-2 alpha) has a pole at alpha = 1/2 and E|y|^(-2 alpha) diverges
    // beyond it, so the bias correction is only defined below 1/2.
    if alpha > 0.0 && alpha < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

/// Estimate from the magnitudes `|y_j|`.
pub fn estimate_k_from(y: &[f64], alpha: f64) -> Result<KEstimate> {
    check_alpha(alpha)?;
    let m = y.len();
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 measurements, got {m}")));
    }
    let mut harmonic = 0.0;
    for (j, &v) in y.iter().enumerate() {
        if v == 0.0 || !v.is_finite() {
            return Err(Error::Domain(format!("measurement {j} is {v}")));
        }
        harmonic += v.abs().powf(-alpha);
    }
    let (c, d) = harmonic_constants(alpha)?;
    Ok(KEstimate { k_hat: c / harmonic * (m as f64 - (d - 1.0)), m_used: m })
}

pub fn estimate_k(raw: &RawMeasurements, alpha: f64) -> Result<KEstimate> {
    estimate_k_from(&raw.y, alpha)
}
