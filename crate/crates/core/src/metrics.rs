//! Recovery-quality metrics.

use crate::decoder::SignEstimate;
use crate::encoder::SparseSignal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub sign_error: f64,
    pub recall: f64,
    pub k_hat: Option<f64>,
}

fn check_n(estimate: &SignEstimate, truth: &SparseSignal) -> Result<()> {
    if estimate.n() != truth.n() {
        return Err(Error::DimensionMismatch { expected: truth.n(), actual: estimate.n() });
    }
    Ok(())
}

/// `sum_{i in support} |s_hat_i - sgn(x_i)| / k` over exactly `k` reported
/// coordinates. In `[0, 2]`.
pub fn sign_error(estimate: &SignEstimate, truth: &SparseSignal, k: usize) -> Result<f64> {
    check_n(estimate, truth)?;
    if estimate.support.len() != k || k == 0 {
        return Err(Error::InvalidParameter(format!(
            "sign error needs {k} reported coordinates, got {}",
            estimate.support.len()
        )));
    }
    let total: i32 = estimate
        .support
        .iter()
        .map(|&i| (i32::from(estimate.signs[i]) - i32::from(truth.sign_at(i))).abs())
        .sum();
    Ok(f64::from(total) / k as f64)
}

/// Threshold-rule error: `sum_i |s_hat_i - sgn(x_i)| / K` over all
/// coordinates. Not bounded by 2; never mixed with [`sign_error`].
pub fn sign_error_all(estimate: &SignEstimate, truth: &SparseSignal) -> Result<f64> {
    check_n(estimate, truth)?;
    let k = truth.k().max(1);
    let total: i64 = estimate
        .signs
        .iter()
        .enumerate()
        .map(|(i, &s)| i64::from((i32::from(s) - i32::from(truth.sign_at(i))).abs()))
        .sum();
    Ok(total as f64 / k as f64)
}

/// Fraction of true nonzeros present in the support. `1` for a zero signal.
pub fn recall(estimate: &SignEstimate, truth: &SparseSignal) -> f64 {
    let k = truth.k();
    if k == 0 {
        return 1.0;
    }
    let hits = estimate.support.iter().filter(|&&i| truth.sign_at(i) != 0).count();
    hits as f64 / k as f64
}

/// Reported coordinates that are true zeros.
pub fn false_positives(estimate: &SignEstimate, truth: &SparseSignal) -> usize {
    estimate.support.iter().filter(|&&i| truth.sign_at(i) == 0).count()
}

/// Every coordinate's sign, including zeros, is correct.
pub fn exact_sign_recovery(estimate: &SignEstimate, truth: &SparseSignal) -> bool {
    estimate.n() == truth.n() && (0..truth.n()).all(|i| estimate.signs[i] == truth.sign_at(i))
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[h] } else { 0.5 * (v[h - 1] + v[h]) })
}
