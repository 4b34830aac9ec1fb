//! One-scan decoding.
//!
//! For every coordinate `i` the decoder makes one pass over the measurement
//! signs and accumulates
//!
//! ```text
//! Q+_i = sum_j log(1 + sgn(y_j) sgn(u_ij) exp(-(K-1) w_ij))
//! Q-_i = sum_j log(1 - sgn(y_j) sgn(u_ij) exp(-(K-1) w_ij))
//! ```
//!
//! regenerating `(sgn(u_ij), w_ij)` from the design seed. These are the
//! small-alpha limit of the sign log-likelihood, where
//! `sum_{t != i} |x_t|^alpha` collapses to `K - 1` for a nonzero `x_i`.
//! Since `log(1+a) + log(1-a) <= 0`, at most one of the two scores is
//! positive.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::encoder::{RawMeasurements, SignMeasurements};
use crate::error::{Error, Result};
use crate::stable::{DesignRow, DesignSeed};

/// Floor applied to the argument of `log`. Not part of the estimator itself:
/// it only keeps one extreme measurement (`w_ij -> 0`, or `K = 1`) from
/// turning a whole coordinate into `-inf`.
pub const LOG_FLOOR: f64 = 1e-300;

/// Per-coordinate scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub q_plus: Vec<f64>,
    pub q_minus: Vec<f64>,
    /// Sparsity plugged into the exponent, possibly an un-rounded estimate.
    pub k_used: f64,
}

impl ScoreTable {
    pub fn n(&self) -> usize {
        self.q_plus.len()
    }
}

/// Estimated signs. `support` lists the selected coordinates: in rank order
/// for the top-`beta K` rule, in index order for the threshold rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignEstimate {
    pub signs: Vec<i8>,
    pub support: Vec<usize>,
}

impl SignEstimate {
    pub fn n(&self) -> usize {
        self.signs.len()
    }
}

#[inline(always)]
fn guarded_ln_1p(a: f64) -> f64 {
    if 1.0 + a < LOG_FLOOR {
        LOG_FLOOR.ln()
    } else {
        a.ln_1p()
    }
}

/// Below this `z`, `ln(1 +- z)` comes from its Taylor polynomial through
/// `z^6`; the truncation error is under `z^7 / 7`, about `1e-19` relative.
const SERIES_Z: f64 = 1e-3;

/// `(ln(1 + z), ln(1 - z))` for `0 <= z <= 1`.
#[inline(always)]
fn log_pair(z: f64) -> (f64, f64) {
    if z < SERIES_Z {
        let z2 = z * z;
        let odd = z * (1.0 + z2 * (1.0 / 3.0 + z2 * 0.2));
        let even = z2 * (0.5 + z2 * (0.25 + z2 * (1.0 / 6.0)));
        (odd - even, -odd - even)
    } else {
        (guarded_ln_1p(z), guarded_ln_1p(-z))
    }
}

/// Scores of one coordinate from a single pass over `signs`. State beyond
/// the two accumulators is the loop counter.
#[inline]
pub fn score_stream<I>(row: &DesignRow, signs: I, k: f64) -> (f64, f64)
where
    I: IntoIterator<Item = i8>,
{
    let e = k - 1.0;
    // Integral exponents (the usual case) avoid a log/exp pair per term.
    let int_e = (e.fract() == 0.0 && e <= 1024.0).then_some(e as i32);
    let mut qp = 0.0;
    let mut qm = 0.0;
    for (j, s) in signs.into_iter().enumerate() {
        if s == 0 {
            continue;
        }
        let (su, unit) = row.sign_and_unit(j);
        let z = match int_e {
            Some(p) => unit.powi(p),
            None => (e * unit.ln()).exp(),
        };
        let (lp, lm) = log_pair(z);
        // ln(1 + a) and ln(1 - a) with a = s sgn(u) z.
        if f64::from(s) * su > 0.0 {
            qp += lp;
            qm += lm;
        } else {
            qp += lm;
            qm += lp;
        }
    }
    (qp, qm)
}

/// Scores for all coordinates; `O(N M)`, coordinates processed in parallel.
pub fn compute_scores(signs: &SignMeasurements, seed: &DesignSeed, k: f64) -> Result<ScoreTable> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::InvalidSparsity(k));
    }
    if signs.m() == 0 {
        return Err(Error::InvalidParameter("no measurements".into()));
    }
    if signs.m() != seed.m {
        return Err(Error::DimensionMismatch { expected: seed.m, actual: signs.m() });
    }
    let (stored, _) = signs.design.stable_seed()?;
    if stored != *seed {
        return Err(Error::DesignMismatch("measurements were taken with a different seed".into()));
    }
    if let Some(&bad) = signs.signs.iter().find(|s| !(-1..=1).contains(*s)) {
        return Err(Error::InvalidParameter(format!("measurement sign {bad}")));
    }
    let pairs: Vec<(f64, f64)> = (0..seed.n)
        .into_par_iter()
        .map(|i| score_stream(&seed.row(i), signs.signs.iter().copied(), k))
        .collect();
    let (q_plus, q_minus) = pairs.into_iter().unzip();
    Ok(ScoreTable { q_plus, q_minus, k_used: k })
}

/// Zero-threshold rule: `+1` if `Q+ > 0`, `-1` if `Q- > 0`, else `0`.
pub fn estimate_signs_threshold(scores: &ScoreTable) -> SignEstimate {
    let signs: Vec<i8> = scores
        .q_plus
        .iter()
        .zip(&scores.q_minus)
        .map(|(&p, &m)| {
            if p > 0.0 {
                1
            } else if m > 0.0 {
                -1
            } else {
                0
            }
        })
        .collect();
    let support = signs.iter().enumerate().filter(|(_, &s)| s != 0).map(|(i, _)| i).collect();
    SignEstimate { signs, support }
}

/// `floor(beta k)`, tolerant to representation error in `beta`.
pub fn selection_size(k: f64, beta: f64) -> usize {
    (beta * k + 1e-9).floor().max(0.0) as usize
}

/// Coordinates ranked by `max(Q+, Q-)` descending, ties by lower index.
pub fn rank_coordinates(scores: &ScoreTable) -> Vec<usize> {
    let key: Vec<f64> = scores.q_plus.iter().zip(&scores.q_minus).map(|(p, m)| p.max(*m)).collect();
    let mut order: Vec<usize> = (0..key.len()).collect();
    order.sort_by(|&a, &b| key[b].total_cmp(&key[a]).then(a.cmp(&b)));
    order
}

/// Select the top `floor(beta k)` coordinates by `max(Q+, Q-)`; sign from the
/// larger score, ties to `+1`.
pub fn estimate_signs_topk(scores: &ScoreTable, k: f64, beta: f64) -> Result<SignEstimate> {
    let n = scores.n();
    let count = selection_size(k, beta);
    if !(beta >= 1.0) || count < 1 || count > n {
        return Err(Error::InvalidParameter(format!(
            "beta * k = {} selects {count} of {n} coordinates",
            beta * k
        )));
    }
    Ok(topk_from_ranking(scores, &rank_coordinates(scores), count))
}

/// Build a top-`count` estimate from a precomputed ranking.
pub fn topk_from_ranking(scores: &ScoreTable, ranking: &[usize], count: usize) -> SignEstimate {
    let mut signs = vec![0i8; scores.n()];
    let support = ranking[..count].to_vec();
    for &i in &support {
        signs[i] = if scores.q_minus[i] > scores.q_plus[i] { -1 } else { 1 };
    }
    SignEstimate { signs, support }
}

/// Least-squares values on `support` from extra full-precision measurements
/// (nominally a Gaussian design) restricted to the support columns.
pub fn refine_values(support: &[usize], extra: &RawMeasurements) -> Result<Vec<f64>> {
    if support.is_empty() {
        return Ok(Vec::new());
    }
    let n = extra.design.n();
    let mut seen = std::collections::BTreeSet::new();
    for &i in support {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if !seen.insert(i) {
            return Err(Error::InvalidParameter(format!("duplicate support index {i}")));
        }
    }
    let m = extra.m();
    let s = support.len();
    if m < s {
        return Err(Error::InvalidParameter(format!(
            "{m} extra measurements for {s} unknowns"
        )));
    }
    let mut a = DMatrix::<f64>::zeros(m, s);
    let mut col = vec![0.0; m];
    for (c, &i) in support.iter().enumerate() {
        extra.design.fill_row(i, &mut col);
        a.column_mut(c).copy_from_slice(&col);
    }
    let b = DVector::from_column_slice(&extra.y);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * (m.max(s) as f64) * f64::EPSILON;
    let rank = svd.rank(tol);
    if rank < s {
        return Err(Error::RankDeficient { rank, cols: s });
    }
    let x = svd.solve(&b, tol).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(x.iter().copied().collect())
}
