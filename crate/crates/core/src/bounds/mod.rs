//! Error-probability bounds for the zero/epsilon-threshold decoder.
//!
//! For a coordinate with `x_i = 0`,
//! `Pr(Q+_i > eps M / K) <= exp(-(M/K) H1(t; eps, K))` for any `t >= 0`; for
//! `x_i > 0`, `Pr(Q+_i < eps M / K) <= exp(-(M/K) H2(t; eps, K))` for
//! `0 < t < 1` (`H4` under sign-flip noise; flips leave `H1` unchanged).
//! [`optimize`] picks the best `t`, [`sample_complexity`] inverts the union
//! bound `(N-K) Pr(fp) + K Pr(fn) <= delta` for `M`.

mod exponents;
mod series;

use std::fmt;

pub use exponents::{
    falling_even_sum, h1, h1_with, h2, h2_with, h4, h4_with, rising_pair_sum, SERIES_TOLERANCE,
};
pub use series::{accelerated_sum, Accelerated, SeriesConfig};

use crate::error::{Error, Result};

/// Sparsity as seen by the bounds: an integer `K >= 2` or the `K -> inf` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KValue {
    Finite(u64),
    Infinite,
}

impl KValue {
    pub fn as_f64(&self) -> f64 {
        match self {
            KValue::Finite(k) => *k as f64,
            KValue::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for KValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KValue::Finite(k) => write!(f, "{k}"),
            KValue::Infinite => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for KValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" => Ok(KValue::Infinite),
            other => other
                .parse::<u64>()
                .map(KValue::Finite)
                .map_err(|_| Error::InvalidParameter(format!("bad K value {other:?}"))),
        }
    }
}

/// Which Chernoff exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    H1,
    H2,
    H4,
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exponent::H1 => "H1",
            Exponent::H2 => "H2",
            Exponent::H4 => "H4",
        })
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "H1" => Ok(Exponent::H1),
            "H2" => Ok(Exponent::H2),
            "H4" => Ok(Exponent::H4),
            other => Err(Error::InvalidParameter(format!("unknown exponent {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundQuery {
    pub epsilon: f64,
    pub k: KValue,
    /// Flip probability; only read by `H4`.
    pub gamma: f64,
}

impl BoundQuery {
    pub fn new(epsilon: f64, k: KValue, gamma: f64) -> Self {
        Self { epsilon, k, gamma }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub which: Exponent,
    pub query: BoundQuery,
    pub t_star: f64,
    pub h_star: f64,
}

impl BoundResult {
    /// `h_star > 0`; otherwise the Chernoff bound is vacuous.
    pub fn is_useful(&self) -> bool {
        self.h_star > 0.0
    }

    /// `exp(-(m/K) h_star)`, or 1 when there is no useful bound.
    pub fn bound_at(&self, m: usize) -> f64 {
        if !self.is_useful() {
            return 1.0;
        }
        (-(m as f64) / self.query.k.as_f64() * self.h_star).exp()
    }
}

/// Upper end of the `t` search for `H1`.
pub const H1_T_MAX: f64 = 40.0;
pub const GRID_POINTS: usize = 400;
pub const T_TOLERANCE: f64 = 1e-7;

// Open-interval margin for H2/H4.
const EDGE: f64 = 1e-12;

/// Evaluate the chosen exponent at `t`.
pub fn exponent(which: Exponent, t: f64, q: &BoundQuery) -> Result<f64> {
    match which {
        Exponent::H1 => h1(t, q.epsilon, q.k),
        Exponent::H2 => h2(t, q.epsilon, q.k),
        Exponent::H4 => h4(t, q.epsilon, q.k, q.gamma),
    }
}

/// Maximize the exponent over `t`: a 400-point grid finds the best cell,
/// golden-section search refines within its neighbours.
pub fn optimize(which: Exponent, query: BoundQuery) -> Result<BoundResult> {
    let (lo, hi, grid): (f64, f64, Vec<f64>) = match which {
        Exponent::H1 => (
            0.0,
            H1_T_MAX,
            (0..GRID_POINTS).map(|i| H1_T_MAX * i as f64 / (GRID_POINTS - 1) as f64).collect(),
        ),
        Exponent::H2 | Exponent::H4 => (
            EDGE,
            1.0 - EDGE,
            (0..GRID_POINTS).map(|i| (i + 1) as f64 / (GRID_POINTS + 1) as f64).collect(),
        ),
    };
    let f = |t: f64| exponent(which, t, &query);
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &t) in grid.iter().enumerate() {
        let v = f(t)?;
        if v > best_val {
            best = i;
            best_val = v;
        }
    }
    if which == Exponent::H1 && best == GRID_POINTS - 1 {
        return Err(Error::TCapReached { cap: H1_T_MAX });
    }
    let a = if best == 0 { lo } else { grid[best - 1] };
    let b = if best + 1 == grid.len() { hi } else { grid[best + 1] };
    let (t_ref, v_ref) = golden_max(&f, a, b, T_TOLERANCE)?;
    let (t_star, h_star) = if v_ref >= best_val { (t_ref, v_ref) } else { (grid[best], best_val) };
    Ok(BoundResult { which, query, t_star, h_star })
}

/// Golden-section maximization on `[a, b]`.
pub fn golden_max<F>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

/// Constant in the zero-threshold sample complexity `M = ceil(12.3 K ln(N / delta))`.
pub const THRESHOLD_CONSTANT: f64 = 12.3;

/// Measurements sufficient for the zero-threshold decoder to recover every
/// sign with probability `1 - delta`. With `epsilon = 0, gamma = 0` this is
/// the closed form `ceil(12.3 K ln(N / delta))`; otherwise the optimized
/// exponents are plugged into the union bound.
pub fn sample_complexity(k: usize, n_len: usize, delta: f64, epsilon: f64, gamma: f64) -> Result<usize> {
    check_complexity_args(k, n_len, delta)?;
    if epsilon == 0.0 && gamma == 0.0 {
        return Ok((THRESHOLD_CONSTANT * k as f64 * (n_len as f64 / delta).ln()).ceil() as usize);
    }
    sample_complexity_general(k, n_len, delta, epsilon, gamma)
}

/// Union-bound path with optimized `H1` and `H2`/`H4`, for any `epsilon`
/// and `gamma`.
pub fn sample_complexity_general(
    k: usize,
    n_len: usize,
    delta: f64,
    epsilon: f64,
    gamma: f64,
) -> Result<usize> {
    check_complexity_args(k, n_len, delta)?;
    if k < 2 {
        return Err(Error::InvalidSparsity(k as f64));
    }
    let kv = KValue::Finite(k as u64);
    let fp = optimize(Exponent::H1, BoundQuery::new(epsilon, kv, 0.0))?;
    let which_fn = if gamma == 0.0 { Exponent::H2 } else { Exponent::H4 };
    let fnr = optimize(which_fn, BoundQuery::new(epsilon, kv, gamma))?;
    solve_sample_complexity(k, n_len, delta, fp.h_star, fnr.h_star)
}

/// Smallest `M` with `(N - K) exp(-(M/K) h_fp) + K exp(-(M/K) h_fn) <= delta`.
pub fn solve_sample_complexity(k: usize, n_len: usize, delta: f64, h_fp: f64, h_fn: f64) -> Result<usize> {
    check_complexity_args(k, n_len, delta)?;
    if !(h_fp > 0.0 && h_fn > 0.0) {
        return Err(Error::Unbounded);
    }
    let kf = k as f64;
    let total = |m: usize| {
        let s = m as f64 / kf;
        (n_len - k) as f64 * (-s * h_fp).exp() + kf * (-s * h_fn).exp()
    };
    let mut hi = 1usize;
    while total(hi) > delta {
        hi = hi.checked_mul(2).ok_or(Error::Unbounded)?;
    }
    let mut lo = 0usize;
    // total(lo) > delta >= total(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if total(mid) > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

fn check_complexity_args(k: usize, n_len: usize, delta: f64) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidSparsity(k as f64));
    }
    if n_len <= k {
        return Err(Error::InvalidParameter(format!("need N > K, got N = {n_len}, K = {k}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence {delta} outside (0, 1)")));
    }
    Ok(())
}
