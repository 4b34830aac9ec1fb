//! Tail-accelerated summation of slowly converging positive-index series.
//!
//! The exponent series have terms that decay algebraically, like
//! `m^-(q+1)` times a power series in `1/m`, so the partial sum through `N`
//! terms behaves as `S - N^-q (c0 + c1/N + c2/N^2 + ...)`. Partial sums at
//! `N, 2N, 4N, 8N` are combined by Richardson extrapolation with the known
//! exponents `q, q+1, q+2`.

/// Truncation policy for the exponent series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesConfig {
    /// Terms in the first partial sum.
    pub base_terms: usize,
    /// Number of partial sums, at `base_terms * 2^l` for `l < levels`.
    pub levels: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self { base_terms: 256, levels: 6 }
    }
}

/// Extrapolated sum and a residual estimate (difference between the two
/// highest-order extrapolants).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accelerated {
    pub value: f64,
    pub residual: f64,
}

/// Sum `term(1) + term(2) + ...` given that the tail after `N` terms decays
/// like `N^-q0`. `term` is called once per index, in increasing order.
pub fn accelerated_sum<F>(mut term: F, q0: f64, cfg: SeriesConfig) -> Accelerated
where
    F: FnMut(usize) -> f64,
{
    let levels = cfg.levels.max(2);
    let mut partial = vec![0.0f64; levels];
    let mut sum = 0.0;
    let mut comp = 0.0;
    let mut m = 1;
    for (level, slot) in partial.iter_mut().enumerate() {
        let upto = cfg.base_terms << level;
        while m <= upto {
            // Kahan summation; later terms are tiny relative to the sum.
            let y = term(m) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            m += 1;
        }
        *slot = sum;
    }
    // Column `c` of the Richardson table has removed the first `c` tail orders.
    let mut column = partial;
    let mut second_best = column[levels - 1];
    for order in 0..levels - 1 {
        let r = 2f64.powf(q0 + order as f64);
        second_best = *column.last().unwrap();
        column = column.windows(2).map(|w| (r * w[1] - w[0]) / (r - 1.0)).collect();
    }
    let value = column[0];
    Accelerated { value, residual: (value - second_best).abs() }
}
