//! Reference 1-bit decoders on Gaussian designs: marginal regression and
//! binary iterative hard thresholding (BIHT).

use rayon::prelude::*;

use crate::decoder::SignEstimate;
use crate::encoder::SignMeasurements;
use crate::error::{Error, Result};
use crate::rng::{box_muller, derive, CounterStream};

const GAUSS_DOMAIN: u64 = 0x0047_4155_5353; // "GAUSS"

/// Seed of an `n x m` standard normal design, regenerated cell by cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussianDesignSeed {
    pub master_seed: u64,
    pub n: usize,
    pub m: usize,
}

impl GaussianDesignSeed {
    pub fn new(master_seed: u64, n: usize, m: usize) -> Self {
        Self { master_seed, n, m }
    }

    pub fn cell(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        if j >= self.m {
            return Err(Error::IndexOutOfRange { index: j, len: self.m });
        }
        Ok(self.row(i).entry(j))
    }

    #[inline]
    pub fn row(&self, i: usize) -> GaussianRow {
        GaussianRow { stream: CounterStream::new(derive(self.master_seed, GAUSS_DOMAIN, i as u64)) }
    }
}

/// Entries `(i, .)`; cells `2p` and `2p + 1` share one Box–Muller pair.
#[derive(Debug, Clone, Copy)]
pub struct GaussianRow {
    stream: CounterStream,
}

impl GaussianRow {
    #[inline]
    fn pair(&self, p: usize) -> (f64, f64) {
        let c = 2 * p as u64;
        box_muller(self.stream.word(c), self.stream.word(c + 1))
    }

    pub fn entry(&self, j: usize) -> f64 {
        let (a, b) = self.pair(j / 2);
        if j.is_multiple_of(2) {
            a
        } else {
            b
        }
    }

    pub fn fill(&self, out: &mut [f64]) {
        let last_pair = out.len() / 2;
        let mut chunks = out.chunks_exact_mut(2);
        for (p, c) in chunks.by_ref().enumerate() {
            let (a, b) = self.pair(p);
            c[0] = a;
            c[1] = b;
        }
        let rem = chunks.into_remainder();
        if let Some(last) = rem.first_mut() {
            *last = self.pair(last_pair).0;
        }
    }

    /// Entries `0, 1, 2, ...` in order.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..).flat_map(move |p| {
            let (a, b) = self.pair(p);
            [a, b]
        })
    }
}

fn check_inputs(signs: &SignMeasurements, seed: &GaussianDesignSeed, k: usize) -> Result<()> {
    if signs.design.gaussian_seed()? != *seed {
        return Err(Error::DesignMismatch("measurements were taken with a different seed".into()));
    }
    if signs.m() != seed.m {
        return Err(Error::DimensionMismatch { expected: seed.m, actual: signs.m() });
    }
    if k < 1 || k > seed.n {
        return Err(Error::InvalidParameter(format!("k = {k} for n = {}", seed.n)));
    }
    Ok(())
}

/// Coordinates by decreasing `|x_i|`, ties to the lower index.
pub fn magnitude_ranking(x: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
    order
}

/// First `count` coordinates of `ranking` with signs of `x`, `sgn(0)` read
/// as `+1`.
pub fn estimate_from_ranking(x: &[f64], ranking: &[usize], count: usize) -> SignEstimate {
    let support = ranking[..count].to_vec();
    let mut signs = vec![0i8; x.len()];
    for &i in &support {
        signs[i] = if x[i] < 0.0 { -1 } else { 1 };
    }
    SignEstimate { signs, support }
}

fn top_k_estimate(x: &[f64], k: usize) -> SignEstimate {
    estimate_from_ranking(x, &magnitude_ranking(x), k)
}

/// `(1/M) sum_j s_j g_ij` in one pass over the signs.
pub fn marginal_stream<I>(row: &GaussianRow, signs: I) -> f64
where
    I: IntoIterator<Item = i8>,
{
    let mut acc = 0.0;
    let mut m = 0usize;
    for (s, g) in signs.into_iter().zip(row.iter()) {
        acc += f64::from(s) * g;
        m += 1;
    }
    if m == 0 {
        0.0
    } else {
        acc / m as f64
    }
}

/// The marginal statistics `x_hat_i = (1/M) sum_j sgn(y_j) g_ij`.
pub fn marginal_statistics(signs: &SignMeasurements, seed: &GaussianDesignSeed) -> Result<Vec<f64>> {
    check_inputs(signs, seed, 1)?;
    Ok((0..seed.n)
        .into_par_iter()
        .map(|i| marginal_stream(&seed.row(i), signs.signs.iter().copied()))
        .collect())
}

/// Marginal regression: top-`k` coordinates by `|x_hat_i|`.
pub fn marginal_regression_decode(
    signs: &SignMeasurements,
    seed: &GaussianDesignSeed,
    k: usize,
) -> Result<SignEstimate> {
    check_inputs(signs, seed, k)?;
    Ok(top_k_estimate(&marginal_statistics(signs, seed)?, k))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BihtParams {
    pub iters: usize,
    pub step: f64,
}

impl Default for BihtParams {
    fn default() -> Self {
        Self { iters: 100, step: 1.0 }
    }
}

/// Keep the `k` largest-magnitude entries of `a` (ties to the lower index).
fn hard_threshold(a: &mut [f64], k: usize) {
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&p, &q| a[q].abs().total_cmp(&a[p].abs()).then(p.cmp(&q)));
    for &i in &order[k..] {
        a[i] = 0.0;
    }
}

/// BIHT: top-`k` support and signs of the final iterate.
pub fn biht_decode(
    signs: &SignMeasurements,
    seed: &GaussianDesignSeed,
    k: usize,
    params: BihtParams,
) -> Result<SignEstimate> {
    Ok(top_k_estimate(&biht_iterate(signs, seed, k, params)?, k))
}

/// Final BIHT iterate of `x <- H_k(x + (step/M) G^T (sgn(y) - sgn(G x)))`,
/// renormalized to unit norm, from `x = 0`. Stops early at a sign-consistent
/// fixed point.
pub fn biht_iterate(
    signs: &SignMeasurements,
    seed: &GaussianDesignSeed,
    k: usize,
    params: BihtParams,
) -> Result<Vec<f64>> {
    check_inputs(signs, seed, k)?;
    if params.iters < 1 {
        return Err(Error::InvalidParameter("BIHT needs at least one iteration".into()));
    }
    let (n, m) = (seed.n, seed.m);
    // cols[i][j] = g_ij, the same layout the encoder regenerates.
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut c = vec![0.0; m];
            seed.row(i).fill(&mut c);
            c
        })
        .collect();
    let y: Vec<f64> = signs.signs.iter().map(|&s| f64::from(s)).collect();
    let scale = params.step / m as f64;
    let mut x = vec![0.0; n];
    let mut gx = vec![0.0; m];
    for it in 1..=params.iters {
        gx.iter_mut().for_each(|v| *v = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for (g, c) in gx.iter_mut().zip(&cols[i]) {
                    *g += xi * c;
                }
            }
        }
        let residual: Vec<(usize, f64)> = y
            .iter()
            .zip(&gx)
            .enumerate()
            .filter_map(|(j, (&yj, &g))| {
                let r = yj - f64::from(crate::encoder::sgn(g));
                (r != 0.0).then_some((j, r))
            })
            .collect();
        if residual.is_empty() {
            break;
        }
        let grad: Vec<f64> = cols
            .par_iter()
            .map(|c| residual.iter().map(|&(j, r)| c[j] * r).sum::<f64>())
            .collect();
        for (xi, g) in x.iter_mut().zip(&grad) {
            *xi += scale * g;
        }
        hard_threshold(&mut x, k);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return Err(Error::Diverged(it));
        }
        if norm > 0.0 {
            x.iter_mut().for_each(|v| *v /= norm);
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{encode_with_design, quantize, Design, SparseSignal};

    #[test]
    fn cells_deterministic_and_fill_consistent() {
        let g = GaussianDesignSeed::new(4, 3, 7);
        let mut buf = vec![0.0; 7];
        g.row(2).fill(&mut buf);
        for (j, &v) in buf.iter().enumerate() {
            assert_eq!(g.cell(2, j).unwrap(), v);
        }
        let it: Vec<f64> = g.row(2).iter().take(7).collect();
        assert_eq!(it, buf);
        assert!(g.cell(3, 0).is_err());
        assert!(g.cell(0, 7).is_err());
    }

    #[test]
    fn all_zero_signs() {
        let g = GaussianDesignSeed::new(1, 6, 5);
        let q = SignMeasurements { signs: vec![0; 5], design: Design::Gaussian(g), flip_prob: 0.0 };
        let e = marginal_regression_decode(&q, &g, 2).unwrap();
        assert_eq!(e.support, vec![0, 1]);
        assert_eq!(e.signs, vec![1, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn one_scan_access_count() {
        use std::cell::Cell;
        let g = GaussianDesignSeed::new(1, 4, 9);
        let signs = [1i8, -1, 1, 1, -1, 0, 1, -1, 1];
        let reads = Cell::new(0usize);
        let counted = signs.iter().map(|&s| {
            reads.set(reads.get() + 1);
            s
        });
        marginal_stream(&g.row(0), counted);
        assert_eq!(reads.get(), signs.len());
    }

    #[test]
    fn biht_single_iteration_is_thresholded_correlation() {
        let n = 30;
        let m = 200;
        let g = GaussianDesignSeed::new(8, n, m);
        let sig = SparseSignal::new(n, vec![(3, 2.0), (17, -1.0)]).unwrap();
        let q = quantize(&encode_with_design(&sig, Design::Gaussian(g)).unwrap());
        let est = biht_decode(&q, &g, 2, BihtParams { iters: 1, step: 1.0 }).unwrap();
        let corr: Vec<f64> = (0..n)
            .map(|i| (0..m).map(|j| f64::from(q.signs[j]) * g.cell(i, j).unwrap()).sum::<f64>() / m as f64)
            .collect();
        assert_eq!(est, top_k_estimate(&corr, 2));
    }

    #[test]
    fn biht_rejects_zero_iterations() {
        let g = GaussianDesignSeed::new(1, 4, 3);
        let q = SignMeasurements { signs: vec![1; 3], design: Design::Gaussian(g), flip_prob: 0.0 };
        assert!(biht_decode(&q, &g, 1, BihtParams { iters: 0, step: 1.0 }).is_err());
        assert!(biht_decode(&q, &g, 5, BihtParams::default()).is_err());
    }
}
