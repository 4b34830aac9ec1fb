//! Measurement collection: `y_j = sum_i x_i s_ij`, streaming updates,
//! 1-bit quantization, and measurement noise.

use std::collections::BTreeSet;

use crate::baselines::GaussianDesignSeed;
use crate::error::{Error, Result};
use crate::rng::{box_muller, derive, open_unit, CounterStream};
use crate::stable::{DesignSeed, StableParams};

const FLIP_DOMAIN: u64 = 0x464c_4950; // "FLIP"
const NOISE_DOMAIN: u64 = 0x004e_4f49_5345; // "NOISE"

/// Stable entries saturate here so that a sum of a few saturated terms stays
/// finite. Only reachable for `alpha` near 0 with probability ~1e-16 per cell.
const STABLE_SATURATION: f64 = 1e300;

/// A length-`n` signal stored as its nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    n: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseSignal {
    /// Entries are sorted by index. Indices must be distinct and in range,
    /// values nonzero and finite.
    pub fn new(n: usize, mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidParameter(format!("duplicate index {}", w[0].0)));
            }
        }
        for &(i, v) in &entries {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if v == 0.0 || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("entry {i} has value {v}")));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, entries: Vec::new() }
    }

    /// Build from a dense vector, keeping its nonzero entries.
    pub fn from_dense(x: &[f64]) -> Result<Self> {
        let entries = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        Self::new(x.len(), entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nonzero entries.
    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.entries.iter().map(|&(i, _)| i).collect()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for &(i, v) in &self.entries {
            x[i] = v;
        }
        x
    }

    /// True sign of coordinate `i` in {-1, 0, +1}.
    pub fn sign_at(&self, i: usize) -> i8 {
        match self.entries.binary_search_by_key(&i, |&(j, _)| j) {
            Ok(p) => {
                if self.entries[p].1 > 0.0 {
                    1
                } else {
                    -1
                }
            }
            Err(_) => 0,
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.n, self.entries.iter().map(|&(i, v)| (i, c * v)).collect())
    }
}

/// Which matrix generated a measurement vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Design {
    Stable { seed: DesignSeed, alpha: f64 },
    Gaussian(GaussianDesignSeed),
}

impl Design {
    pub fn n(&self) -> usize {
        match self {
            Design::Stable { seed, .. } => seed.n,
            Design::Gaussian(g) => g.n,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Design::Stable { seed, .. } => seed.m,
            Design::Gaussian(g) => g.m,
        }
    }

    /// Fill `out[j] = a_ij` for `j < out.len()`.
    pub fn fill_row(&self, i: usize, out: &mut [f64]) {
        match self {
            Design::Stable { seed, alpha } => {
                let row = seed.row(i);
                for (j, o) in out.iter_mut().enumerate() {
                    *o = row
                        .cell(j)
                        .stable(*alpha)
                        .clamp(-STABLE_SATURATION, STABLE_SATURATION);
                }
            }
            Design::Gaussian(g) => g.row(i).fill(out),
        }
    }

    /// Entry `a_ij` (unchecked indices).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            Design::Stable { seed, alpha } => seed
                .row(i)
                .cell(j)
                .stable(*alpha)
                .clamp(-STABLE_SATURATION, STABLE_SATURATION),
            Design::Gaussian(g) => g.row(i).entry(j),
        }
    }

    pub fn stable_seed(&self) -> Result<(DesignSeed, f64)> {
        match self {
            Design::Stable { seed, alpha } => Ok((*seed, *alpha)),
            Design::Gaussian(_) => Err(Error::DesignMismatch(
                "expected an alpha-stable design, found a Gaussian one".into(),
            )),
        }
    }

    pub fn gaussian_seed(&self) -> Result<GaussianDesignSeed> {
        match self {
            Design::Gaussian(g) => Ok(*g),
            Design::Stable { .. } => Err(Error::DesignMismatch(
                "expected a Gaussian design, found an alpha-stable one".into(),
            )),
        }
    }
}

/// Full-precision measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct RawMeasurements {
    pub y: Vec<f64>,
    pub design: Design,
}

impl RawMeasurements {
    pub fn m(&self) -> usize {
        self.y.len()
    }

    /// Turnstile update `x_i += delta`: `y_j += delta * a_ij` for every `j`.
    pub fn update(&mut self, i: usize, delta: f64) -> Result<()> {
        let n = self.design.n();
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        let mut col = vec![0.0; self.y.len()];
        self.design.fill_row(i, &mut col);
        for (y, a) in self.y.iter_mut().zip(&col) {
            *y += delta * a;
        }
        Ok(())
    }

    /// Add i.i.d. `N(0, sigma^2)` noise to every measurement.
    pub fn add_gaussian_noise(&mut self, sigma: f64, noise_seed: u64) -> Result<()> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("noise sigma {sigma}")));
        }
        let stream = CounterStream::new(derive(noise_seed, NOISE_DOMAIN, 0));
        for (j, y) in self.y.iter_mut().enumerate() {
            let (z, _) = box_muller(stream.word(2 * j as u64), stream.word(2 * j as u64 + 1));
            *y += sigma * z;
        }
        Ok(())
    }
}

/// 1-bit measurements `sgn(y_j)` with `sgn(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignMeasurements {
    pub signs: Vec<i8>,
    pub design: Design,
    /// Total flip probability applied since quantization.
    pub flip_prob: f64,
}

impl SignMeasurements {
    pub fn m(&self) -> usize {
        self.signs.len()
    }
}

/// Independent sign flips with probability `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlipNoise {
    gamma: f64,
    pub noise_seed: u64,
}

impl FlipNoise {
    pub fn new(gamma: f64, noise_seed: u64) -> Result<Self> {
        if (0.0..1.0).contains(&gamma) {
            Ok(Self { gamma, noise_seed })
        } else {
            Err(Error::InvalidParameter(format!("flip probability {gamma} outside [0, 1)")))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// `y_j = sum_i x_i s_ij` over the stored entries; cost `O(K M)`.
pub fn encode(signal: &SparseSignal, seed: DesignSeed, alpha: f64) -> Result<RawMeasurements> {
    StableParams::new(alpha)?;
    encode_with_design(signal, Design::Stable { seed, alpha })
}

/// Encode against any design (stable or Gaussian).
pub fn encode_with_design(signal: &SparseSignal, design: Design) -> Result<RawMeasurements> {
    if signal.n() != design.n() {
        return Err(Error::DimensionMismatch { expected: design.n(), actual: signal.n() });
    }
    let m = design.m();
    let mut y = vec![0.0; m];
    let mut col = vec![0.0; m];
    for &(i, v) in signal.entries() {
        design.fill_row(i, &mut col);
        for (yj, a) in y.iter_mut().zip(&col) {
            *yj += v * a;
        }
    }
    Ok(RawMeasurements { y, design })
}

#[inline]
pub fn sgn(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

pub fn quantize(raw: &RawMeasurements) -> SignMeasurements {
    SignMeasurements {
        signs: raw.y.iter().map(|&v| sgn(v)).collect(),
        design: raw.design,
        flip_prob: 0.0,
    }
}

/// Negate each sign independently with probability `gamma`, deterministically
/// in `noise_seed`.
pub fn apply_flip_noise(signs: &SignMeasurements, noise: FlipNoise) -> SignMeasurements {
    let g = noise.gamma;
    let mut out = signs.clone();
    if g > 0.0 {
        let stream = CounterStream::new(derive(noise.noise_seed, FLIP_DOMAIN, 0));
        for (j, s) in out.signs.iter_mut().enumerate() {
            if open_unit(stream.word(j as u64)) < g {
                *s = -*s;
            }
        }
    }
    let p = signs.flip_prob;
    out.flip_prob = p * (1.0 - g) + g * (1.0 - p);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed(n: usize, m: usize) -> DesignSeed {
        DesignSeed::new(11, n, m)
    }

    #[test]
    fn signal_validation() {
        assert!(SparseSignal::new(5, vec![(1, 1.0), (1, 2.0)]).is_err());
        assert!(SparseSignal::new(5, vec![(5, 1.0)]).is_err());
        assert!(SparseSignal::new(5, vec![(2, 0.0)]).is_err());
        let s = SparseSignal::new(5, vec![(3, -1.0), (0, 2.0)]).unwrap();
        assert_eq!(s.entries(), &[(0, 2.0), (3, -1.0)]);
        assert_eq!((s.sign_at(0), s.sign_at(3), s.sign_at(1)), (1, -1, 0));
    }

    #[test]
    fn zero_signal_encodes_to_zero() {
        let raw = encode(&SparseSignal::zeros(8), seed(8, 16), 0.05).unwrap();
        assert!(raw.y.iter().all(|&v| v == 0.0));
        assert!(quantize(&raw).signs.iter().all(|&s| s == 0));
    }

    #[test]
    fn single_entry_scales_the_column() {
        let sd = seed(10, 12);
        let raw = encode(&SparseSignal::new(10, vec![(5, 2.0)]).unwrap(), sd, 0.5).unwrap();
        for j in 0..12 {
            let s = sd.cell(5, j).unwrap().stable(0.5);
            assert_eq!(raw.y[j], 2.0 * s);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let err = encode(&SparseSignal::zeros(4), seed(5, 3), 0.5).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 5, actual: 4 });
    }

    #[test]
    fn quantize_rule() {
        let raw = RawMeasurements { y: vec![3.2, -0.1, 0.0], design: Design::Stable { seed: seed(1, 3), alpha: 1.0 } };
        let q = quantize(&raw);
        assert_eq!(q.signs, vec![1, -1, 0]);
        let requant = quantize(&RawMeasurements {
            y: q.signs.iter().map(|&s| s as f64).collect(),
            design: raw.design,
        });
        assert_eq!(requant.signs, q.signs);
        let neg = RawMeasurements { y: vec![-1.0, -5.0, -1e-300], design: raw.design };
        assert!(quantize(&neg).signs.iter().all(|&s| s == -1));
    }

    #[test]
    fn update_out_of_range() {
        let mut raw = encode(&SparseSignal::zeros(4), seed(4, 3), 0.5).unwrap();
        assert!(raw.update(4, 1.0).is_err());
    }

    #[test]
    fn update_from_zero_matches_encode() {
        let sd = seed(6, 9);
        let mut raw = encode(&SparseSignal::zeros(6), sd, 0.3).unwrap();
        raw.update(2, -1.5).unwrap();
        let direct = encode(&SparseSignal::new(6, vec![(2, -1.5)]).unwrap(), sd, 0.3).unwrap();
        assert_eq!(raw.y, direct.y);
    }

    #[test]
    fn update_then_inverse_restores() {
        let sd = seed(6, 9);
        let sig = SparseSignal::new(6, vec![(0, 1.0), (4, -2.0)]).unwrap();
        let orig = encode(&sig, sd, 1.2).unwrap();
        let mut raw = orig.clone();
        raw.update(3, 0.75).unwrap();
        raw.update(3, -0.75).unwrap();
        for (a, b) in raw.y.iter().zip(&orig.y) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-300) + 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn flip_noise_zero_is_identity() {
        let sd = seed(6, 50);
        let sig = SparseSignal::new(6, vec![(1, 1.0)]).unwrap();
        let q = quantize(&encode(&sig, sd, 0.5).unwrap());
        let f = apply_flip_noise(&q, FlipNoise::new(0.0, 3).unwrap());
        assert_eq!(f, q);
        assert!(FlipNoise::new(1.0, 0).is_err());
        assert!(FlipNoise::new(-0.1, 0).is_err());
    }

    #[test]
    fn flip_noise_is_deterministic() {
        let design = Design::Stable { seed: seed(1, 1000), alpha: 1.0 };
        let q = SignMeasurements { signs: vec![1; 1000], design, flip_prob: 0.0 };
        let a = apply_flip_noise(&q, FlipNoise::new(0.3, 9).unwrap());
        let b = apply_flip_noise(&q, FlipNoise::new(0.3, 9).unwrap());
        let c = apply_flip_noise(&q, FlipNoise::new(0.3, 10).unwrap());
        assert_eq!(a, b);
        assert_ne!(a.signs, c.signs);
        assert_eq!(a.flip_prob, 0.3);
    }
}
