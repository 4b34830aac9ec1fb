//! Symmetric alpha-stable variates and matrix-free design cells.
//!
//! A design cell `(i, j)` is the pair `(u_ij, w_ij)` with `u` uniform on
//! `(-pi/2, pi/2)` and `w` unit-rate exponential. The stable entry is
//! `s_ij = g(u_ij, w_ij; alpha)` (Chambers–Mallows–Stuck). Cells are derived
//! from `(master_seed, i, j)` alone, so encoder and decoder never exchange the
//! matrix.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::rng::{derive, open_unit, CounterStream};

const STABLE_DOMAIN: u64 = 0x5354_4142_4c45; // "STABLE"

/// Largest representable `u` strictly below `pi/2`.
pub const U_MAX: f64 = 1.570_796_326_794_896_4;

/// Stability index of `S(alpha, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableParams {
    alpha: f64,
}

impl StableParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha <= 2.0 {
            Ok(Self { alpha })
        } else {
            Err(Error::InvalidAlpha(alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for StableParams {
    fn default() -> Self {
        Self { alpha: 0.05 }
    }
}

/// One `(u, w)` draw of the design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellDraw {
    pub u: f64,
    pub w: f64,
}

impl CellDraw {
    /// The stable entry `g(u, w; alpha)`.
    pub fn stable(&self, alpha: f64) -> f64 {
        cms_unchecked(self.u, self.w, alpha)
    }

    pub fn sign_u(&self) -> f64 {
        if self.u > 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Seed from which every cell of an `n x m` stable design is regenerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DesignSeed {
    pub master_seed: u64,
    pub n: usize,
    pub m: usize,
}

impl DesignSeed {
    pub fn new(master_seed: u64, n: usize, m: usize) -> Self {
        Self { master_seed, n, m }
    }

    /// Deterministic draw for cell `(i, j)`.
    pub fn cell(&self, i: usize, j: usize) -> Result<CellDraw> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        if j >= self.m {
            return Err(Error::IndexOutOfRange { index: j, len: self.m });
        }
        Ok(self.row(i).cell(j))
    }

    /// Cached stream for coordinate `i`. No range check on `i`.
    #[inline]
    pub fn row(&self, i: usize) -> DesignRow {
        DesignRow {
            stream: CounterStream::new(derive(self.master_seed, STABLE_DOMAIN, i as u64)),
        }
    }
}

/// All cells `(i, .)` of one coordinate.
#[derive(Debug, Clone, Copy)]
pub struct DesignRow {
    stream: CounterStream,
}

impl DesignRow {
    #[inline]
    pub fn cell(&self, j: usize) -> CellDraw {
        let (ubits, wunit) = self.raw(j);
        let u = ((open_unit(ubits) - 0.5) * std::f64::consts::PI).clamp(-U_MAX, U_MAX);
        CellDraw { u, w: -wunit.ln() }
    }

    /// `(sgn(u_ij), U_ij)` with `w_ij = -ln U_ij`. This is all the decoder
    /// needs: `exp(-(k-1) w_ij) = U_ij^(k-1)`.
    #[inline(always)]
    pub fn sign_and_unit(&self, j: usize) -> (f64, f64) {
        let (ubits, wunit) = self.raw(j);
        // open_unit(ubits) >= 0.5 exactly when the top bit is set.
        let sign = if ubits >> 63 == 1 { 1.0 } else { -1.0 };
        (sign, wunit)
    }

    #[inline(always)]
    fn raw(&self, j: usize) -> (u64, f64) {
        let c = 2 * j as u64;
        (self.stream.word(c), open_unit(self.stream.word(c + 1)))
    }
}

/// Chambers–Mallows–Stuck transform
/// `g(u, w; alpha) = sin(alpha u) / cos(u)^(1/alpha) * [cos(u - alpha u) / w]^((1 - alpha)/alpha)`.
///
/// Evaluated in log space so that small `alpha` (large exponents) neither
/// underflows `cos(u)^(1/alpha)` nor overflows intermediate factors.
pub fn cms_transform(u: f64, w: f64, alpha: f64) -> Result<f64> {
    StableParams::new(alpha)?;
    if !(u.abs() < FRAC_PI_2) || !u.is_finite() {
        return Err(Error::Domain(format!("u = {u} outside (-pi/2, pi/2)")));
    }
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::Domain(format!("w = {w} must be positive and finite")));
    }
    Ok(cms_unchecked(u, w, alpha))
}

#[inline]
fn cms_unchecked(u: f64, w: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        return u.tan();
    }
    if u == 0.0 {
        return 0.0;
    }
    let s = (alpha * u).sin();
    let log_abs = s.abs().ln() - u.cos().ln() / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * u).cos().ln() - w.ln());
    s.signum() * log_abs.exp()
}
