//! Monte-Carlo experiment grids and bound tables.
//!
//! One trial draws a signal, encodes it with `M = ceil(zeta K ln(N/delta))`
//! measurements, quantizes, flips signs, decodes and scores the result. The
//! design, flip and signal streams depend on the trial index only, so grid
//! points share common random numbers: a larger `M` extends the same design
//! and a larger `gamma` flips a superset of signs.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::baselines::{
    biht_iterate, estimate_from_ranking, magnitude_ranking, marginal_statistics, BihtParams,
    GaussianDesignSeed,
};
use crate::bounds::{optimize, BoundQuery, Exponent};
use crate::decoder::{compute_scores, estimate_signs_threshold, rank_coordinates, selection_size, topk_from_ranking};
use crate::encoder::{apply_flip_noise, encode, encode_with_design, quantize, Design, FlipNoise, SparseSignal};
use crate::error::{Error, Result};
use crate::metrics::{median, recall, sign_error, sign_error_all, TrialResult};
use crate::rng::derive;
use crate::sparsity::estimate_k;
use crate::stable::DesignSeed;

const SIGNAL_DOMAIN: u64 = 0x5349_474e; // "SIGN"
const DESIGN_DOMAIN: u64 = 0x4445_5349_474e; // "DESIGN"
const FLIP_DOMAIN: u64 = 0x464c_4950; // "FLIP"
const KEST_DOMAIN: u64 = 0x4b45_5354; // "KEST"
const BASELINE_DOMAIN: u64 = 0x4241_5345; // "BASE"

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    OneScan,
    Marginal,
    Biht,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::OneScan => "onescan",
            Method::Marginal => "marginal",
            Method::Biht => "biht",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "onescan" => Ok(Method::OneScan),
            "marginal" => Ok(Method::Marginal),
            "biht" => Ok(Method::Biht),
            _ => Err(Error::InvalidParameter(format!("unknown method `{s}`"))),
        }
    }
}

/// Sparsity given to the decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMode {
    Exact,
    /// Harmonic-mean estimate from this many extra full-precision measurements.
    Estimated(usize),
}

impl fmt::Display for KMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KMode::Exact => f.write_str("exact"),
            KMode::Estimated(m) => write!(f, "estimated:{m}"),
        }
    }
}

impl FromStr for KMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(KMode::Exact);
        }
        s.strip_prefix("estimated:")
            .and_then(|m| m.parse().ok())
            .filter(|&m: &usize| m >= 2)
            .map(KMode::Estimated)
            .ok_or_else(|| Error::InvalidParameter(format!("k_mode `{s}`: expected exact or estimated:<m>=2..")))
    }
}

/// Sign rule of the one-scan decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    TopK,
    Threshold,
}

impl FromStr for Rule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "topk" => Ok(Rule::TopK),
            "threshold" => Ok(Rule::Threshold),
            _ => Err(Error::InvalidParameter(format!("unknown rule `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub delta: f64,
    pub zeta_grid: Vec<f64>,
    pub gamma_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub trials: usize,
    pub method: Method,
    pub k_mode: KMode,
    pub rule: Rule,
    pub master_seed: u64,
    pub signal_sigma: f64,
    pub biht: BihtParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            k: 20,
            alpha: 0.05,
            delta: 0.01,
            zeta_grid: vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 15.0],
            gamma_grid: vec![0.0],
            beta_grid: vec![1.0, 1.2, 1.5, 2.0],
            trials: 1000,
            method: Method::OneScan,
            k_mode: KMode::Exact,
            rule: Rule::TopK,
            master_seed: 1,
            signal_sigma: 5.0,
            biht: BihtParams::default(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidParameter(format!("bad value for `{key}`: `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse_value(key, v.trim())).collect()
}

impl ExperimentConfig {
    pub const KEYS: &'static [&'static str] = &[
        "n", "k", "alpha", "delta", "zeta_grid", "gamma_grid", "beta_grid", "trials", "method",
        "k_mode", "rule", "master_seed", "signal_sigma", "biht_iters", "biht_step",
    ];

    /// Set one field from its textual form; lists are comma-separated.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = parse_value(key, value)?,
            "k" => self.k = parse_value(key, value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "delta" => self.delta = parse_value(key, value)?,
            "zeta_grid" => self.zeta_grid = parse_list(key, value)?,
            "gamma_grid" => self.gamma_grid = parse_list(key, value)?,
            "beta_grid" => self.beta_grid = parse_list(key, value)?,
            "trials" => self.trials = parse_value(key, value)?,
            "method" => self.method = value.parse()?,
            "k_mode" => self.k_mode = value.parse()?,
            "rule" => self.rule = value.parse()?,
            "master_seed" => self.master_seed = parse_value(key, value)?,
            "signal_sigma" => self.signal_sigma = parse_value(key, value)?,
            "biht_iters" => self.biht.iters = parse_value(key, value)?,
            "biht_step" => self.biht.step = parse_value(key, value)?,
            _ => return Err(Error::InvalidParameter(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Parse `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key = value, got `{line}`") })?;
            cfg.set(k.trim(), v.trim())
                .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.n > self.k && self.k >= 1) {
            return bad(format!("need n > k >= 1, got n={} k={}", self.n, self.k));
        }
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        if self.zeta_grid.is_empty() || self.gamma_grid.is_empty() || self.beta_grid.is_empty() {
            return bad("grids must be non-empty".into());
        }
        if let Some(z) = self.zeta_grid.iter().find(|z| !(**z > 0.0 && z.is_finite())) {
            return bad(format!("zeta {z} must be positive"));
        }
        if let Some(g) = self.gamma_grid.iter().find(|g| !(0.0..0.5).contains(*g)) {
            return bad(format!("gamma {g} outside [0, 1/2)"));
        }
        for &b in &self.beta_grid {
            let c = selection_size(self.k as f64, b);
            if !(b >= 1.0) || c > self.n {
                return bad(format!("beta {b} selects {c} of {} coordinates", self.n));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta {} outside (0, 1)", self.delta));
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::InvalidAlpha(self.alpha));
        }
        if !(self.signal_sigma > 0.0) {
            return bad("signal_sigma must be positive".into());
        }
        if self.method != Method::OneScan && self.k_mode != KMode::Exact {
            return bad(format!("k_mode {} only applies to onescan", self.k_mode));
        }
        if self.method != Method::OneScan && self.rule != Rule::TopK {
            return bad("the threshold rule only applies to onescan".into());
        }
        if self.biht.iters < 1 {
            return bad("biht_iters must be at least 1".into());
        }
        Ok(())
    }

    /// `ceil(zeta K ln(N / delta))`.
    pub fn measurements(&self, zeta: f64) -> usize {
        (zeta * self.k as f64 * (self.n as f64 / self.delta).ln()).ceil() as usize
    }
}

/// `K` distinct uniform coordinates with i.i.d. `N(0, sigma^2)` values.
pub fn generate_signal(config: &ExperimentConfig, trial: usize) -> SparseSignal {
    let mut rng = ChaCha8Rng::seed_from_u64(derive(config.master_seed, SIGNAL_DOMAIN, trial as u64));
    let normal = Normal::new(0.0, config.signal_sigma).expect("validated sigma");
    let mut idx = sample(&mut rng, config.n, config.k).into_vec();
    idx.sort_unstable();
    let entries = idx
        .into_iter()
        .map(|i| {
            let mut v = 0.0;
            while v == 0.0 {
                v = normal.sample(&mut rng);
            }
            (i, v)
        })
        .collect();
    SparseSignal::new(config.n, entries).expect("distinct in-range coordinates")
}

/// Per-trial outcome at one `(zeta, gamma)`, one entry per `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub m: usize,
    pub per_beta: Vec<TrialResult>,
}

fn trial_seed(config: &ExperimentConfig, domain: u64, trial: usize) -> u64 {
    derive(config.master_seed, domain, trial as u64)
}

/// Builds a sign estimate from a ranking and a selection size.
type EstimateAt = Box<dyn Fn(&[usize], usize) -> crate::decoder::SignEstimate>;

/// Run trial `trial` at `(zeta, gamma)`.
pub fn run_trial(config: &ExperimentConfig, zeta: f64, gamma: f64, trial: usize) -> Result<PointOutcome> {
    let m = config.measurements(zeta);
    let n = config.n;
    let k = config.k;
    let signal = generate_signal(config, trial);
    let design = match config.method {
        Method::OneScan => Design::Stable {
            seed: DesignSeed::new(trial_seed(config, DESIGN_DOMAIN, trial), n, m),
            alpha: config.alpha,
        },
        Method::Marginal | Method::Biht => {
            Design::Gaussian(GaussianDesignSeed::new(trial_seed(config, BASELINE_DOMAIN, trial), n, m))
        }
    };
    let raw = encode_with_design(&signal, design)?;
    let noise = FlipNoise::new(gamma, trial_seed(config, FLIP_DOMAIN, trial))?;
    let signs = apply_flip_noise(&quantize(&raw), noise);

    let (k_used, k_hat) = match config.k_mode {
        KMode::Exact => (k as f64, None),
        KMode::Estimated(mk) => {
            let extra = DesignSeed::new(trial_seed(config, KEST_DOMAIN, trial), n, mk);
            let est = estimate_k(&encode(&signal, extra, config.alpha)?, config.alpha)?;
            if !(est.k_hat >= 1.0) {
                return Err(Error::InvalidSparsity(est.k_hat));
            }
            (est.k_hat, Some(est.k_hat))
        }
    };

    // Ranking statistic and per-coordinate signs.
    let (ranking, estimate_at): (Vec<usize>, EstimateAt) =
        match config.method {
            Method::OneScan => {
                let (seed, _) = signs.design.stable_seed()?;
                let scores = compute_scores(&signs, &seed, k_used)?;
                if config.rule == Rule::Threshold {
                    let est = estimate_signs_threshold(&scores);
                    let r = TrialResult {
                        sign_error: sign_error_all(&est, &signal)?,
                        recall: recall(&est, &signal),
                        k_hat,
                    };
                    return Ok(PointOutcome { m, per_beta: vec![r; config.beta_grid.len()] });
                }
                let ranking = rank_coordinates(&scores);
                (ranking, Box::new(move |r: &[usize], c| topk_from_ranking(&scores, r, c)))
            }
            Method::Marginal | Method::Biht => {
                let g = signs.design.gaussian_seed()?;
                let x = if config.method == Method::Marginal {
                    marginal_statistics(&signs, &g)?
                } else {
                    biht_iterate(&signs, &g, k, config.biht)?
                };
                let ranking = magnitude_ranking(&x);
                (ranking, Box::new(move |r: &[usize], c| estimate_from_ranking(&x, r, c)))
            }
        };

    let sign_err = sign_error(&estimate_at(&ranking, k), &signal, k)?;
    let per_beta = config
        .beta_grid
        .iter()
        .map(|&b| {
            let est = estimate_at(&ranking, selection_size(k as f64, b));
            TrialResult { sign_error: sign_err, recall: recall(&est, &signal), k_hat }
        })
        .collect();
    Ok(PointOutcome { m, per_beta })
}

/// All trials at one `(zeta, gamma)`, in trial order.
pub fn run_point(config: &ExperimentConfig, zeta: f64, gamma: f64) -> Result<Vec<PointOutcome>> {
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            run_trial(config, zeta, gamma, t).map_err(|e| {
                Error::InvalidParameter(format!("trial {t} at zeta={zeta} gamma={gamma}: {e}"))
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub n: usize,
    pub k: usize,
    pub zeta: f64,
    pub gamma: f64,
    pub beta: f64,
    pub method: String,
    pub k_mode: KMode,
    pub median_sign_error: f64,
    pub median_recall: f64,
    pub trials: usize,
}

impl ResultRow {
    pub const HEADER: &'static str =
        "n,k,zeta,gamma,beta,method,k_mode,median_sign_error,median_recall,trials";
}

impl fmt::Display for ResultRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.k,
            self.zeta,
            self.gamma,
            self.beta,
            self.method,
            self.k_mode,
            self.median_sign_error,
            self.median_recall,
            self.trials
        )
    }
}

/// Method label in result rows; the threshold rule's all-coordinate error
/// is labelled separately.
pub fn method_label(config: &ExperimentConfig) -> String {
    match (config.method, config.rule) {
        (Method::OneScan, Rule::Threshold) => "onescan_threshold".into(),
        (m, _) => m.to_string(),
    }
}

/// Rows from per-trial outcomes at one grid point.
pub fn summarize(config: &ExperimentConfig, zeta: f64, gamma: f64, outcomes: &[PointOutcome]) -> Vec<ResultRow> {
    let betas: Vec<f64> = if config.rule == Rule::Threshold { vec![1.0] } else { config.beta_grid.clone() };
    betas
        .iter()
        .enumerate()
        .map(|(b, &beta)| {
            let errs: Vec<f64> = outcomes.iter().map(|o| o.per_beta[b].sign_error).collect();
            let recs: Vec<f64> = outcomes.iter().map(|o| o.per_beta[b].recall).collect();
            ResultRow {
                n: config.n,
                k: config.k,
                zeta,
                gamma,
                beta,
                method: method_label(config),
                k_mode: config.k_mode,
                median_sign_error: median(&errs).unwrap_or(f64::NAN),
                median_recall: median(&recs).unwrap_or(f64::NAN),
                trials: outcomes.len(),
            }
        })
        .collect()
}

/// Median rows over the `zeta x gamma x beta` grid, in that nesting order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for &zeta in &config.zeta_grid {
        for &gamma in &config.gamma_grid {
            let outcomes = run_point(config, zeta, gamma)?;
            rows.extend(summarize(config, zeta, gamma, &outcomes));
        }
    }
    Ok(rows)
}

pub fn write_results<W: Write>(mut w: W, rows: &[ResultRow]) -> Result<()> {
    writeln!(w, "{}", ResultRow::HEADER)?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundRow {
    pub query: BoundQuery,
    pub which: Exponent,
    pub t_star: f64,
    pub h_star: f64,
}

impl BoundRow {
    pub const HEADER: &'static str = "epsilon,K,gamma,which,t_star,h_star,inv_h_star";
}

impl fmt::Display for BoundRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{}",
            self.query.epsilon,
            self.query.k,
            self.query.gamma,
            self.which,
            self.t_star,
            self.h_star,
            1.0 / self.h_star
        )
    }
}

pub fn run_bounds_table(queries: &[BoundQuery], which: Exponent) -> Result<Vec<BoundRow>> {
    queries
        .iter()
        .map(|&q| {
            let r = optimize(which, q)?;
            Ok(BoundRow { query: q, which, t_star: r.t_star, h_star: r.h_star })
        })
        .collect()
}

pub fn write_bounds<W: Write>(mut w: W, rows: &[BoundRow]) -> Result<()> {
    writeln!(w, "{}", BoundRow::HEADER)?;
    for r in rows {
        writeln!(w, "{r}")?;
    }
    Ok(())
}
