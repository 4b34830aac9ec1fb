//! Plain-text file formats.
//!
//! Signal:
//! ```text
//! n=<N> k=<K>
//! <index> <value>
//! ```
//! Measurements (`alpha=gaussian` marks a Gaussian design, `mode` defaults
//! to `signs`):
//! ```text
//! m=<M> alpha=<alpha> seed=<seed> gamma=<gamma> [n=<N>] [mode=signs|raw]
//! <sign or value>
//! ```
//! Score dump: CSV `i,q_plus,q_minus`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use crate::baselines::GaussianDesignSeed;
use crate::decoder::ScoreTable;
use crate::encoder::{Design, RawMeasurements, SignMeasurements, SparseSignal};
use crate::error::{Error, Result};
use crate::stable::{DesignSeed, StableParams};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// `key=value` tokens of a header line.
pub fn parse_header(line: &str, lineno: usize) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for tok in line.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| parse_err(lineno, format!("expected key=value, got `{tok}`")))?;
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(parse_err(lineno, format!("duplicate key `{k}`")));
        }
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(h: &BTreeMap<String, String>, key: &str, lineno: usize) -> Result<T> {
    let raw = h.get(key).ok_or_else(|| parse_err(lineno, format!("missing `{key}`")))?;
    raw.parse().map_err(|_| parse_err(lineno, format!("bad value for `{key}`: `{raw}`")))
}

/// Non-empty, non-comment lines with their 1-based numbers.
fn content_lines<R: BufRead>(r: R) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push((i + 1, t.to_string()));
        }
    }
    Ok(out)
}

pub fn write_signal<W: Write>(mut w: W, s: &SparseSignal) -> Result<()> {
    writeln!(w, "n={} k={}", s.n(), s.k())?;
    for &(i, v) in s.entries() {
        writeln!(w, "{i} {v}")?;
    }
    Ok(())
}

pub fn read_signal<R: BufRead>(r: R) -> Result<SparseSignal> {
    let lines = content_lines(r)?;
    let ((hl, header), body) = lines.split_first().ok_or_else(|| parse_err(0, "empty signal file"))?;
    let h = parse_header(header, *hl)?;
    let n: usize = field(&h, "n", *hl)?;
    let k: usize = field(&h, "k", *hl)?;
    let mut entries = Vec::with_capacity(body.len());
    for (ln, line) in body {
        let mut it = line.split_whitespace();
        let (Some(i), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(*ln, "expected `index value`"));
        };
        let i: usize = i.parse().map_err(|_| parse_err(*ln, format!("bad index `{i}`")))?;
        let v: f64 = v.parse().map_err(|_| parse_err(*ln, format!("bad value `{v}`")))?;
        entries.push((i, v));
    }
    if entries.len() != k {
        return Err(parse_err(*hl, format!("header says k={k}, file has {} entries", entries.len())));
    }
    SparseSignal::new(n, entries)
}

/// Measurement vector as read from or written to disk.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementFile {
    Signs(SignMeasurements),
    Raw(RawMeasurements),
}

impl MeasurementFile {
    pub fn design(&self) -> Design {
        match self {
            MeasurementFile::Signs(s) => s.design,
            MeasurementFile::Raw(r) => r.design,
        }
    }
}

fn design_header(d: &Design) -> String {
    match d {
        Design::Stable { seed, alpha } => {
            format!("m={} alpha={} seed={} n={}", seed.m, alpha, seed.master_seed, seed.n)
        }
        Design::Gaussian(g) => format!("m={} alpha=gaussian seed={} n={}", g.m, g.master_seed, g.n),
    }
}

pub fn write_measurements<W: Write>(mut w: W, file: &MeasurementFile) -> Result<()> {
    match file {
        MeasurementFile::Signs(s) => {
            writeln!(w, "{} gamma={} mode=signs", design_header(&s.design), s.flip_prob)?;
            for &v in &s.signs {
                writeln!(w, "{v}")?;
            }
        }
        MeasurementFile::Raw(r) => {
            writeln!(w, "{} gamma=0 mode=raw", design_header(&r.design))?;
            for &v in &r.y {
                writeln!(w, "{v}")?;
            }
        }
    }
    Ok(())
}

/// Read a measurement file. `n` overrides or supplies the signal length when
/// the header omits it.
pub fn read_measurements<R: BufRead>(r: R, n: Option<usize>) -> Result<MeasurementFile> {
    let lines = content_lines(r)?;
    let ((hl, header), body) =
        lines.split_first().ok_or_else(|| parse_err(0, "empty measurement file"))?;
    let hl = *hl;
    let h = parse_header(header, hl)?;
    let m: usize = field(&h, "m", hl)?;
    let seed: u64 = field(&h, "seed", hl)?;
    let gamma: f64 = field(&h, "gamma", hl)?;
    let n = match (n, h.contains_key("n")) {
        (Some(n), _) => n,
        (None, true) => field(&h, "n", hl)?,
        (None, false) => return Err(parse_err(hl, "signal length unknown: add n=<N> or pass it")),
    };
    let alpha = h.get("alpha").ok_or_else(|| parse_err(hl, "missing `alpha`"))?;
    let design = if alpha == "gaussian" {
        Design::Gaussian(GaussianDesignSeed::new(seed, n, m))
    } else {
        let a: f64 = field(&h, "alpha", hl)?;
        StableParams::new(a)?;
        Design::Stable { seed: DesignSeed::new(seed, n, m), alpha: a }
    };
    if body.len() != m {
        return Err(parse_err(hl, format!("header says m={m}, file has {} values", body.len())));
    }
    let mode = h.get("mode").map(String::as_str).unwrap_or("signs");
    match mode {
        "signs" => {
            let mut signs = Vec::with_capacity(m);
            for (ln, line) in body {
                let s: i8 = match line.as_str() {
                    "-1" => -1,
                    "0" => 0,
                    "1" | "+1" => 1,
                    other => return Err(parse_err(*ln, format!("expected -1, 0 or 1, got `{other}`"))),
                };
                signs.push(s);
            }
            if !(0.0..1.0).contains(&gamma) {
                return Err(parse_err(hl, format!("gamma {gamma} outside [0, 1)")));
            }
            Ok(MeasurementFile::Signs(SignMeasurements { signs, design, flip_prob: gamma }))
        }
        "raw" => {
            let mut y = Vec::with_capacity(m);
            for (ln, line) in body {
                y.push(line.parse().map_err(|_| parse_err(*ln, format!("bad value `{line}`")))?);
            }
            Ok(MeasurementFile::Raw(RawMeasurements { y, design }))
        }
        other => Err(parse_err(hl, format!("unknown mode `{other}`"))),
    }
}

pub fn write_scores<W: Write>(mut w: W, scores: &ScoreTable) -> Result<()> {
    writeln!(w, "i,q_plus,q_minus")?;
    for (i, (p, m)) in scores.q_plus.iter().zip(&scores.q_minus).enumerate() {
        writeln!(w, "{i},{p},{m}")?;
    }
    Ok(())
}
