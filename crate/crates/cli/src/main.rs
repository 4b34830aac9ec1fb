use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use onescan::baselines::{biht_decode, marginal_regression_decode, BihtParams, GaussianDesignSeed};
use onescan::bounds::{BoundQuery, Exponent, KValue};
use onescan::decoder::{compute_scores, estimate_signs_threshold, estimate_signs_topk, SignEstimate};
use onescan::encoder::{apply_flip_noise, encode_with_design, quantize, Design, FlipNoise};
use onescan::formats::{read_measurements, read_signal, write_measurements, write_scores, write_signal, MeasurementFile};
use onescan::harness::{generate_signal, run_bounds_table, run_experiment, write_bounds, write_results, ExperimentConfig};
use onescan::sparsity::estimate_k;
use onescan::stable::DesignSeed;

#[derive(Parser)]
#[command(name = "onescan", version, about = "One-scan 1-bit compressed sensing toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a random signal as in the experiments.
    Signal {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure a signal file.
    Encode(EncodeArgs),
    /// Decode a sign measurement file.
    Decode(DecodeArgs),
    /// Estimate the sparsity from a raw measurement file.
    EstimateK {
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        /// Defaults to the alpha in the header.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimized Chernoff exponents as CSV.
    Bounds {
        #[arg(long, default_value = "H1")]
        which: Exponent,
        #[arg(long, value_delimiter = ',', default_value = "0", allow_hyphen_values = true)]
        epsilon: Vec<f64>,
        #[arg(long = "k", value_delimiter = ',', default_value = "5,10,100,inf")]
        k: Vec<KValue>,
        #[arg(long, value_delimiter = ',', default_value = "0")]
        gamma: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte-Carlo grid.
    Experiment {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a Gaussian-design sign file with a reference decoder.
    Baseline {
        #[arg(long)]
        measurements: PathBuf,
        #[arg(long = "k")]
        k: usize,
        #[arg(long, default_value = "marginal")]
        method: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// `--config <file>` plus one flag per config field; flags win.
#[derive(Args)]
struct ConfigArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long = "k")]
    k: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    zeta_grid: Option<String>,
    #[arg(long)]
    gamma_grid: Option<String>,
    #[arg(long)]
    beta_grid: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    k_mode: Option<String>,
    #[arg(long)]
    rule: Option<String>,
    #[arg(long)]
    master_seed: Option<String>,
    #[arg(long)]
    signal_sigma: Option<String>,
    #[arg(long)]
    biht_iters: Option<String>,
    #[arg(long)]
    biht_step: Option<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                ExperimentConfig::parse(&text).with_context(|| format!("in {}", p.display()))?
            }
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("n", &self.n),
            ("k", &self.k),
            ("alpha", &self.alpha),
            ("delta", &self.delta),
            ("zeta_grid", &self.zeta_grid),
            ("gamma_grid", &self.gamma_grid),
            ("beta_grid", &self.beta_grid),
            ("trials", &self.trials),
            ("method", &self.method),
            ("k_mode", &self.k_mode),
            ("rule", &self.rule),
            ("master_seed", &self.master_seed),
            ("signal_sigma", &self.signal_sigma),
            ("biht_iters", &self.biht_iters),
            ("biht_step", &self.biht_step),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    signal: PathBuf,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Use a standard normal design instead of an alpha-stable one.
    #[arg(long)]
    gaussian: bool,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    noise_seed: u64,
    /// Write full-precision measurements instead of signs.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    measurements: PathBuf,
    /// Sparsity used in the scores; may be fractional.
    #[arg(long = "k")]
    k: f64,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "topk")]
    rule: String,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Also dump the score table as CSV.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn read_meas(path: &Path, n: Option<usize>) -> Result<MeasurementFile> {
    read_measurements(open(path)?, n).with_context(|| format!("reading {}", path.display()))
}

fn write_estimate(mut w: impl Write, est: &SignEstimate) -> Result<()> {
    writeln!(w, "i,sign")?;
    for &i in &est.support {
        writeln!(w, "{i},{}", est.signs[i])?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Signal { cfg, trial, out } => {
            let cfg = cfg.load()?;
            let mut w = output(&out)?;
            write_signal(&mut w, &generate_signal(&cfg, trial))?;
            w.flush()?;
        }
        Cmd::Encode(a) => {
            let signal = read_signal(open(&a.signal)?).with_context(|| format!("reading {}", a.signal.display()))?;
            let n = signal.n();
            let design = if a.gaussian {
                Design::Gaussian(GaussianDesignSeed::new(a.seed, n, a.m))
            } else {
                Design::Stable { seed: DesignSeed::new(a.seed, n, a.m), alpha: a.alpha }
            };
            if !a.gaussian {
                onescan::stable::StableParams::new(a.alpha)?;
            }
            let raw = encode_with_design(&signal, design)?;
            let file = if a.raw {
                if a.gamma != 0.0 {
                    bail!("--gamma applies to sign measurements only");
                }
                MeasurementFile::Raw(raw)
            } else {
                MeasurementFile::Signs(apply_flip_noise(&quantize(&raw), FlipNoise::new(a.gamma, a.noise_seed)?))
            };
            let mut w = output(&a.out)?;
            write_measurements(&mut w, &file)?;
            w.flush()?;
        }
        Cmd::Decode(a) => {
            let MeasurementFile::Signs(signs) = read_meas(&a.measurements, a.n)? else {
                bail!("{} holds raw measurements; decode needs signs", a.measurements.display());
            };
            let (seed, _) = signs.design.stable_seed()?;
            let scores = compute_scores(&signs, &seed, a.k)?;
            if let Some(p) = &a.scores {
                let mut w = output(&Some(p.clone()))?;
                write_scores(&mut w, &scores)?;
                w.flush()?;
            }
            let est = match a.rule.as_str() {
                "topk" => estimate_signs_topk(&scores, a.k, a.beta)?,
                "threshold" => estimate_signs_threshold(&scores),
                other => bail!("unknown rule `{other}` (topk or threshold)"),
            };
            write_estimate(output(&a.out)?, &est)?;
        }
        Cmd::EstimateK { measurements, n, alpha, out } => {
            let MeasurementFile::Raw(raw) = read_meas(&measurements, n.or(Some(1)))? else {
                bail!("{} holds signs; estimate-k needs raw measurements", measurements.display());
            };
            let alpha = match (alpha, raw.design) {
                (Some(a), _) => a,
                (None, Design::Stable { alpha, .. }) => alpha,
                (None, Design::Gaussian(_)) => bail!("Gaussian measurements carry no alpha; pass --alpha"),
            };
            let est = estimate_k(&raw, alpha)?;
            let mut w = output(&out)?;
            writeln!(w, "k_hat,m_used")?;
            writeln!(w, "{},{}", est.k_hat, est.m_used)?;
            w.flush()?;
        }
        Cmd::Bounds { which, epsilon, k, gamma, out } => {
            let mut queries = Vec::new();
            for &e in &epsilon {
                for &kv in &k {
                    for &g in &gamma {
                        queries.push(BoundQuery::new(e, kv, g));
                    }
                }
            }
            let rows = run_bounds_table(&queries, which)?;
            let mut w = output(&out)?;
            write_bounds(&mut w, &rows)?;
            w.flush()?;
        }
        Cmd::Experiment { cfg, out } => {
            let cfg = cfg.load()?;
            let rows = run_experiment(&cfg)?;
            let mut w = output(&out)?;
            write_results(&mut w, &rows)?;
            w.flush()?;
        }
        Cmd::Baseline { measurements, k, method, n, iters, step, out } => {
            let MeasurementFile::Signs(signs) = read_meas(&measurements, n)? else {
                bail!("{} holds raw measurements; baseline needs signs", measurements.display());
            };
            let g = signs.design.gaussian_seed()?;
            let est = match method.as_str() {
                "marginal" => marginal_regression_decode(&signs, &g, k)?,
                "biht" => biht_decode(&signs, &g, k, BihtParams { iters, step })?,
                other => bail!("unknown baseline `{other}` (marginal or biht)"),
            };
            write_estimate(output(&out)?, &est)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("onescan: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
