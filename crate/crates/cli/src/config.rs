//! Run configuration: a TOML file merged with command-line overrides
//! (flags win), resolved into validated settings.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use maurey_core::scenario::ScenarioKind;
use maurey_core::sumsolve::SolverConfig;
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MAUREY_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "maurey", version, about = "Sum-space norm sweeps, fits and verification suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Integrate,
    Regions,
    Solve,
    Orlicz,
    Matnorm,
    Fit,
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Total min-integral per (θ, n), optionally cross-checked by an oracle.
    Integrate(Opts),
    /// Region partition and per-region integrals.
    Regions(Opts),
    /// Discretised sum-space decomposition with certificate bounds.
    Solve(Opts),
    /// Ψ ladder, its convex minorant and the ℓ_p-inclusion fit.
    Orlicz(Opts),
    /// OH and C_p norms of matrix tuples (random or from a JSON file).
    Matnorm(Opts),
    /// Scaling-exponent fits in n or θ.
    Fit(Opts),
    /// Named acceptance suites with pass/fail checks.
    Verify(Opts),
}

impl Command {
    pub fn split(self) -> (CommandName, Opts) {
        match self {
            Command::Integrate(o) => (CommandName::Integrate, o),
            Command::Regions(o) => (CommandName::Regions, o),
            Command::Solve(o) => (CommandName::Solve, o),
            Command::Orlicz(o) => (CommandName::Orlicz, o),
            Command::Matnorm(o) => (CommandName::Matnorm, o),
            Command::Fit(o) => (CommandName::Fit, o),
            Command::Verify(o) => (CommandName::Verify, o),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OracleChoice {
    None,
    Quad,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Vary {
    N,
    Theta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Both,
}

/// Every setting, all optional; shared by the config file and the flags.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Opts {
    /// TOML file with the same keys as the flags (snake_case); flags win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// oh_to_lp, oh_to_lp_relaxed or oh_to_cp.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Comma-separated θ values.
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    /// Comma-separated n values: integers, `2^k`, or doubling ranges `a..b`.
    #[arg(long)]
    pub n: Option<String>,
    /// Grid cells per variable.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Comma-separated half-widths of the symmetric log box (one, or one per n).
    #[arg(long, value_delimiter = ',')]
    pub half_width: Option<Vec<f64>>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, value_enum)]
    pub oracle: Option<OracleChoice>,
    #[arg(long)]
    pub quad_tol: Option<f64>,
    #[arg(long)]
    pub tail_ratio: Option<f64>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    /// Root seed for every stochastic step.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (default: $MAUREY_OUT_DIR, then the current directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Fit variable.
    #[arg(long, value_enum)]
    pub vary: Option<Vary>,
    /// Ψ ladder exponents: samples at 2^lo … 2^hi.
    #[arg(long, allow_negative_numbers = true)]
    pub ladder_lo: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    pub ladder_hi: Option<i32>,
    /// Matrix size for random tuples.
    #[arg(long)]
    pub m: Option<usize>,
    /// Tuple length for random tuples.
    #[arg(long)]
    pub k: Option<usize>,
    /// Comma-separated Schatten exponents p ∈ (1, 2).
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Number of random instances.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// JSON file with a matrix tuple: `[[[ [re, im], … ], …], …]`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated suite names, or `all`.
    #[arg(long, value_delimiter = ',')]
    pub suite: Option<Vec<String>>,
}

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl Opts {
    /// Loads the config file (if any) and applies these flags on top.
    pub fn merged(&self) -> Result<Opts> {
        let mut base = match &self.config {
            Some(path) => load_file(path)?,
            None => Opts::default(),
        };
        overlay!(
            base, self, scenario, theta, n, resolution, half_width, max_iter, tol, step, oracle,
            quad_tol, tail_ratio, mc_samples, seed, out, workers, format, vary, ladder_lo,
            ladder_hi, m, k, p, count, restarts, input, suite
        );
        Ok(base)
    }
}

fn load_file(path: &Path) -> Result<Opts> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// One scale `n`, kept as `ln n` so that `2^1000` is representable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scale {
    pub ln_n: f64,
}

impl Scale {
    /// `n`, snapped to the nearest integer when it is one up to rounding.
    pub fn n(self) -> f64 {
        let n = self.ln_n.exp();
        let r = n.round();
        if (n - r).abs() <= 1e-12 * n { r } else { n }
    }
}

fn parse_scale(tok: &str) -> Result<Scale> {
    let tok = tok.trim();
    let ln_n = if let Some((base, exp)) = tok.split_once('^') {
        let b: f64 = base.trim().parse().with_context(|| format!("bad n `{tok}`"))?;
        let e: f64 = exp.trim().parse().with_context(|| format!("bad n `{tok}`"))?;
        e * b.ln()
    } else {
        let v: f64 = tok.parse().with_context(|| format!("bad n `{tok}`"))?;
        v.ln()
    };
    if !(ln_n >= 0.0 && ln_n.is_finite()) {
        bail!("n must be at least 1, got `{tok}`");
    }
    Ok(Scale { ln_n })
}

/// Parses `16,64`, `2^1000` and doubling ranges `16..4096`.
pub fn parse_scales(list: &str) -> Result<Vec<Scale>> {
    let mut out = Vec::new();
    for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = tok.split_once("..") {
            let (a, b) = (parse_scale(a)?, parse_scale(b)?);
            if b.ln_n < a.ln_n {
                bail!("empty range `{tok}`");
            }
            let steps = ((b.ln_n - a.ln_n) / 2f64.ln() + 1e-9).floor() as usize;
            out.extend((0..=steps).map(|i| Scale {
                ln_n: a.ln_n + i as f64 * 2f64.ln(),
            }));
        } else {
            out.push(parse_scale(tok)?);
        }
    }
    Ok(out)
}

/// Fully resolved settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub command: CommandName,
    pub scenario: ScenarioKind,
    /// `None` when not given: each command or suite uses its own default.
    pub thetas: Option<Vec<f64>>,
    pub scales: Option<Vec<Scale>>,
    pub resolution: usize,
    pub half_widths: Option<Vec<f64>>,
    pub solver: SolverConfig,
    pub oracle: OracleChoice,
    pub quad_tol: f64,
    pub tail_ratio: f64,
    pub mc_samples: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub format: Format,
    pub vary: Vary,
    pub ladder: (i32, i32),
    pub m: usize,
    pub k: usize,
    pub p: Vec<f64>,
    pub count: usize,
    pub restarts: usize,
    pub input: Option<PathBuf>,
    pub suites: Vec<String>,
}

pub const DEFAULT_SEED: u64 = 2024;

impl Settings {
    pub fn resolve(command: CommandName, o: &Opts) -> Result<Self> {
        let scenario: ScenarioKind = match &o.scenario {
            Some(s) => s.parse().map_err(|e| anyhow::anyhow!("{e}"))?,
            None => ScenarioKind::OhToLp,
        };
        let scales = match &o.n {
            Some(list) => {
                let s = parse_scales(list)?;
                if s.is_empty() {
                    bail!("the n list is empty");
                }
                Some(s)
            }
            None => None,
        };
        if let Some(t) = &o.theta {
            if t.is_empty() {
                bail!("the theta list is empty");
            }
        }
        let defaults = SolverConfig::default();
        let solver = SolverConfig {
            max_iter: o.max_iter.unwrap_or(defaults.max_iter),
            tol: o.tol.unwrap_or(defaults.tol),
            step: o.step.unwrap_or(defaults.step),
        };
        if !(solver.tol > 0.0 && solver.step > 0.0 && solver.max_iter > 0) {
            bail!("solver settings must be positive");
        }
        let workers = o.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        if workers == 0 {
            bail!("workers must be at least 1");
        }
        let resolution = o.resolution.unwrap_or(8);
        if resolution == 0 {
            bail!("resolution must be at least 1");
        }
        let out_dir = o
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let ladder = (o.ladder_lo.unwrap_or(-12), o.ladder_hi.unwrap_or(12));
        if ladder.1 - ladder.0 < 6 {
            bail!("the Ψ ladder needs at least 7 points");
        }
        Ok(Self {
            command,
            scenario,
            thetas: o.theta.clone(),
            scales,
            resolution,
            half_widths: o.half_width.clone(),
            solver,
            oracle: o.oracle.unwrap_or(OracleChoice::None),
            quad_tol: o.quad_tol.unwrap_or(maurey_core::oracle::DEFAULT_QUAD_TOL),
            tail_ratio: o.tail_ratio.unwrap_or(maurey_core::oracle::DEFAULT_TAIL_RATIO),
            mc_samples: o.mc_samples.unwrap_or(200_000),
            seed: o.seed.unwrap_or(DEFAULT_SEED),
            out_dir,
            workers,
            format: o.format.unwrap_or(Format::Both),
            vary: o.vary.unwrap_or(Vary::N),
            ladder,
            m: o.m.unwrap_or(6),
            k: o.k.unwrap_or(3),
            p: o.p.clone().unwrap_or_else(|| vec![1.25, 1.5, 1.75]),
            count: o.count.unwrap_or(10),
            restarts: o.restarts.unwrap_or(16),
            input: o.input.clone(),
            suites: o.suite.clone().unwrap_or_else(|| vec!["all".into()]),
        })
    }

    pub fn thetas_or(&self, default: &[f64]) -> Vec<f64> {
        self.thetas.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn scales_or(&self, default: &[f64]) -> Vec<Scale> {
        self.scales
            .clone()
            .unwrap_or_else(|| default.iter().map(|n| Scale { ln_n: n.ln() }).collect())
    }

    /// Half-width for the `i`-th scale, if one was given.
    pub fn half_width(&self, i: usize) -> Option<f64> {
        self.half_widths
            .as_ref()
            .map(|h| if h.len() == 1 { h[0] } else { h[i.min(h.len() - 1)] })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scale_lists() {
        let s = parse_scales("16..128, 2^1000,3").unwrap();
        let ns: Vec<f64> = s[..4].iter().map(|x| x.n().round()).collect();
        assert_eq!(ns, vec![16.0, 32.0, 64.0, 128.0]);
        assert!((s[4].ln_n - 1000.0 * 2f64.ln()).abs() < 1e-9);
        assert_eq!(s.len(), 6);
        assert!(parse_scales("").unwrap().is_empty());
        assert!(parse_scales("0").is_err());
        assert!(parse_scales("64..16").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let dir = std::env::temp_dir().join(format!("maurey-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "theta = [0.3]\nseed = 7\nresolution = 4\n").unwrap();
        let flags = Opts {
            config: Some(path),
            seed: Some(9),
            ..Default::default()
        };
        let m = flags.merged().unwrap();
        assert_eq!(m.theta, Some(vec![0.3]));
        assert_eq!(m.seed, Some(9));
        assert_eq!(m.resolution, Some(4));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
