//! The non-verification subcommands. Each returns its reports; writing them
//! is left to the caller.

use anyhow::{bail, Context, Result};
use maurey_core::integrator::{fit_n_exponent_ln, fit_theta_blowup, integrate_min_log, integrate_region_log, ln_table_target};
use maurey_core::matnorm::{cp_norm, oh_norm, random_tuple, CMatrix, CpConfig, MatrixTuple};
use maurey_core::oracle::{mc_estimate, quad_auto, LogBox, MinIntegrand};
use maurey_core::orlicz::{convexify, geometric_ladder, lp_inclusion_ratio, sandwich_violations, PsiCache, PsiConfig};
use maurey_core::regions::derive_regions;
use maurey_core::scenario::{build_scenario_ln, ScenarioKind, ScenarioSpec};
use maurey_core::sumsolve::{default_box, discretize, solve_decomposition};
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{CommandName, OracleChoice, Scale, Settings, Vary};
use crate::report::*;

/// Named random substreams derived from the root seed.
pub mod stream {
    pub const MONTE_CARLO: u64 = 1;
    pub const MATRICES: u64 = 2;
    pub const CP_RESTARTS: u64 = 3;
    pub const COEFFICIENTS: u64 = 4;
}

/// First word of substream `stream` of the root seed.
pub fn substream_seed(root: u64, stream: u64) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(root);
    r.set_stream(stream);
    r.next_u64()
}

/// A generator on substream `stream` of the root seed.
pub fn substream_rng(root: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream_seed(root, stream))
}

fn jobs(thetas: &[f64], scales: &[Scale]) -> Vec<(usize, f64, usize, Scale)> {
    let mut out = Vec::new();
    for &th in thetas {
        for (i, &sc) in scales.iter().enumerate() {
            out.push((out.len(), th, i, sc));
        }
    }
    out
}

fn spec(kind: ScenarioKind, theta: f64, sc: Scale) -> Result<ScenarioSpec> {
    Ok(build_scenario_ln(kind, theta, sc.ln_n)?)
}

pub fn run(s: &Settings) -> Result<Vec<Report>> {
    match s.command {
        CommandName::Integrate => integrate(s),
        CommandName::Regions => regions(s),
        CommandName::Solve => solve(s),
        CommandName::Orlicz => orlicz(s),
        CommandName::Matnorm => matnorm(s),
        CommandName::Fit => fit(s),
        CommandName::Verify => unreachable!("verify is dispatched by the suite driver"),
    }
}

pub fn integrate(s: &Settings) -> Result<Vec<Report>> {
    let thetas = s.thetas_or(&[0.5]);
    let scales = s.scales_or(&[16.0]);
    let rows: Vec<Result<IntegrateRow>> = jobs(&thetas, &scales)
        .par_iter()
        .map(|&(job, th, _, sc)| {
            let sp = spec(s.scenario, th, sc)?;
            let ln = integrate_min_log(&sp)?.ln;
            let est = match s.oracle {
                OracleChoice::None => None,
                OracleChoice::Quad => Some(quad_auto(&MinIntegrand::from_spec(&sp), s.quad_tol, s.tail_ratio)?.1),
                OracleChoice::Mc => {
                    let seed = substream_seed(s.seed, stream::MONTE_CARLO) ^ job as u64;
                    Some(mc_estimate(&sp, seed, s.mc_samples)?)
                }
            };
            Ok(IntegrateRow {
                scenario: s.scenario.name().into(),
                theta: th,
                n: sc.n(),
                integral: ln.exp(),
                sqrt_integral: (0.5 * ln).exp(),
                oracle: format!("{:?}", s.oracle).to_lowercase(),
                oracle_value: est.as_ref().map(|e| e.value),
                oracle_lo: est.as_ref().map(|e| e.interval().0),
                oracle_hi: est.as_ref().map(|e| e.interval().1),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(vec![Report::new("integrate", &rows)?])
}

/// Region rows (and their cell descriptions) of one `(θ, n)`.
pub fn region_rows(kind: ScenarioKind, theta: f64, sc: Scale) -> Result<(Vec<RegionRow>, Vec<RegionBoundsRow>)> {
    let sp = spec(kind, theta, sc)?;
    let regions = derive_regions(&sp)?;
    let vals: Vec<Result<f64>> = regions
        .par_iter()
        .map(|r| Ok(integrate_region_log(&sp, r)?.ln))
        .collect();
    let mut rows = Vec::new();
    let mut bounds = Vec::new();
    for (r, v) in regions.iter().zip(vals) {
        let ln = v?;
        let ln_t = match kind {
            ScenarioKind::OhToLp => ln_table_target(r.id, theta, sc.ln_n),
            _ => None,
        };
        rows.push(RegionRow {
            scenario: kind.name().into(),
            theta,
            n: sc.n(),
            region_id: r.label(),
            integral: ln.exp(),
            sqrt_integral: (0.5 * ln).exp(),
            target: ln_t.map(f64::exp),
            ratio: ln_t.map(|t| (0.5 * ln - t).exp()),
        });
        for (c, cell) in r.cells.iter().enumerate() {
            bounds.push(RegionBoundsRow {
                scenario: kind.name().into(),
                theta,
                n: sc.n(),
                region_id: r.label(),
                active_term: r.active_term + 1,
                cell: c,
                bounds: cell.describe(&sp.variables).join("; "),
            });
        }
    }
    Ok((rows, bounds))
}

pub fn regions(s: &Settings) -> Result<Vec<Report>> {
    let thetas = s.thetas_or(&[0.5]);
    let scales = s.scales_or(&[16.0]);
    let mut rows = Vec::new();
    let mut bounds = Vec::new();
    for (_, th, _, sc) in jobs(&thetas, &scales) {
        let (r, b) = region_rows(s.scenario, th, sc)?;
        rows.extend(r);
        bounds.extend(b);
    }
    Ok(vec![Report::new("regions", &rows)?, Report::new("region_bounds", &bounds)?])
}

/// One decomposition solve on the configured (or default) box.
pub fn solver_row(s: &Settings, kind: ScenarioKind, theta: f64, sc: Scale, half_width: Option<f64>) -> Result<SolverRow> {
    let sp = spec(kind, theta, sc)?;
    let bx = match half_width {
        Some(h) => LogBox::symmetric(sp.dim(), h)?,
        None => default_box(&sp)?,
    };
    let grid = discretize(&sp, &bx, s.resolution)?;
    let r = solve_decomposition(&sp, &grid, 1.0, &s.solver)?;
    Ok(SolverRow {
        scenario: kind.name().into(),
        theta,
        n: sc.n(),
        objective: r.objective,
        lower_bound: r.lower_bound,
        upper_bound: r.upper_bound,
        iterations: r.iterations,
        converged: r.converged,
    })
}

pub fn solve(s: &Settings) -> Result<Vec<Report>> {
    let thetas = s.thetas_or(&[0.5]);
    let scales = s.scales_or(&[16.0]);
    let rows: Vec<Result<SolverRow>> = jobs(&thetas, &scales)
        .par_iter()
        .map(|&(_, th, i, sc)| solver_row(s, s.scenario, th, sc, s.half_width(i)))
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(vec![Report::new("solve", &rows)?])
}

/// Ψ configuration from the settings (box half-width defaults to the library default).
pub fn psi_config(s: &Settings) -> PsiConfig {
    PsiConfig {
        resolution: s.resolution,
        half_width: s.half_width(0).unwrap_or(PsiConfig::default().half_width),
        ladder: geometric_ladder(s.ladder.0, s.ladder.1),
        solver: s.solver,
    }
}

/// Integer scales for sequence-space checks.
pub fn integer_scales(scales: &[Scale]) -> Result<Vec<usize>> {
    scales
        .iter()
        .map(|sc| {
            let n = sc.n().round();
            if n > 1e15 {
                bail!("n = {n:e} is too large for a finite sequence");
            }
            Ok(n as usize)
        })
        .collect()
}

pub fn orlicz(s: &Settings) -> Result<Vec<Report>> {
    let thetas = s.thetas_or(&[0.5]);
    let ns = integer_scales(&s.scales_or(&(1..=8).map(|k| 2f64.powi(k)).collect::<Vec<_>>()))?;
    let mut psi_rows = Vec::new();
    let mut fits = Vec::new();
    for &th in &thetas {
        let samples = PsiCache::new(th, psi_config(s))?.samples()?;
        let f = convexify(&samples)?;
        let bad = sandwich_violations(&samples, &f);
        if !bad.is_empty() {
            bail!("Ψ sandwich fails at θ = {th} for x in {bad:?}");
        }
        for &(x, psi) in &samples {
            psi_rows.push(PsiRow {
                theta: th,
                x,
                psi,
                psi_tilde: f.eval(x),
            });
        }
        let fit = lp_inclusion_ratio(th, &f, &ns)?;
        fits.push(FitRow {
            scenario: "psi_inclusion".into(),
            theta_or_n: th,
            exponent: fit.exponent,
            stderr: fit.stderr,
            points: format_points(&fit.points),
        });
    }
    Ok(vec![Report::new("psi", &psi_rows)?, Report::new("psi_inclusion_fit", &fits)?])
}

/// A matrix tuple from JSON: a list of matrices, each a list of rows of
/// `[re, im]` pairs.
pub fn read_tuple(path: &std::path::Path) -> Result<MatrixTuple> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let raw: Vec<Vec<Vec<[f64; 2]>>> = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let mats = raw
        .iter()
        .map(|rows| {
            let m = rows.len();
            if rows.iter().any(|r| r.len() != m) {
                bail!("matrices must be square");
            }
            Ok(CMatrix::from_fn(m, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MatrixTuple::new(mats)?)
}

pub fn matnorm(s: &Settings) -> Result<Vec<Report>> {
    let tuples = match &s.input {
        Some(path) => vec![read_tuple(path)?],
        None => {
            let mut rng = substream_rng(s.seed, stream::MATRICES);
            (0..s.count).map(|_| random_tuple(s.m, s.k, &mut rng)).collect()
        }
    };
    let cfg = CpConfig {
        restarts: s.restarts,
        seed: substream_seed(s.seed, stream::CP_RESTARTS),
        ..CpConfig::default()
    };
    let mut rows = Vec::new();
    for (i, xs) in tuples.iter().enumerate() {
        let oh = oh_norm(xs);
        for &p in &s.p {
            let cp = cp_norm(xs, p, &cfg)?;
            rows.push(MatnormRow {
                instance: i,
                m: xs.m(),
                k: xs.len(),
                p,
                oh_norm: oh,
                cp_norm: cp.value,
                cp_converged: cp.converged,
            });
        }
    }
    Ok(vec![Report::new("matnorm", &rows)?])
}

pub fn fit(s: &Settings) -> Result<Vec<Report>> {
    let rows = match s.vary {
        Vary::N => {
            let scales = s.scales_or(&(4..=12).map(|k| 2f64.powi(k)).collect::<Vec<_>>());
            let ln_ns: Vec<f64> = scales.iter().map(|x| x.ln_n).collect();
            s.thetas_or(&[0.5])
                .iter()
                .map(|&th| {
                    let f = fit_n_exponent_ln(s.scenario, th, &ln_ns)?;
                    Ok(FitRow {
                        scenario: s.scenario.name().into(),
                        theta_or_n: th,
                        exponent: f.exponent,
                        stderr: f.stderr,
                        points: format_points(&f.points),
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        Vary::Theta => {
            let thetas = s.thetas_or(&[0.9, 0.92, 0.94, 0.96, 0.98]);
            s.scales_or(&[256.0])
                .iter()
                .map(|sc| {
                    let f = fit_theta_blowup(s.scenario, sc.ln_n, &thetas)?;
                    Ok(FitRow {
                        scenario: s.scenario.name().into(),
                        theta_or_n: sc.n(),
                        exponent: f.exponent,
                        stderr: f.stderr,
                        points: format_points(&f.points),
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(vec![Report::new("fit", &rows)?])
}
