//! Verification suites: one per acceptance criterion, each a list of
//! machine-checkable checks plus the reports it produced. Tolerances and
//! sweeps are pinned here.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use maurey_core::integrator::{
    fit_n_exponent_ln, fit_theta_blowup, integrate_min_box_log, integrate_region, log_factor_check,
};
use maurey_core::matnorm::{
    cp_norm, maurey_ratio, oh_norm, op_norm, random_tuple, random_unitary, CMatrix, CpConfig,
    DiagonalCoefficients, MatrixTuple,
};
use maurey_core::oracle::{quad_auto, MinIntegrand};
use maurey_core::orlicz::{
    convexify, lp_inclusion_ratio, p_of_theta, sandwich_violations, PiecewiseConvexFunction, PsiCache,
    PsiConfig,
};
use maurey_core::regions::derive_regions;
use maurey_core::scenario::{build_scenario_ln, ScenarioKind};
use maurey_core::sumsolve::{default_box, discretize, solve_decomposition};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::commands::{region_rows, stream, substream_rng, substream_seed};
use crate::config::{Scale, Settings};
use crate::report::*;

/// Suite names in criterion order.
pub const SUITES: [&str; 10] = [
    "region_closed_form",
    "table2",
    "scaling",
    "log_factor",
    "cp_scenario",
    "sandwich",
    "orlicz",
    "matnorm",
    "maurey",
    "determinism",
];

// Region closed form.
const C1_THETAS: [f64; 3] = [0.3, 0.5, 0.7];
const C1_NS: [f64; 2] = [16.0, 256.0];
const C1_CLOSED_TOL: f64 = 1e-10;
const C1_QUAD_TOL: f64 = 1e-6;
const C1_QUAD_RTOL: f64 = 1e-6;
const C1_TAIL_RATIO: f64 = 1e-8;
// Ratio stability.
const C2_THETAS: [f64; 3] = [0.2, 0.5, 0.8];
const C2_NS: [f64; 4] = [16.0, 64.0, 256.0, 1024.0];
const C2_SPREAD: f64 = 4.0;
// Main scaling.
const C3_THETAS: [f64; 3] = [0.3, 0.5, 0.7];
const C3_LOG2_NS: [f64; 9] = [16.0, 20.0, 24.0, 28.0, 32.0, 36.0, 40.0, 44.0, 48.0];
const C3_N_TOL: f64 = 0.02;
const C3_ZERO_LADDER: [f64; 5] = [0.02, 0.04, 0.06, 0.08, 0.1];
const C3_ZERO_LOG2_N: f64 = 8.0;
const C3_ONE_LADDER: [f64; 5] = [0.9, 0.92, 0.94, 0.96, 0.98];
const C3_ONE_LOG2_N: f64 = 1000.0;
const C3_BLOWUP_TOL: f64 = 0.1;
// Logarithmic factor.
const C4_LOG2_NS: [i32; 11] = [6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16];
const C4_R2: f64 = 0.99;
// Two-variable scenario.
const C5_THETA: f64 = 0.7;
const C5_N_TOL: f64 = 0.02;
const C5_HALF_LADDER: [f64; 5] = [0.51, 0.52, 0.53, 0.54, 0.55];
const C5_HALF_LOG2_N: f64 = 1000.0;
const C5_BLOWUP_TOL: f64 = 0.1;
// Solver sandwich.
const C6_RESOLUTION: usize = 8;
const C6_LOWER: f64 = 0.125;
const C6_GRID_SLACK: f64 = 0.5;
// Orlicz suite.
const C7_THETAS: [f64; 3] = [0.3, 0.5, 0.7];
const C7_SLOPE_THETA: f64 = 0.5;
const C7_LOG2_NS: std::ops::RangeInclusive<u32> = 1..=8;
const C7_SLOPE_TOL: f64 = 0.03;
// Matrix norms.
const C8_INSTANCES: usize = 50;
const C8_M: usize = 6;
const C8_PS: [f64; 3] = [1.25, 1.5, 1.75];
const C8_OP_TOL: f64 = 1e-6;
const C8_AXIOM_INSTANCES: usize = 200;
const C8_AXIOM_TOL: f64 = 1e-9;
const C8_UNITARY_TOL_OH: f64 = 1e-10;
// Maurey ratio.
const C9_THETAS: [f64; 3] = [0.3, 0.5, 0.7];
const C9_RANDOM: usize = 100;
const C9_RANDOM_N: usize = 8;
const C9_LOG2_NS: std::ops::RangeInclusive<u32> = 1..=8;
const C9_SPREAD: f64 = 50.0;
const C9_SLOPE_TOL: f64 = 0.05;
// Determinism.
pub const DETERMINISM_WORKERS: [usize; 2] = [1, 8];

/// Outcome of one suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub criterion: usize,
    pub checks: Vec<CheckRow>,
    pub reports: Vec<Report>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    /// `criterion k [name]: PASS|FAIL (passed/total checks); first failure`.
    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        let mut line = format!(
            "criterion {} [{}]: {} ({ok}/{} checks)",
            self.criterion,
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checks.len()
        );
        if let Some(c) = self.checks.iter().find(|c| !c.passed) {
            line += &format!(
                "; {}: measured {:.6e}, target {:.6e}, tolerance {:.3e}",
                c.check, c.measured, c.target, c.tolerance
            );
        }
        line
    }
}

struct Checks {
    suite: &'static str,
    rows: Vec<CheckRow>,
}

impl Checks {
    fn new(suite: &'static str) -> Self {
        Self { suite, rows: Vec::new() }
    }

    fn push(&mut self, check: String, measured: f64, target: f64, tolerance: f64, passed: bool) {
        self.rows.push(CheckRow {
            suite: self.suite.into(),
            check,
            measured,
            target,
            tolerance,
            passed,
        });
    }

    /// `|measured − target| ≤ tolerance`.
    fn within(&mut self, check: String, measured: f64, target: f64, tolerance: f64) {
        let ok = (measured - target).abs() <= tolerance;
        self.push(check, measured, target, tolerance, ok);
    }

    /// `measured ≤ bound`.
    fn at_most(&mut self, check: String, measured: f64, bound: f64) {
        self.push(check, measured, bound, 0.0, measured <= bound);
    }

    /// `measured ≥ bound`.
    fn at_least(&mut self, check: String, measured: f64, bound: f64) {
        self.push(check, measured, bound, 0.0, measured >= bound);
    }

    fn finish(self, criterion: usize, reports: Vec<Report>) -> SuiteResult {
        SuiteResult {
            name: self.suite.into(),
            criterion,
            checks: self.rows,
            reports,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn log2_scale(k: f64) -> Scale {
    Scale { ln_n: k * 2f64.ln() }
}

/// Shared state across suites of one run (Ψ samples per θ).
pub struct SuiteContext<'a> {
    pub settings: &'a Settings,
    psi: BTreeMap<u64, Vec<(f64, f64)>>,
}

impl<'a> SuiteContext<'a> {
    pub fn new(settings: &'a Settings) -> Self {
        Self {
            settings,
            psi: BTreeMap::new(),
        }
    }

    fn psi_samples(&mut self, theta: f64) -> Result<Vec<(f64, f64)>> {
        if let Some(s) = self.psi.get(&theta.to_bits()) {
            return Ok(s.clone());
        }
        let s = PsiCache::new(theta, PsiConfig::default())?.samples()?;
        self.psi.insert(theta.to_bits(), s.clone());
        Ok(s)
    }

    fn psi_tilde(&mut self, theta: f64) -> Result<PiecewiseConvexFunction> {
        Ok(convexify(&self.psi_samples(theta)?)?)
    }
}

/// Runs one suite (not `determinism`) by name.
pub fn run_suite(ctx: &mut SuiteContext, name: &str) -> Result<SuiteResult> {
    match name {
        "region_closed_form" => region_closed_form(ctx.settings),
        "table2" => table2(ctx.settings),
        "scaling" => scaling(),
        "log_factor" => log_factor(),
        "cp_scenario" => cp_scenario(),
        "sandwich" => sandwich(ctx.settings),
        "orlicz" => orlicz(ctx),
        "matnorm" => matnorm(ctx.settings),
        "maurey" => maurey(ctx),
        "determinism" => bail!("determinism runs the other suites; use run_with_determinism"),
        other => bail!("unknown suite `{other}` (known: {})", SUITES.join(", ")),
    }
}

/// Expands `all` and validates names, keeping criterion order.
pub fn expand(names: &[String]) -> Result<Vec<&'static str>> {
    let mut out = Vec::new();
    for n in names {
        if n == "all" {
            return Ok(SUITES.to_vec());
        }
        match SUITES.iter().find(|s| **s == n.as_str()) {
            Some(s) => out.push(*s),
            None => bail!("unknown suite `{n}` (known: {}, all)", SUITES.join(", ")),
        }
    }
    out.sort_by_key(|s| SUITES.iter().position(|x| x == s));
    out.dedup();
    if out.is_empty() {
        bail!("no suite selected");
    }
    Ok(out)
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?)
}

/// Runs the named suites (excluding `determinism`) on a pool of `workers`.
pub fn run_suites(names: &[&str], settings: &Settings, workers: usize) -> Result<Vec<SuiteResult>> {
    pool(workers)?.install(|| {
        let mut ctx = SuiteContext::new(settings);
        names
            .iter()
            .filter(|n| **n != "determinism")
            .map(|n| run_suite(&mut ctx, n))
            .collect()
    })
}

/// Every report of a suite list, serialised, in order.
fn fingerprint(results: &[SuiteResult]) -> Vec<(String, String, String)> {
    results
        .iter()
        .flat_map(|r| {
            let checks = Report::new(format!("verify_{}", r.name), &r.checks).expect("serialisable checks");
            std::iter::once(checks)
                .chain(r.reports.iter().cloned())
                .map(|rep| (rep.stem, rep.csv, rep.json))
        })
        .collect()
}

/// Runs the suites at each worker count of [`DETERMINISM_WORKERS`] and
/// compares every report byte for byte. Returns the first run's results
/// followed by the determinism result (when requested).
pub fn run_with_determinism(names: &[&str], settings: &Settings) -> Result<Vec<SuiteResult>> {
    let others: Vec<&str> = names.iter().copied().filter(|n| *n != "determinism").collect();
    if !names.contains(&"determinism") {
        return run_suites(&others, settings, settings.workers);
    }
    // The determinism check replays every suite; with none selected it
    // replays them all.
    let replay: Vec<&str> = if others.is_empty() {
        SUITES[..9].to_vec()
    } else {
        others.clone()
    };
    let first = run_suites(&replay, settings, DETERMINISM_WORKERS[0])?;
    let second = run_suites(&replay, settings, DETERMINISM_WORKERS[1])?;
    let (a, b) = (fingerprint(&first), fingerprint(&second));
    let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    let mut c = Checks::new("determinism");
    c.push(
        format!(
            "reports differing between {} and {} workers ({} reports)",
            DETERMINISM_WORKERS[0],
            DETERMINISM_WORKERS[1],
            a.len()
        ),
        differing as f64,
        0.0,
        0.0,
        differing == 0 && !a.is_empty(),
    );
    let mut out = if others.is_empty() { Vec::new() } else { first };
    out.push(c.finish(10, Vec::new()));
    Ok(out)
}

fn region_closed_form(s: &Settings) -> Result<SuiteResult> {
    let mut c = Checks::new("region_closed_form");
    let thetas = s.thetas_or(&C1_THETAS);
    let scales = s.scales_or(&C1_NS);
    let mut rows = Vec::new();
    for &th in &thetas {
        for &sc in &scales {
            let spec = build_scenario_ln(ScenarioKind::OhToLp, th, sc.ln_n)?;
            let regions = derive_regions(&spec)?;
            let a11 = regions.iter().find(|r| r.id == (1, 1)).expect("A1_1 exists");
            let closed = integrate_region(&spec, a11)?;
            let formula = ((3.0 - th) / 2.0 * sc.ln_n).exp() / (4.0 * th * th * (1.0 - th));
            let f = MinIntegrand::from_spec(&spec).restricted_to_region(a11, spec.ln_n);
            let (_, q) = quad_auto(&f, C1_QUAD_RTOL, C1_TAIL_RATIO)?;
            let tag = format!("θ={th} n={}", sc.n());
            c.at_most(format!("closed form vs formula, {tag}"), rel(closed, formula), C1_CLOSED_TOL);
            c.at_most(format!("quadrature vs closed form, {tag}"), rel(q.value, closed), C1_QUAD_TOL);
            rows.push(IntegrateRow {
                scenario: "oh_to_lp:A1_1".into(),
                theta: th,
                n: sc.n(),
                integral: closed,
                sqrt_integral: closed.sqrt(),
                oracle: "quad".into(),
                oracle_value: Some(q.value),
                oracle_lo: Some(q.interval().0),
                oracle_hi: Some(q.interval().1),
            });
        }
    }
    Ok(c.finish(1, vec![Report::new("region_closed_form", &rows)?]))
}

fn table2(s: &Settings) -> Result<SuiteResult> {
    let mut c = Checks::new("table2");
    let thetas = s.thetas_or(&C2_THETAS);
    let scales = s.scales_or(&C2_NS);
    let mut rows = Vec::new();
    for &th in &thetas {
        for &sc in &scales {
            let (r, _) = region_rows(ScenarioKind::OhToLp, th, sc)?;
            rows.extend(r.into_iter().filter(|x| x.ratio.is_some()));
        }
    }
    let mut by_region: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &rows {
        by_region.entry(r.region_id.clone()).or_default().push(r.ratio.unwrap());
    }
    c.within("tabulated regions".into(), by_region.len() as f64, 12.0, 0.0);
    for (id, ratios) in &by_region {
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        c.at_most(format!("{id} ratio max/min"), max / min, C2_SPREAD);
    }
    Ok(c.finish(2, vec![Report::new("table2_regions", &rows)?]))
}

fn fit_row(scenario: &str, fixed: f64, f: &maurey_core::fit::ScalingFit) -> FitRow {
    FitRow {
        scenario: scenario.into(),
        theta_or_n: fixed,
        exponent: f.exponent,
        stderr: f.stderr,
        points: format_points(&f.points),
    }
}

fn scaling() -> Result<SuiteResult> {
    let mut c = Checks::new("scaling");
    let mut fits = Vec::new();
    let ln_ns: Vec<f64> = C3_LOG2_NS.iter().map(|k| k * 2f64.ln()).collect();
    for th in C3_THETAS {
        let f = fit_n_exponent_ln(ScenarioKind::OhToLp, th, &ln_ns)?;
        c.within(format!("n-exponent at θ={th}"), f.exponent, 1.0 - th / 2.0, C3_N_TOL);
        fits.push(fit_row("oh_to_lp", th, &f));
    }
    let zero = fit_theta_blowup(ScenarioKind::OhToLp, log2_scale(C3_ZERO_LOG2_N).ln_n, &C3_ZERO_LADDER)?;
    c.within("θ-exponent as θ→0".into(), zero.exponent, -1.0, C3_BLOWUP_TOL);
    fits.push(fit_row("oh_to_lp:theta_to_0", log2_scale(C3_ZERO_LOG2_N).n(), &zero));
    let one = fit_theta_blowup(ScenarioKind::OhToLp, log2_scale(C3_ONE_LOG2_N).ln_n, &C3_ONE_LADDER)?;
    c.within("(1−θ)-exponent as θ→1".into(), one.exponent, -1.5, C3_BLOWUP_TOL);
    fits.push(fit_row("oh_to_lp:theta_to_1", log2_scale(C3_ONE_LOG2_N).n(), &one));
    Ok(c.finish(3, vec![Report::new("scaling_fits", &fits)?]))
}

fn log_factor() -> Result<SuiteResult> {
    let mut c = Checks::new("log_factor");
    let ns: Vec<f64> = C4_LOG2_NS.iter().map(|&k| 2f64.powi(k)).collect();
    let f = log_factor_check(&ns)?;
    c.at_least("slope of block/n against ln n".into(), f.exponent, 0.0);
    c.at_least("R² of the affine fit".into(), f.r_squared, C4_R2);
    Ok(c.finish(4, vec![Report::new("log_factor_fit", &[fit_row("oh_to_lp:a2_block", 1.0, &f)])?]))
}

fn cp_scenario() -> Result<SuiteResult> {
    let mut c = Checks::new("cp_scenario");
    let ln_ns: Vec<f64> = C3_LOG2_NS.iter().map(|k| k * 2f64.ln()).collect();
    let f = fit_n_exponent_ln(ScenarioKind::OhToCp, C5_THETA, &ln_ns)?;
    let p = 1.0 / C5_THETA;
    c.within(format!("n-exponent at θ={C5_THETA}"), f.exponent, (p + 2.0) / (4.0 * p), C5_N_TOL);
    let ln_half = log2_scale(C5_HALF_LOG2_N);
    let h = fit_theta_blowup(ScenarioKind::OhToCp, ln_half.ln_n, &C5_HALF_LADDER)?;
    c.within("(2θ−1)-exponent as θ→1/2".into(), h.exponent, -0.5, C5_BLOWUP_TOL);
    let fits = vec![fit_row("oh_to_cp", C5_THETA, &f), fit_row("oh_to_cp:theta_to_half", ln_half.n(), &h)];
    Ok(c.finish(5, vec![Report::new("cp_fits", &fits)?]))
}

fn sandwich(s: &Settings) -> Result<SuiteResult> {
    let mut c = Checks::new("sandwich");
    let thetas = s.thetas_or(&C2_THETAS);
    let scales = s.scales_or(&C2_NS);
    let upper_ratio = 8f64.sqrt() * (1.0 + C6_GRID_SLACK);
    let jobs: Vec<(f64, Scale)> = thetas.iter().flat_map(|&t| scales.iter().map(move |&n| (t, n))).collect();
    let solved: Vec<Result<(SolverRow, f64)>> = jobs
        .par_iter()
        .map(|&(th, sc)| {
            let spec = build_scenario_ln(ScenarioKind::OhToLp, th, sc.ln_n)?;
            let bx = default_box(&spec)?;
            let grid = discretize(&spec, &bx, C6_RESOLUTION)?;
            let r = solve_decomposition(&spec, &grid, 1.0, &s.solver)?;
            let root = (0.5 * integrate_min_box_log(&spec, &bx.lo, &bx.hi)?.ln).exp();
            let row = SolverRow {
                scenario: "oh_to_lp".into(),
                theta: th,
                n: sc.n(),
                objective: r.objective,
                lower_bound: r.lower_bound,
                upper_bound: r.upper_bound,
                iterations: r.iterations,
                converged: r.converged,
            };
            Ok((row, r.objective / root))
        })
        .collect();
    let mut rows = Vec::new();
    for res in solved {
        let (row, ratio) = res?;
        let tag = format!("θ={} n={}", row.theta, row.n);
        c.at_most(format!("lower bound / objective, {tag}"), row.lower_bound / row.objective, 1.0);
        c.at_most(format!("objective / upper bound, {tag}"), row.objective / row.upper_bound, 1.0);
        c.at_least(format!("objective / √box integral ≥ 1/8, {tag}"), ratio, C6_LOWER);
        c.at_most(format!("objective / √box integral ≤ √8·1.5, {tag}"), ratio, upper_ratio);
        rows.push(row);
    }
    Ok(c.finish(6, vec![Report::new("sandwich_solves", &rows)?]))
}

fn c7_ns() -> Vec<usize> {
    C7_LOG2_NS.map(|k| 1usize << k).collect()
}

fn orlicz(ctx: &mut SuiteContext) -> Result<SuiteResult> {
    let mut c = Checks::new("orlicz");
    let mut psi_rows = Vec::new();
    let mut fits = Vec::new();
    for th in C7_THETAS {
        let samples = ctx.psi_samples(th)?;
        let f = convexify(&samples)?;
        let bad = sandwich_violations(&samples, &f);
        c.within(format!("sandwich violations at θ={th}"), bad.len() as f64, 0.0, 0.0);
        for &(x, psi) in &samples {
            psi_rows.push(PsiRow {
                theta: th,
                x,
                psi,
                psi_tilde: f.eval(x),
            });
        }
        let fit = lp_inclusion_ratio(th, &f, &c7_ns())?;
        if th == C7_SLOPE_THETA {
            c.within(format!("ℓ_p-inclusion slope at θ={th}"), fit.exponent, 0.0, C7_SLOPE_TOL);
        }
        fits.push(fit_row("psi_inclusion", th, &fit));
    }
    Ok(c.finish(7, vec![Report::new("psi", &psi_rows)?, Report::new("psi_inclusion_fit", &fits)?]))
}

fn matnorm(s: &Settings) -> Result<SuiteResult> {
    let mut c = Checks::new("matnorm");
    let cfg = CpConfig {
        seed: substream_seed(s.seed, stream::CP_RESTARTS),
        ..CpConfig::default()
    };
    let mut rng = substream_rng(s.seed, stream::MATRICES);
    let singles: Vec<MatrixTuple> = (0..C8_INSTANCES).map(|_| random_tuple(C8_M, 1, &mut rng)).collect();
    let mut rows = Vec::new();
    for p in C8_PS {
        let errs: Vec<Result<(f64, f64, bool)>> = singles
            .par_iter()
            .map(|xs| {
                let cp = cp_norm(xs, p, &cfg)?;
                Ok((cp.value, op_norm(&xs.mats()[0]), cp.converged))
            })
            .collect();
        let mut worst = 0.0f64;
        for (i, e) in errs.into_iter().enumerate() {
            let (cp, op, conv) = e?;
            worst = worst.max(rel(cp, op));
            rows.push(MatnormRow {
                instance: i,
                m: C8_M,
                k: 1,
                p,
                oh_norm: oh_norm(&singles[i]),
                cp_norm: cp,
                cp_converged: conv,
            });
        }
        c.at_most(format!("max |cp − op|/op over single matrices, p={p}"), worst, C8_OP_TOL);
    }
    let mut unit_err = 0.0f64;
    for m in 1..=C8_M {
        let units = (0..m)
            .map(|k| {
                let mut e = CMatrix::zeros(m, m);
                e[(k, k)] = Complex64::new(1.0, 0.0);
                e
            })
            .collect();
        unit_err = unit_err.max((oh_norm(&MatrixTuple::new(units)?) - 1.0).abs());
    }
    c.within("diagonal matrix units: |oh − 1|".into(), unit_err, 0.0, 0.0);

    // Axioms: zero, homogeneity, triangle inequality, unitary invariance.
    struct Instance {
        x: MatrixTuple,
        y: MatrixTuple,
        scalar: Complex64,
        u: CMatrix,
        v: CMatrix,
        p: f64,
    }
    let instances: Vec<Instance> = (0..C8_AXIOM_INSTANCES)
        .map(|i| {
            let m = 2 + i % 5;
            let k = 1 + i % 3;
            Instance {
                x: random_tuple(m, k, &mut rng),
                y: random_tuple(m, k, &mut rng),
                scalar: Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
                u: random_unitary(m, &mut rng),
                v: random_unitary(m, &mut rng),
                p: rng.gen_range(1.1..1.9),
            }
        })
        .collect();
    let worst: Vec<Result<[f64; 8]>> = instances
        .par_iter()
        .map(|t| {
            let cp = |z: &MatrixTuple| cp_norm(z, t.p, &cfg).map(|r| r.value);
            let zero = t.x.scale(Complex64::new(0.0, 0.0));
            let sum = t.x.add(&t.y)?;
            let (ox, oy, cx, cy) = (oh_norm(&t.x), oh_norm(&t.y), cp(&t.x)?, cp(&t.y)?);
            let a = t.scalar.norm();
            Ok([
                oh_norm(&zero) + cp(&zero)?,
                rel(oh_norm(&t.x.scale(t.scalar)), a * ox),
                rel(cp(&t.x.scale(t.scalar))?, a * cx),
                (oh_norm(&sum) / (ox + oy) - 1.0).max(0.0),
                (cp(&sum)? / (cx + cy) - 1.0).max(0.0),
                rel(oh_norm(&t.x.transform(&t.u, &t.v)), ox),
                rel(cp(&t.x.transform(&t.u, &t.v))?, cx),
                if ox > 0.0 && cx > 0.0 { 0.0 } else { 1.0 },
            ])
        })
        .collect();
    let mut maxes = [0.0f64; 8];
    for w in worst {
        for (m, v) in maxes.iter_mut().zip(w?) {
            *m = m.max(v);
        }
    }
    let n = C8_AXIOM_INSTANCES;
    c.within(format!("norm of zero tuple, {n} instances"), maxes[0], 0.0, 0.0);
    c.within(format!("nonzero tuples have positive norm, {n} instances"), maxes[7], 0.0, 0.0);
    c.at_most(format!("oh homogeneity, {n} instances"), maxes[1], C8_AXIOM_TOL);
    c.at_most(format!("cp homogeneity, {n} instances"), maxes[2], C8_AXIOM_TOL);
    c.at_most(format!("oh triangle excess, {n} instances"), maxes[3], C8_AXIOM_TOL);
    c.at_most(format!("cp triangle excess, {n} instances"), maxes[4], C8_AXIOM_TOL);
    c.at_most(format!("oh unitary invariance, {n} instances"), maxes[5], C8_UNITARY_TOL_OH);
    c.at_most(format!("cp unitary invariance, {n} instances"), maxes[6], C8_AXIOM_TOL);
    Ok(c.finish(8, vec![Report::new("matnorm_single", &rows)?]))
}

fn maurey(ctx: &mut SuiteContext) -> Result<SuiteResult> {
    let mut c = Checks::new("maurey");
    let mut rows = Vec::new();
    let mut rng = substream_rng(ctx.settings.seed, stream::COEFFICIENTS);
    for th in C9_THETAS {
        let f = ctx.psi_tilde(th)?;
        let p = p_of_theta(th);
        let mut ratios = Vec::new();
        for i in 0..C9_RANDOM {
            let a = random_tuple(C9_RANDOM_N, 1, &mut rng).mats()[0].clone();
            let r = maurey_ratio(th, &DiagonalCoefficients::new(a, p)?, &f)?;
            ratios.push(r);
            rows.push(RatioRow {
                theta: th,
                kind: "random".into(),
                n: C9_RANDOM_N,
                instance: i,
                ratio: r,
            });
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in C9_LOG2_NS {
            let n = 1usize << k;
            let r = maurey_ratio(th, &DiagonalCoefficients::identity(n, th)?, &f)?;
            ratios.push(r);
            xs.push((n as f64).ln());
            ys.push(r.ln());
            rows.push(RatioRow {
                theta: th,
                kind: "identity".into(),
                n,
                instance: 0,
                ratio: r,
            });
        }
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        c.at_most(format!("ratio max/min at θ={th}"), max / min, C9_SPREAD);
        let fit = maurey_core::fit::ScalingFit::from_points(xs, ys)?;
        c.within(format!("identity ratio slope in n at θ={th}"), fit.exponent, 0.0, C9_SLOPE_TOL);
    }
    Ok(c.finish(9, vec![Report::new("maurey_ratios", &rows)?]))
}
