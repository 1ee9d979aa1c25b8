//! The Orlicz function Ψ of the sum-space decomposition problem, its convex
//! minorant Ψ̃, Orlicz sequence norms, and the ℓ_p-inclusion check.
//!
//! `Ψ(x) = inf { x²‖f₁‖² + x²‖f₂‖² + x·Σ_{l≥3} ‖f_l‖_π : Σ_l f_l = 1 }`
//! over the `n = 1` measures of the OH→ℓ_p scenario, solved on a grid.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::ScalingFit;
use crate::oracle::LogBox;
use crate::scenario::{build_scenario_ln, ScenarioKind, ScenarioSpec, TermKind};
use crate::sumsolve::{discretize, solve_costs, solve_decomposition, Grid, SolverConfig, TermCost};

/// Relative slack allowed when checking monotonicity of sampled Ψ values.
const MONOTONE_TOL: f64 = 1e-9;
const BISECTION_TOL: f64 = 1e-10;

/// Grid and solver settings for evaluating Ψ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiConfig {
    /// Cells per variable.
    pub resolution: usize,
    /// Half-width of the symmetric log box.
    pub half_width: f64,
    /// Sample abscissae (positive; 0 is added automatically).
    pub ladder: Vec<f64>,
    pub solver: SolverConfig,
}

impl Default for PsiConfig {
    fn default() -> Self {
        Self {
            resolution: 8,
            half_width: 6.0,
            ladder: geometric_ladder(-12, 12),
            solver: SolverConfig::default(),
        }
    }
}

/// `{2^k : lo ≤ k ≤ hi}`.
pub fn geometric_ladder(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(k)).collect()
}

/// `p = 2/(2 − θ)`, so that `1/p = 1 − θ/2`.
pub fn p_of_theta(theta: f64) -> f64 {
    2.0 / (2.0 - theta)
}

/// The grid on which Ψ is evaluated (the scenario at `n = 1`).
pub fn psi_grid(theta: f64, config: &PsiConfig) -> Result<(ScenarioSpec, Grid)> {
    let spec = build_scenario_ln(ScenarioKind::OhToLp, theta, 0.0)?;
    let b = LogBox::symmetric(spec.dim(), config.half_width)?;
    let grid = discretize(&spec, &b, config.resolution)?;
    Ok((spec, grid))
}

/// Objective weights of Ψ at `x`: squared L2 terms, linear projective terms.
fn psi_costs(spec: &ScenarioSpec, x: f64) -> Vec<TermCost> {
    spec.terms
        .iter()
        .map(|t| match t.kind {
            TermKind::L2 => TermCost::squared(x * x),
            TermKind::Proj => TermCost::linear(x),
        })
        .collect()
}

/// `Ψ(x)` on a prepared grid.
pub fn psi_eval(spec: &ScenarioSpec, grid: &Grid, x: f64, solver: &SolverConfig) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Parameter {
            name: "x",
            value: x,
            valid: "[0, ∞)".into(),
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(solve_costs(grid, &psi_costs(spec, x), 1.0, solver, None)?.objective)
}

/// Memoised Ψ evaluations on one grid, keyed by the bits of `x`.
#[derive(Debug)]
pub struct PsiCache {
    pub theta: f64,
    pub config: PsiConfig,
    spec: ScenarioSpec,
    grid: Grid,
    values: HashMap<u64, f64>,
}

impl PsiCache {
    pub fn new(theta: f64, config: PsiConfig) -> Result<Self> {
        let (spec, grid) = psi_grid(theta, &config)?;
        Ok(Self {
            theta,
            config,
            spec,
            grid,
            values: HashMap::new(),
        })
    }

    pub fn eval(&mut self, x: f64) -> Result<f64> {
        if let Some(&v) = self.values.get(&x.to_bits()) {
            return Ok(v);
        }
        let v = psi_eval(&self.spec, &self.grid, x, &self.config.solver)?;
        self.values.insert(x.to_bits(), v);
        Ok(v)
    }

    /// `(x, Ψ(x))` at 0 and every ladder point; uncached points are solved in
    /// parallel.
    pub fn samples(&mut self) -> Result<Vec<(f64, f64)>> {
        let missing: Vec<f64> = self
            .config
            .ladder
            .iter()
            .copied()
            .filter(|x| !self.values.contains_key(&x.to_bits()))
            .collect();
        let solved: Vec<Result<f64>> = missing
            .par_iter()
            .map(|&x| psi_eval(&self.spec, &self.grid, x, &self.config.solver))
            .collect();
        for (x, v) in missing.iter().zip(solved) {
            self.values.insert(x.to_bits(), v?);
        }
        let mut out = vec![(0.0, 0.0)];
        for &x in &self.config.ladder {
            out.push((x, self.values[&x.to_bits()]));
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Ok(out)
    }
}

/// A convex, nondecreasing piecewise-linear function with value 0 at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseConvexFunction {
    /// Breakpoints, strictly increasing, starting at 0.
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
}

/// Lower convex envelope of sampled `(x, Ψ(x))` pairs; input must contain
/// `x = 0`, at least 8 points, and be nondecreasing.
pub fn convexify(samples: &[(f64, f64)]) -> Result<PiecewiseConvexFunction> {
    let mut pts = samples.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if pts.len() < 8 {
        return Err(Error::Data(format!("need at least 8 samples, got {}", pts.len())));
    }
    if pts[0] != (0.0, 0.0) {
        return Err(Error::Data("samples must include Ψ(0) = 0".into()));
    }
    for w in pts.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::Data(format!("repeated abscissa {}", w[1].0)));
        }
        if w[1].1 < w[0].1 - MONOTONE_TOL * w[0].1.abs() {
            return Err(Error::Data(format!(
                "samples decrease between x = {} and x = {}",
                w[0].0, w[1].0
            )));
        }
    }
    // Monotone-chain lower hull.
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    Ok(PiecewiseConvexFunction {
        xs: hull.iter().map(|p| p.0).collect(),
        values: hull.iter().map(|p| p.1).collect(),
    })
}

impl PiecewiseConvexFunction {
    fn slope(&self, k: usize) -> f64 {
        (self.values[k + 1] - self.values[k]) / (self.xs[k + 1] - self.xs[k])
    }

    /// Linear interpolation; beyond the last breakpoint, the last chord.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= 0.0 {
            return 0.0;
        }
        if n == 1 {
            return self.values[0];
        }
        let k = match self.xs.iter().position(|&b| b >= x) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => n - 2,
        };
        self.values[k] + self.slope(k) * (x - self.xs[k])
    }

    /// Smallest `x` with `F(x) = y` for `y > 0`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let n = self.xs.len();
        let k = match self.values.iter().position(|&v| v >= y) {
            Some(0) => 0,
            Some(i) => i - 1,
            None => n - 2,
        };
        let s = self.slope(k);
        self.xs[k] + (y - self.values[k]) / s
    }

    /// Chord slopes are nondecreasing and nonnegative, and F(0) = 0.
    pub fn is_valid(&self) -> bool {
        let slopes: Vec<f64> = (0..self.xs.len() - 1).map(|k| self.slope(k)).collect();
        self.xs[0] == 0.0
            && self.values[0] == 0.0
            && slopes.iter().all(|&s| s >= 0.0)
            && slopes.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12))
    }

    /// Two-column `x,value` table.
    pub fn to_table(&self) -> Vec<(f64, f64)> {
        self.xs.iter().copied().zip(self.values.iter().copied()).collect()
    }

    pub fn from_table(rows: &[(f64, f64)]) -> Result<Self> {
        let f = Self {
            xs: rows.iter().map(|r| r.0).collect(),
            values: rows.iter().map(|r| r.1).collect(),
        };
        if f.xs.len() < 2 || !f.is_valid() {
            return Err(Error::Data("table is not a convex nondecreasing function through 0".into()));
        }
        Ok(f)
    }
}

/// Checks `Ψ(x/2) ≤ Ψ̃(x) ≤ Ψ(x)` at every sample whose half is also sampled
/// (the upper inequality at every sample); returns the violating abscissae.
pub fn sandwich_violations(samples: &[(f64, f64)], f: &PiecewiseConvexFunction) -> Vec<f64> {
    let lookup = |x: f64| samples.iter().find(|s| (s.0 - x).abs() <= 1e-12 * x.max(1e-300)).map(|s| s.1);
    let mut bad = Vec::new();
    for &(x, psi) in samples {
        let env = f.eval(x);
        let upper_ok = env <= psi * (1.0 + 1e-12) + 1e-300;
        let lower_ok = match lookup(0.5 * x) {
            Some(half) => half <= env * (1.0 + 1e-12) + 1e-300,
            None => true,
        };
        if !(upper_ok && lower_ok) {
            bad.push(x);
        }
    }
    bad
}

/// `inf{ρ > 0 : Σ_i F(|a_i|/ρ) ≤ 1}` by bisection in `ln ρ`.
pub fn orlicz_norm(f: &PiecewiseConvexFunction, a: &[f64]) -> f64 {
    let amax = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if amax == 0.0 {
        return 0.0;
    }
    let sum = |rho: f64| a.iter().map(|x| f.eval(x.abs() / rho)).sum::<f64>();
    // Σ F(|a_i|/ρ) is nonincreasing in ρ; bracket the crossing of 1.
    let mut lo = amax / f.inverse(1.0);
    let mut hi = lo;
    while sum(lo) < 1.0 {
        lo *= 0.5;
    }
    while sum(hi) > 1.0 {
        hi *= 2.0;
    }
    while hi - lo > BISECTION_TOL * hi {
        let mid = (lo * hi).sqrt();
        if sum(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `‖Σ_{i≤n} e_i‖_F`, which solves `n·F(1/ρ) = 1`.
pub fn unit_vector_norm(f: &PiecewiseConvexFunction, n: usize) -> f64 {
    1.0 / f.inverse(1.0 / n as f64)
}

/// Reduced form of the identity's Orlicz norm: the decomposition
/// value of the constant 1 with factor `n^{1/2}` on the L2 terms and `n` on
/// the projective terms (the OH→ℓ_p scenario at scale `n`) on a grid.
pub fn identity_orlicz_norm(theta: f64, n: u64, resolution: usize, half_width: f64, solver: &SolverConfig) -> Result<f64> {
    let spec = crate::scenario::build_scenario(ScenarioKind::OhToLp, theta, n)?;
    let b = LogBox::symmetric(spec.dim(), half_width)?;
    let grid = discretize(&spec, &b, resolution)?;
    Ok(solve_decomposition(&spec, &grid, 1.0, solver)?.objective)
}

/// Fit of `ln(‖Σ_{i≤n} e_i‖_F / n^{1/p})` against `ln n`; the inclusion
/// `ℓ_p ⊆ ℓ_F` shows as a slope near 0.
pub fn lp_inclusion_ratio(theta: f64, f: &PiecewiseConvexFunction, ns: &[usize]) -> Result<ScalingFit> {
    let inv_p = 1.0 / p_of_theta(theta);
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = ns
        .iter()
        .map(|&n| (unit_vector_norm(f, n) / (n as f64).powf(inv_p)).ln())
        .collect();
    ScalingFit::from_points(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PiecewiseConvexFunction {
        let s: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, (k * k) as f64)).collect();
        convexify(&s).unwrap()
    }

    #[test]
    fn convex_input_is_unchanged() {
        let f = square();
        assert_eq!(f.xs.len(), 10);
        assert!(f.is_valid());
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(3.0), 9.0);
    }

    #[test]
    fn non_convex_points_are_dropped() {
        let mut s: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, (k * k) as f64)).collect();
        s[5].1 = 30.0;
        let f = convexify(&s).unwrap();
        assert!(!f.xs.contains(&5.0));
        assert!(f.eval(5.0) <= 30.0);
    }

    #[test]
    fn decreasing_samples_are_rejected() {
        let mut s: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, k as f64)).collect();
        s[4].1 = 2.0;
        assert!(matches!(convexify(&s), Err(Error::Data(_))));
    }

    #[test]
    fn single_coordinate_norm_is_scaled_inverse() {
        let f = square();
        let c = 3.7;
        let got = orlicz_norm(&f, &[c, 0.0, 0.0]);
        assert!((got - c / f.inverse(1.0)).abs() < 1e-9 * got);
    }

    #[test]
    fn unit_vector_norm_matches_bisection() {
        let f = square();
        for n in [1usize, 3, 17] {
            let ones = vec![1.0; n];
            let a = orlicz_norm(&f, &ones);
            let b = unit_vector_norm(&f, n);
            assert!((a - b).abs() < 1e-9 * b);
            assert!((n as f64 * f.eval(1.0 / a) - 1.0).abs() < 1e-8);
        }
    }
}
