//! Douglas–Rachford splitting for `inf Σ_l cost_l(f_l)` subject to
//! `Σ_l f_l = target` cellwise.
//!
//! The iteration works in mass-scaled coordinates `g_l = f_l·√mass_l`, where
//! every L2 norm is Euclidean and every projective norm is the nuclear norm
//! of the reshaped kernel, and the sum constraint is a separate hyperplane in
//! each cell with normal `(1/√mass_l)_l`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::grid::{Grid, TermMasses};
use super::norms::{block_shrink, nuclear, singular_value_shrink};
use crate::error::{Error, Result};

/// How a term's norm enters the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostPower {
    /// `coef · ‖f‖`
    Linear,
    /// `coef · ‖f‖²`
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermCost {
    pub coef: f64,
    pub power: CostPower,
}

impl TermCost {
    pub fn linear(coef: f64) -> Self {
        Self {
            coef,
            power: CostPower::Linear,
        }
    }

    pub fn squared(coef: f64) -> Self {
        Self {
            coef,
            power: CostPower::Squared,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Relative objective change below which the iteration stops.
    pub tol: f64,
    /// Splitting step relative to the initial iterate's scale.
    pub step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol: 1e-7,
            step: 0.5,
        }
    }
}

/// Per-term field values on every cell (natural, unscaled units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteField {
    pub values: Vec<Vec<f64>>,
}

/// Result of one splitting run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    /// Objective of the best feasible iterate, in natural units.
    pub objective: f64,
    pub fields: DiscreteField,
    pub iterations: usize,
    pub converged: bool,
    /// Best feasible objective after each iteration (nonincreasing).
    pub history: Vec<f64>,
}

struct Problem<'a> {
    grid: &'a Grid,
    /// Effective coefficients in scaled units.
    eff: Vec<f64>,
    power: Vec<CostPower>,
    /// Constraint normals `1/√mass` per term per cell.
    normal: Vec<Vec<f64>>,
    target: f64,
}

impl Problem<'_> {
    fn objective(&self, g: &[Vec<f64>]) -> f64 {
        (0..self.grid.n_terms())
            .map(|l| {
                let norm = match &self.grid.terms[l] {
                    TermMasses::L2 { .. } => g[l].iter().map(|x| x * x).sum::<f64>().sqrt(),
                    TermMasses::Proj { .. } => nuclear(&self.as_matrix(l, &g[l])),
                };
                match self.power[l] {
                    CostPower::Linear => self.eff[l] * norm,
                    CostPower::Squared => self.eff[l] * norm * norm,
                }
            })
            .sum()
    }

    fn as_matrix(&self, l: usize, g: &[f64]) -> DMatrix<f64> {
        match &self.grid.terms[l] {
            TermMasses::Proj {
                row_mass,
                col_mass,
                index,
                ..
            } => {
                let mut m = DMatrix::zeros(row_mass.len(), col_mass.len());
                for (c, &(i, j)) in index.iter().enumerate() {
                    m[(i, j)] = g[c];
                }
                m
            }
            TermMasses::L2 { .. } => unreachable!("only projective terms are reshaped"),
        }
    }

    fn prox(&self, z: &[Vec<f64>], gamma: f64) -> Result<Vec<Vec<f64>>> {
        let mut out = z.to_vec();
        for (l, g) in out.iter_mut().enumerate() {
            let tau = gamma * self.eff[l];
            match (&self.grid.terms[l], self.power[l]) {
                (TermMasses::L2 { .. }, CostPower::Linear) => block_shrink(g, tau),
                (TermMasses::L2 { .. }, CostPower::Squared) => {
                    let k = 1.0 / (1.0 + 2.0 * tau);
                    g.iter_mut().for_each(|x| *x *= k);
                }
                (TermMasses::Proj { index, .. }, CostPower::Linear) => {
                    let m = singular_value_shrink(&self.as_matrix(l, g), tau);
                    for (c, &(i, j)) in index.iter().enumerate() {
                        g[c] = m[(i, j)];
                    }
                }
                (TermMasses::Proj { .. }, CostPower::Squared) => {
                    return Err(Error::Data(
                        "squared projective costs are not supported".into(),
                    ))
                }
            }
        }
        Ok(out)
    }

    /// Exact projection onto `Σ_l normal_l g_l = target` in every cell.
    fn project(&self, w: &mut [Vec<f64>]) {
        let big_l = w.len();
        for c in 0..self.grid.n_cells() {
            let mut dot = 0.0;
            let mut nn = 0.0;
            for l in 0..big_l {
                let a = self.normal[l][c];
                dot += a * w[l][c];
                nn += a * a;
            }
            let k = (self.target - dot) / nn;
            for l in 0..big_l {
                w[l][c] += k * self.normal[l][c];
            }
        }
    }

    fn scaled_from_assignment(&self, assign: &[usize]) -> Vec<Vec<f64>> {
        let mut g = vec![vec![0.0; self.grid.n_cells()]; self.grid.n_terms()];
        for (c, &l) in assign.iter().enumerate() {
            g[l][c] = self.target / self.normal[l][c];
        }
        g
    }

    fn unscale(&self, g: &[Vec<f64>]) -> DiscreteField {
        DiscreteField {
            values: g
                .iter()
                .zip(&self.normal)
                .map(|(gl, nl)| gl.iter().zip(nl).map(|(x, a)| x * a).collect())
                .collect(),
        }
    }
}

fn problem<'a>(grid: &'a Grid, costs: &[TermCost], target: f64) -> Result<Problem<'a>> {
    if costs.len() != grid.n_terms() {
        return Err(Error::Dimension(format!(
            "{} costs for {} terms",
            costs.len(),
            grid.n_terms()
        )));
    }
    let eff = costs
        .iter()
        .map(|c| {
            let q = match c.power {
                CostPower::Linear => 1.0,
                CostPower::Squared => 2.0,
            };
            c.coef * (0.5 * q * grid.ln_scale).exp()
        })
        .collect();
    let normal = (0..grid.n_terms())
        .map(|l| (0..grid.n_cells()).map(|c| 1.0 / grid.mass(l, c).sqrt()).collect())
        .collect();
    Ok(Problem {
        grid,
        eff,
        power: costs.iter().map(|c| c.power).collect(),
        normal,
        target,
    })
}

/// Objective of the decomposition `f_l = target·1{assign = l}` (natural units).
pub fn assignment_cost(grid: &Grid, costs: &[TermCost], assign: &[usize], target: f64) -> Result<f64> {
    let p = problem(grid, costs, target)?;
    Ok(p.objective(&p.scaled_from_assignment(assign)))
}

/// The cheapest term of every cell by `coef·mass` (`coef²·mass` for linear costs).
pub fn argmin_mass_assignment(grid: &Grid, costs: &[TermCost]) -> Vec<usize> {
    (0..grid.n_cells())
        .map(|c| {
            (0..grid.n_terms())
                .map(|l| {
                    let k = match costs[l].power {
                        CostPower::Linear => costs[l].coef * costs[l].coef,
                        CostPower::Squared => costs[l].coef,
                    };
                    (k * grid.mass(l, c), l)
                })
                .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a })
                .1
        })
        .collect()
}

/// Minimises `Σ_l cost_l(f_l)` subject to `Σ_l f_l = target` on every cell.
///
/// The iteration starts from the cheaper of the argmin-mass assignment and
/// the optional `init` assignment, keeps the best feasible iterate, and stops
/// when the relative change of the feasible objective and the relative gap
/// between the two half-steps both fall below `tol`.
pub fn solve_costs(
    grid: &Grid,
    costs: &[TermCost],
    target: f64,
    config: &SolverConfig,
    init: Option<&[usize]>,
) -> Result<SolveOutcome> {
    if !(config.tol > 0.0) || !(config.step > 0.0) {
        return Err(Error::Parameter {
            name: "solver config",
            value: config.tol.min(config.step),
            valid: "tol > 0 and step > 0".into(),
        });
    }
    let p = problem(grid, costs, target)?;
    if target == 0.0 {
        return Ok(SolveOutcome {
            objective: 0.0,
            fields: DiscreteField {
                values: vec![vec![0.0; grid.n_cells()]; grid.n_terms()],
            },
            iterations: 0,
            converged: true,
            history: vec![0.0],
        });
    }
    let mut start = p.scaled_from_assignment(&argmin_mass_assignment(grid, costs));
    let mut best_val = p.objective(&start);
    if let Some(a) = init {
        let g = p.scaled_from_assignment(a);
        let v = p.objective(&g);
        if v < best_val {
            best_val = v;
            start = g;
        }
    }
    let scale = start.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let eff_ref = p.eff.iter().sum::<f64>() / p.eff.len() as f64;
    let gamma = config.step * scale / (eff_ref * grid.n_terms() as f64);

    let mut best = start.clone();
    let mut z = start;
    let mut history = vec![best_val];
    let mut prev = best_val;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=config.max_iter {
        iterations = it;
        let x = p.prox(&z, gamma)?;
        let mut y: Vec<Vec<f64>> = x
            .iter()
            .zip(&z)
            .map(|(xl, zl)| xl.iter().zip(zl).map(|(a, b)| 2.0 * a - b).collect())
            .collect();
        p.project(&mut y);
        let mut gap = 0.0;
        let mut size = 0.0;
        for l in 0..z.len() {
            for c in 0..z[l].len() {
                let d = y[l][c] - x[l][c];
                z[l][c] += d;
                gap += d * d;
                size += y[l][c] * y[l][c];
            }
        }
        let val = p.objective(&y);
        if val < best_val {
            best_val = val;
            best.clone_from(&y);
        }
        history.push(best_val);
        let change = (val - prev).abs() / val.abs().max(f64::MIN_POSITIVE);
        prev = val;
        if it > 1 && change < config.tol && gap.sqrt() <= config.tol.sqrt() * size.sqrt() {
            converged = true;
            break;
        }
    }
    Ok(SolveOutcome {
        objective: best_val,
        fields: p.unscale(&best),
        iterations,
        converged,
        history,
    })
}
