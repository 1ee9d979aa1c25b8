//! Sum-space norms `inf{Σ_l ‖f_l‖_l : Σ_l f_l = target}` on discretised
//! grids, with weighted-L2 terms and projective (nuclear-norm) terms.

mod grid;
mod norms;
mod solver;

pub use grid::{discretize, discretize_with_scale, Grid, TermMasses};
pub use norms::{l2_norm, nuclear_norm};
pub use solver::{
    argmin_mass_assignment, assignment_cost, solve_costs, CostPower, DiscreteField, SolveOutcome,
    SolverConfig, TermCost,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::integrator::integrate_min_box_log;
use crate::oracle::LogBox;
use crate::regions::Region;
use crate::scenario::ScenarioSpec;

/// Solver output together with its certificate bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub objective: f64,
    pub fields: DiscreteField,
    /// `relaxed_lower_bound` on the same box.
    pub lower_bound: f64,
    /// `region_assignment_value` on the same grid.
    pub upper_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best feasible objective after each iteration (nonincreasing).
    pub history: Vec<f64>,
}

/// Half-width of the default grid box at `n = 1`.
pub const DEFAULT_BOX_BASE: f64 = 4.0;

/// Symmetric log box of half-width `4 + ½ ln n`, wide enough to hold the
/// bulk of the min-integral at every tested scale.
pub fn default_box(spec: &ScenarioSpec) -> Result<LogBox> {
    LogBox::symmetric(spec.dim(), DEFAULT_BOX_BASE + 0.5 * spec.ln_n)
}

/// Term each cell is assigned to by the region containing its centre
/// (falling back to the active term at the centre on region boundaries).
pub fn region_assignment(spec: &ScenarioSpec, regions: &[Region], grid: &Grid) -> Vec<usize> {
    (0..grid.n_cells())
        .map(|c| {
            let y = grid.centre(c);
            regions
                .iter()
                .find(|r| r.contains_log(&y, spec.ln_n))
                .map_or_else(|| spec.active_term_log(&y), |r| r.active_term)
        })
        .collect()
}

/// Cost of the feasible decomposition `f_l = 1` on the cells whose centre
/// lies in a region assigned to term `l`.
pub fn region_assignment_value(spec: &ScenarioSpec, regions: &[Region], grid: &Grid) -> Result<f64> {
    let costs = vec![TermCost::linear(1.0); spec.len()];
    assignment_cost(grid, &costs, &region_assignment(spec, regions, grid), 1.0)
}

/// `(1/L)·(∫_box min_l w_l)^{1/2}`, a lower bound for every decomposition of 1.
pub fn relaxed_lower_bound(spec: &ScenarioSpec, grid: &Grid) -> Result<f64> {
    let ln_m = integrate_min_box_log(spec, &grid.bounds.lo, &grid.bounds.hi)?;
    Ok((0.5 * ln_m.ln).exp() / spec.len() as f64)
}

/// Minimises `Σ_l ‖f_l‖_l` subject to `Σ_l f_l = target` (unit coefficients)
/// and attaches the lower bound and the region-assignment upper bound.
pub fn solve_decomposition(
    spec: &ScenarioSpec,
    grid: &Grid,
    target: f64,
    config: &SolverConfig,
) -> Result<DecompositionResult> {
    let regions = crate::regions::derive_regions(spec)?;
    let assign = region_assignment(spec, &regions, grid);
    let costs = vec![TermCost::linear(1.0); spec.len()];
    let out = solve_costs(grid, &costs, target, config, Some(&assign))?;
    Ok(DecompositionResult {
        objective: out.objective,
        fields: out.fields,
        lower_bound: relaxed_lower_bound(spec, grid)? * target.abs(),
        upper_bound: assignment_cost(grid, &costs, &assign, 1.0)? * target.abs(),
        iterations: out.iterations,
        converged: out.converged,
        history: out.history,
    })
}
