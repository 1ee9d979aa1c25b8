//! Log-uniform grids with exact per-cell measure masses.

use crate::error::{Error, Result};
use crate::oracle::LogBox;
use crate::scenario::{ScenarioSpec, TermKind};
use crate::weights::MonomialWeight;

/// Largest |ln mass| kept after normalisation; beyond it a term is
/// effectively unusable (or free) in that cell and clamping keeps `e^{±x}`
/// finite.
const LN_CLAMP: f64 = 300.0;

/// Per-term cell masses, relative to the grid's normalisation `e^{ln_scale}`.
#[derive(Debug, Clone, PartialEq)]
pub enum TermMasses {
    /// Mass of each cell under the term's density.
    L2 { mass: Vec<f64> },
    /// Factor masses over the row and column group cells; the mass of a cell
    /// is `row_mass[r] · col_mass[c]` with `(r, c) = Grid::split(term, cell)`.
    Proj {
        row_vars: Vec<usize>,
        col_vars: Vec<usize>,
        row_mass: Vec<f64>,
        col_mass: Vec<f64>,
        /// `(row, col)` of every cell.
        index: Vec<(usize, usize)>,
    },
}

impl TermMasses {
    pub fn cell_mass(&self, cell: usize) -> f64 {
        match self {
            TermMasses::L2 { mass } => mass[cell],
            TermMasses::Proj {
                row_mass,
                col_mass,
                index,
                ..
            } => {
                let (r, c) = index[cell];
                row_mass[r] * col_mass[c]
            }
        }
    }

    pub fn shape(&self) -> Option<(usize, usize)> {
        match self {
            TermMasses::L2 { .. } => None,
            TermMasses::Proj {
                row_mass, col_mass, ..
            } => Some((row_mass.len(), col_mass.len())),
        }
    }
}

/// A tensor grid over a log box, with exact masses for every term.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub bounds: LogBox,
    pub cells_per_var: Vec<usize>,
    /// Cell edges per variable (`cells + 1` nodes, log-uniform in `x`).
    pub edges: Vec<Vec<f64>>,
    pub ln_n: f64,
    /// Every stored mass is the true mass divided by `e^{ln_scale}`; for
    /// projective terms each factor is divided by `e^{ln_scale/2}`.
    pub ln_scale: f64,
    pub terms: Vec<TermMasses>,
}

/// Builds the grid with `resolution` cells per variable.
///
/// `resolution` counts cells (so `resolution + 1` nodes per variable); every
/// mass is an exact monomial antiderivative over its cell.
pub fn discretize(spec: &ScenarioSpec, bounds: &LogBox, resolution: usize) -> Result<Grid> {
    discretize_with_scale(spec, bounds, resolution, None)
}

/// [`discretize`] with an explicit normalisation `ln_scale`; by default the
/// largest per-cell minimal log-mass is used so the cheapest term of every
/// cell has mass at most 1.
pub fn discretize_with_scale(
    spec: &ScenarioSpec,
    bounds: &LogBox,
    resolution: usize,
    ln_scale: Option<f64>,
) -> Result<Grid> {
    if resolution < 1 {
        return Err(Error::Parameter {
            name: "resolution",
            value: resolution as f64,
            valid: "at least 1 cell (2 nodes) per variable".into(),
        });
    }
    let d = spec.dim();
    if bounds.dim() != d {
        return Err(Error::Dimension(format!(
            "box has {} coordinates, scenario has {d}",
            bounds.dim()
        )));
    }
    let cells_per_var = vec![resolution; d];
    let edges: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let (a, b) = (bounds.lo[i], bounds.hi[i]);
            (0..=resolution)
                .map(|k| a + (b - a) * k as f64 / resolution as f64)
                .collect()
        })
        .collect();
    let n_cells: usize = cells_per_var.iter().product();
    let multi = |cell: usize| -> Vec<usize> {
        let mut idx = vec![0; d];
        let mut rest = cell;
        for i in (0..d).rev() {
            idx[i] = rest % cells_per_var[i];
            rest /= cells_per_var[i];
        }
        idx
    };
    // ln mass of a weight over the sub-cell given by the variables in `vars`.
    let ln_mass = |w: &MonomialWeight, vars: &[usize], idx: &[usize]| -> f64 {
        let r = w.restrict(vars, w.coefficient, w.n_power);
        let lo: Vec<f64> = vars.iter().zip(idx).map(|(&v, &k)| edges[v][k]).collect();
        let hi: Vec<f64> = vars.iter().zip(idx).map(|(&v, &k)| edges[v][k + 1]).collect();
        r.ln_box_mass(&lo, &hi, spec.ln_n)
    };
    let all: Vec<usize> = (0..d).collect();
    // Sub-grid enumeration for a group of variables.
    let group_cells = |vars: &[usize]| -> Vec<Vec<usize>> {
        let count: usize = vars.iter().map(|&v| cells_per_var[v]).product();
        (0..count)
            .map(|g| {
                let mut idx = vec![0; vars.len()];
                let mut rest = g;
                for j in (0..vars.len()).rev() {
                    idx[j] = rest % cells_per_var[vars[j]];
                    rest /= cells_per_var[vars[j]];
                }
                idx
            })
            .collect()
    };

    enum Raw {
        L2(Vec<f64>),
        Proj(Vec<usize>, Vec<usize>, Vec<f64>, Vec<f64>, Vec<(usize, usize)>),
    }
    let mut raw = Vec::with_capacity(spec.len());
    for term in &spec.terms {
        match term.kind {
            TermKind::L2 => {
                let w = term.density();
                raw.push(Raw::L2((0..n_cells).map(|c| ln_mass(&w, &all, &multi(c))).collect()));
            }
            TermKind::Proj => {
                let (g1, g2) = term.groups.clone().expect("projective term has groups");
                let rows: Vec<f64> = group_cells(&g1)
                    .iter()
                    .map(|idx| ln_mass(&term.weights[0], &g1, idx))
                    .collect();
                let cols: Vec<f64> = group_cells(&g2)
                    .iter()
                    .map(|idx| ln_mass(&term.weights[1], &g2, idx))
                    .collect();
                let flat = |vars: &[usize], idx: &[usize]| {
                    vars.iter().fold(0usize, |acc, &v| acc * cells_per_var[v] + idx[v])
                };
                let index = (0..n_cells)
                    .map(|c| {
                        let idx = multi(c);
                        (flat(&g1, &idx), flat(&g2, &idx))
                    })
                    .collect();
                raw.push(Raw::Proj(g1, g2, rows, cols, index));
            }
        }
    }
    let ln_cell = |r: &Raw, c: usize| match r {
        Raw::L2(m) => m[c],
        Raw::Proj(_, _, rows, cols, index) => rows[index[c].0] + cols[index[c].1],
    };
    let ln_scale = ln_scale.unwrap_or_else(|| {
        (0..n_cells)
            .map(|c| raw.iter().map(|r| ln_cell(r, c)).fold(f64::INFINITY, f64::min))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    let norm = |x: f64, s: f64| (x - s).clamp(-LN_CLAMP, LN_CLAMP).exp();
    let terms = raw
        .into_iter()
        .map(|r| match r {
            Raw::L2(m) => TermMasses::L2 {
                mass: m.iter().map(|&x| norm(x, ln_scale)).collect(),
            },
            Raw::Proj(g1, g2, rows, cols, index) => TermMasses::Proj {
                row_vars: g1,
                col_vars: g2,
                row_mass: rows.iter().map(|&x| norm(x, 0.5 * ln_scale)).collect(),
                col_mass: cols.iter().map(|&x| norm(x, 0.5 * ln_scale)).collect(),
                index,
            },
        })
        .collect();
    Ok(Grid {
        bounds: bounds.clone(),
        cells_per_var,
        edges,
        ln_n: spec.ln_n,
        ln_scale,
        terms,
    })
}

impl Grid {
    pub fn n_cells(&self) -> usize {
        self.cells_per_var.iter().product()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn dim(&self) -> usize {
        self.cells_per_var.len()
    }

    /// Multi-index of a flat cell index (first variable slowest).
    pub fn multi_index(&self, cell: usize) -> Vec<usize> {
        let d = self.dim();
        let mut idx = vec![0; d];
        let mut rest = cell;
        for i in (0..d).rev() {
            idx[i] = rest % self.cells_per_var[i];
            rest /= self.cells_per_var[i];
        }
        idx
    }

    /// Cell centre in log coordinates.
    pub fn centre(&self, cell: usize) -> Vec<f64> {
        self.multi_index(cell)
            .iter()
            .enumerate()
            .map(|(i, &k)| 0.5 * (self.edges[i][k] + self.edges[i][k + 1]))
            .collect()
    }

    /// Mass of a cell under term `l`, relative to `e^{ln_scale}`.
    pub fn mass(&self, l: usize, cell: usize) -> f64 {
        self.terms[l].cell_mass(cell)
    }

    /// `ln` of the true total mass of term `l` over the box.
    pub fn ln_total_mass(&self, l: usize) -> f64 {
        let total: f64 = match &self.terms[l] {
            TermMasses::L2 { mass } => mass.iter().sum(),
            TermMasses::Proj {
                row_mass, col_mass, ..
            } => row_mass.iter().sum::<f64>() * col_mass.iter().sum::<f64>(),
        };
        total.ln() + self.ln_scale
    }
}
