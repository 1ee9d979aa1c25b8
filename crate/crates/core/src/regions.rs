//! Partition of the integration domain by the active min-term.
//!
//! All geometry lives in logarithmic coordinates, where every constraint
//! "term l is smaller than term m" is an open half-space.  Each region is a
//! union of cylindrical cells: an ordered list of variables, each bounded below
//! and above by a single affine form (a monomial in the original coordinates)
//! of the variables bound before it.  Cells are produced by Fourier–Motzkin
//! style elimination on strict inequalities, so lower-dimensional pieces are
//! pruned automatically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{ScenarioKind, ScenarioSpec};

/// Feasibility slack for strict inequalities.
const FEAS_TOL: f64 = 1e-9;
/// Coefficients below this magnitude are treated as zero.
const COEF_TOL: f64 = 1e-12;

/// Affine form `coeffs · y + c0 + cn · ln n` in logarithmic coordinates.
///
/// In the original coordinates it is the logarithm of the monomial
/// `e^{c0} · n^{cn} · Π x_i^{coeffs[i]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub coeffs: Vec<f64>,
    pub c0: f64,
    pub cn: f64,
}

impl Affine {
    pub fn zero(dim: usize) -> Self {
        Self {
            coeffs: vec![0.0; dim],
            c0: 0.0,
            cn: 0.0,
        }
    }

    /// The coordinate function `y_var`.
    pub fn coord(dim: usize, var: usize) -> Self {
        let mut a = Self::zero(dim);
        a.coeffs[var] = 1.0;
        a
    }

    pub fn constant(dim: usize, c0: f64, cn: f64) -> Self {
        Self {
            coeffs: vec![0.0; dim],
            c0,
            cn,
        }
    }

    pub fn eval(&self, y: &[f64], ln_n: f64) -> f64 {
        self.coeffs.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() + self.const_value(ln_n)
    }

    pub fn const_value(&self, ln_n: f64) -> f64 {
        // Avoid 0·∞ when a bound has no n-dependence.
        if self.cn == 0.0 {
            self.c0
        } else {
            self.c0 + self.cn * ln_n
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a - b).collect(),
            c0: self.c0 - o.c0,
            cn: self.cn - o.cn,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a + b).collect(),
            c0: self.c0 + o.c0,
            cn: self.cn + o.cn,
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a * k).collect(),
            c0: self.c0 * k,
            cn: self.cn * k,
        }
    }

    fn max_coef(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, a| m.max(a.abs()))
    }

    fn normalized(&self) -> Self {
        let m = self.max_coef();
        if m > COEF_TOL {
            self.scale(1.0 / m)
        } else {
            self.clone()
        }
    }

    fn approx_eq(&self, o: &Self, ln_n: f64) -> bool {
        self.coeffs
            .iter()
            .zip(&o.coeffs)
            .all(|(a, b)| (a - b).abs() <= 1e-10)
            && (self.const_value(ln_n) - o.const_value(ln_n)).abs() <= 1e-10
    }

    /// Human-readable monomial form, e.g. `n^(1/4)·u^(1/2)`.
    pub fn monomial(&self, variables: &[String]) -> String {
        let mut parts = Vec::new();
        if self.c0 != 0.0 {
            parts.push(format!("{:.6}", self.c0.exp()));
        }
        if self.cn != 0.0 {
            parts.push(format!("n^{}", fmt_ratio(self.cn)));
        }
        for (v, &a) in variables.iter().zip(&self.coeffs) {
            if a.abs() > COEF_TOL {
                parts.push(format!("{}^{}", v, fmt_ratio(a)));
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("·")
        }
    }
}

/// Formats a real as a small-denominator fraction when possible.
fn fmt_ratio(a: f64) -> String {
    for den in 1..=12i64 {
        let num = a * den as f64;
        if (num - num.round()).abs() < 1e-9 {
            let num = num.round() as i64;
            return if den == 1 {
                format!("{num}")
            } else {
                format!("({num}/{den})")
            };
        }
    }
    format!("({a})")
}

/// Bounds of one variable inside a cell; `None` means `−∞` / `+∞` in log
/// coordinates, i.e. `0` / `∞` in the original ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub var: usize,
    pub lower: Option<Affine>,
    pub upper: Option<Affine>,
}

/// A cylindrical cell; `bounds` runs from the outermost to the innermost variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub bounds: Vec<Bound>,
}

impl Cell {
    pub fn contains_log(&self, y: &[f64], ln_n: f64) -> bool {
        self.bounds.iter().all(|b| {
            let x = y[b.var];
            b.lower.as_ref().map_or(true, |l| l.eval(y, ln_n) <= x)
                && b.upper.as_ref().map_or(true, |h| x < h.eval(y, ln_n))
        })
    }

    /// One human-readable line per bound, outermost first.
    pub fn describe(&self, variables: &[String]) -> Vec<String> {
        self.bounds
            .iter()
            .map(|b| {
                let lo = b.lower.as_ref().map_or("0".into(), |a| a.monomial(variables));
                let hi = b.upper.as_ref().map_or("∞".into(), |a| a.monomial(variables));
                format!("{} ≤ {} < {}", lo, variables[b.var], hi)
            })
            .collect()
    }
}

/// Where one reduced term attains the minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    /// `(i, j)`: outer block `A_i` and sub-region `j`, both 1-based.
    pub id: (usize, usize),
    /// 0-based index into the scenario's terms.
    pub active_term: usize,
    pub cells: Vec<Cell>,
}

impl Region {
    pub fn contains_log(&self, y: &[f64], ln_n: f64) -> bool {
        self.cells.iter().any(|c| c.contains_log(y, ln_n))
    }

    pub fn label(&self) -> String {
        format!("A{}_{}", self.id.0, self.id.1)
    }
}

/// Open half-space `g > 0` in log coordinates.
pub type Constraint = Affine;

/// Whether the open polyhedron `{g_k > 0 ∀k}` is nonempty, by
/// Fourier–Motzkin elimination of every variable.
pub fn feasible(cons: &[Constraint], ln_n: f64) -> bool {
    let dim = match cons.first() {
        Some(c) => c.coeffs.len(),
        None => return true,
    };
    // Work with (coeffs, constant) pairs; the n-dependence is bound here.
    let mut sys: Vec<(Vec<f64>, f64)> = cons
        .iter()
        .map(|c| (c.coeffs.clone(), c.const_value(ln_n)))
        .collect();
    for var in 0..dim {
        sys = tighten(sys);
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut next = Vec::new();
        for (a, c) in sys {
            if a[var] > COEF_TOL {
                pos.push((a, c));
            } else if a[var] < -COEF_TOL {
                neg.push((a, c));
            } else {
                next.push((a, c));
            }
        }
        for (ap, cp) in &pos {
            for (an, cq) in &neg {
                let (wp, wn) = (1.0 / ap[var], 1.0 / (-an[var]));
                let mut a: Vec<f64> = ap.iter().zip(an).map(|(x, y)| x * wp + y * wn).collect();
                a[var] = 0.0;
                next.push((a, cp * wp + cq * wn));
            }
        }
        sys = next;
    }
    sys.iter().all(|(_, c)| *c > FEAS_TOL)
}

/// Normalizes each constraint and keeps only the tightest one per direction.
fn tighten(sys: Vec<(Vec<f64>, f64)>) -> Vec<(Vec<f64>, f64)> {
    let mut out: Vec<(Vec<f64>, f64)> = Vec::with_capacity(sys.len());
    for (a, c) in sys {
        let m = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let (a, c) = if m > COEF_TOL {
            (a.iter().map(|x| x / m).collect::<Vec<_>>(), c / m)
        } else {
            (vec![0.0; a.len()], c)
        };
        match out
            .iter_mut()
            .find(|(b, _)| b.iter().zip(&a).all(|(x, y)| (x - y).abs() < 1e-10))
        {
            Some(slot) => slot.1 = slot.1.min(c),
            None => out.push((a, c)),
        }
    }
    out
}

fn dedup(mut v: Vec<Affine>, ln_n: f64) -> Vec<Affine> {
    let mut out: Vec<Affine> = Vec::with_capacity(v.len());
    for a in v.drain(..) {
        if !out.iter().any(|b| b.approx_eq(&a, ln_n)) {
            out.push(a);
        }
    }
    out
}

/// Cylindrical decomposition of `{g > 0 ∀ g ∈ cons}` along `order`
/// (outermost variable first).  Every returned cell has single affine bounds.
pub fn decompose(cons: &[Constraint], order: &[usize], ln_n: f64) -> Vec<Cell> {
    decompose_rec(
        cons.iter().map(Affine::normalized).collect(),
        order,
        ln_n,
    )
    .into_iter()
    .map(|bounds| Cell { bounds })
    .collect()
}

fn decompose_rec(cons: Vec<Affine>, order: &[usize], ln_n: f64) -> Vec<Vec<Bound>> {
    let Some((&y, outer)) = order.split_last() else {
        return if cons.iter().all(|c| c.const_value(ln_n) > FEAS_TOL) {
            vec![Vec::new()]
        } else {
            Vec::new()
        };
    };
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    let mut rest = Vec::new();
    for g in cons {
        let a = g.coeffs[y];
        if a.abs() <= COEF_TOL {
            rest.push(g);
            continue;
        }
        // a·y + r > 0  ⇔  y > −r/a (a > 0)  or  y < r/(−a) (a < 0).
        let mut r = g.clone();
        r.coeffs[y] = 0.0;
        if a > 0.0 {
            lowers.push(r.scale(-1.0 / a));
        } else {
            uppers.push(r.scale(1.0 / -a));
        }
    }
    let lowers = dedup(lowers, ln_n);
    let uppers = dedup(uppers, ln_n);
    let lo_choices: Vec<Option<usize>> = if lowers.is_empty() {
        vec![None]
    } else {
        (0..lowers.len()).map(Some).collect()
    };
    let hi_choices: Vec<Option<usize>> = if uppers.is_empty() {
        vec![None]
    } else {
        (0..uppers.len()).map(Some).collect()
    };
    let mut cells = Vec::new();
    for &i in &lo_choices {
        for &j in &hi_choices {
            let mut sub = rest.clone();
            if let Some(i) = i {
                for (k, l) in lowers.iter().enumerate() {
                    if k != i {
                        sub.push(lowers[i].sub(l).normalized());
                    }
                }
            }
            if let Some(j) = j {
                for (k, h) in uppers.iter().enumerate() {
                    if k != j {
                        sub.push(h.sub(&uppers[j]).normalized());
                    }
                }
            }
            if let (Some(i), Some(j)) = (i, j) {
                sub.push(uppers[j].sub(&lowers[i]).normalized());
            }
            let sub = dedup(sub, ln_n);
            if !feasible(&sub, ln_n) {
                continue;
            }
            for mut bounds in decompose_rec(sub, outer, ln_n) {
                bounds.push(Bound {
                    var: y,
                    lower: i.map(|i| lowers[i].clone()),
                    upper: j.map(|j| uppers[j].clone()),
                });
                cells.push(bounds);
            }
        }
    }
    cells
}

/// Log-coordinate affine forms of the reduced terms.
pub fn reduced_affines(spec: &ScenarioSpec) -> Vec<Affine> {
    spec.reduced_terms()
        .into_iter()
        .map(|w| Affine {
            coeffs: w.exponents.clone(),
            c0: w.coefficient.ln(),
            cn: w.n_power,
        })
        .collect()
}

/// Constraints "term `l` is strictly smaller than every other term".
pub fn activity_constraints(spec: &ScenarioSpec, l: usize) -> Vec<Constraint> {
    let r = reduced_affines(spec);
    (0..r.len())
        .filter(|&m| m != l)
        .map(|m| r[m].sub(&r[l]))
        .filter(|g| g.max_coef() > COEF_TOL || g.const_value(0.0) != 0.0 || g.cn != 0.0)
        .collect()
}

/// Full partition of the domain for a named scenario.
pub fn derive_regions(spec: &ScenarioSpec) -> Result<Vec<Region>> {
    derive_regions_with(spec, &[])
}

/// Partition of `{g > 0 ∀ g ∈ extra}` (e.g. a truncation box).
pub fn derive_regions_with(spec: &ScenarioSpec, extra: &[Constraint]) -> Result<Vec<Region>> {
    if spec.is_empty() {
        return Err(Error::Data("scenario has no terms".into()));
    }
    match spec.kind {
        ScenarioKind::OhToLp | ScenarioKind::OhToLpRelaxed => Ok(lp_regions(spec, extra)),
        _ => Ok(per_term_regions(spec, extra)),
    }
}

/// Box constraints `lo_i < y_i < hi_i` in log coordinates.
pub fn box_constraints(lo: &[f64], hi: &[f64]) -> Vec<Constraint> {
    let d = lo.len();
    let mut out = Vec::new();
    for i in 0..d {
        out.push(Affine::coord(d, i).add(&Affine::constant(d, -lo[i], 0.0)));
        out.push(Affine::coord(d, i).scale(-1.0).add(&Affine::constant(d, hi[i], 0.0)));
    }
    out
}

fn candidate_orders(d: usize, outer: &[usize]) -> Vec<Vec<usize>> {
    let inner: Vec<usize> = (0..d).filter(|i| !outer.contains(i)).collect();
    let mut fwd = outer.to_vec();
    fwd.extend(&inner);
    let mut rev = outer.to_vec();
    rev.extend(inner.iter().rev());
    if fwd == rev {
        vec![fwd]
    } else {
        vec![fwd, rev]
    }
}

fn best_decomposition(cons: &[Constraint], orders: &[Vec<usize>], ln_n: f64) -> Vec<Cell> {
    let mut best: Option<Vec<Cell>> = None;
    for order in orders {
        let cells = decompose(cons, order, ln_n);
        if best.as_ref().map_or(true, |b| cells.len() < b.len()) {
            best = Some(cells);
        }
    }
    best.unwrap_or_default()
}

fn per_term_regions(spec: &ScenarioSpec, extra: &[Constraint]) -> Vec<Region> {
    let orders = candidate_orders(spec.dim(), &[]);
    (0..spec.len())
        .filter_map(|l| {
            let mut cons = activity_constraints(spec, l);
            cons.extend_from_slice(extra);
            let cells = best_decomposition(&cons, &orders, spec.ln_n);
            (!cells.is_empty()).then(|| Region {
                id: (l + 1, 1),
                active_term: l,
                cells,
            })
        })
        .collect()
}

/// Sorted thresholds of a single outer variable at which two reduced terms swap.
fn outer_thresholds(spec: &ScenarioSpec, var: usize, others: &[usize]) -> Vec<Affine> {
    let r = reduced_affines(spec);
    let d = spec.dim();
    let mut out: Vec<Affine> = Vec::new();
    for l in 0..r.len() {
        for m in l + 1..r.len() {
            let g = r[l].sub(&r[m]);
            let single = (0..d).all(|i| i == var || g.coeffs[i].abs() <= COEF_TOL);
            let _ = others;
            if single && g.coeffs[var].abs() > COEF_TOL {
                // g = a·y + c = 0 ⇔ y = −c/a.
                let a = g.coeffs[var];
                let t = Affine::constant(d, -g.c0 / a, -g.cn / a);
                if !out.iter().any(|o| o.approx_eq(&t, spec.ln_n)) {
                    out.push(t);
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.const_value(spec.ln_n)
            .partial_cmp(&b.const_value(spec.ln_n))
            .unwrap()
    });
    out
}

fn lp_regions(spec: &ScenarioSpec, extra: &[Constraint]) -> Vec<Region> {
    let (s, t, u, v) = (0usize, 1usize, 2usize, 3usize);
    let _ = (s, t);
    let d = spec.dim();
    let ln_n = spec.ln_n;
    let intervals = |var: usize| -> Vec<(Option<Affine>, Option<Affine>)> {
        let th = outer_thresholds(spec, var, &[u, v]);
        let mut out = Vec::new();
        let mut prev: Option<Affine> = None;
        for t in th {
            // Thresholds that coincide for this n give empty intervals.
            if prev
                .as_ref()
                .map_or(false, |p| t.const_value(ln_n) - p.const_value(ln_n) <= FEAS_TOL)
            {
                continue;
            }
            out.push((prev.clone(), Some(t.clone())));
            prev = Some(t);
        }
        out.push((prev, None));
        out
    };
    let orders = candidate_orders(d, &[u, v]);
    let mut regions = Vec::new();
    for (ulo, uhi) in intervals(u) {
        for (vlo, vhi) in intervals(v) {
            let mut cell_cons: Vec<Constraint> = extra.to_vec();
            let mut rep = [0.0f64; 2];
            for (k, (var, lo, hi)) in [(u, &ulo, &uhi), (v, &vlo, &vhi)].into_iter().enumerate() {
                if let Some(lo) = lo {
                    cell_cons.push(Affine::coord(d, var).sub(lo));
                }
                if let Some(hi) = hi {
                    cell_cons.push(hi.sub(&Affine::coord(d, var)));
                }
                let (l, h) = (
                    lo.as_ref().map(|a| a.const_value(ln_n)),
                    hi.as_ref().map(|a| a.const_value(ln_n)),
                );
                rep[k] = match (l, h) {
                    (Some(l), Some(h)) => 0.5 * (l + h),
                    (Some(l), None) => l + 1.0,
                    (None, Some(h)) => h - 1.0,
                    (None, None) => 0.0,
                };
            }
            let block = lp_block(rep[0], rep[1], ln_n);
            for l in 0..spec.len() {
                let mut cons = activity_constraints(spec, l);
                cons.extend(cell_cons.iter().cloned());
                let cells = best_decomposition(&cons, &orders, ln_n);
                if cells.is_empty() {
                    continue;
                }
                regions.push(Region {
                    id: (block, lp_sub_index(block, l)),
                    active_term: l,
                    cells,
                });
            }
        }
    }
    regions.sort_by_key(|r| r.id);
    regions
}

/// Outer block `A_i` containing the log point `(u, v)`.
fn lp_block(u: f64, v: f64, ln_n: f64) -> usize {
    let h = 0.5 * ln_n;
    if u < 0.0 {
        if v < -h {
            1
        } else if v < 0.0 {
            2
        } else if v >= h {
            3
        } else {
            4
        }
    } else if v >= h {
        5
    } else if v >= 0.0 {
        6
    } else if v < -h {
        7
    } else {
        8
    }
}

/// Sub-region index: 1 for the bounded group (terms 5–8), then the term group
/// carrying `s⁴` and the one carrying `t⁴`; the two swap roles in `A₅…A₈`,
/// which are the images of `A₁…A₄` under `(s,t,u,v) ↦ (t,s,1/u,1/v)`.
fn lp_sub_index(block: usize, term: usize) -> usize {
    let s_group = term == 0 || term == 2;
    let t_group = term == 1 || term == 3;
    match (block <= 4, s_group, t_group) {
        (_, false, false) => 1,
        (true, true, _) | (false, _, true) => 2,
        _ => 3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_scenario, ScenarioKind};

    #[test]
    fn fourier_motzkin_detects_empty_and_thin_sets() {
        let x = Affine::coord(1, 0);
        let one = Affine::constant(1, 1.0, 0.0);
        // 0 < x < 1
        assert!(feasible(&[x.clone(), one.sub(&x)], 0.0));
        // x > 1 and x < 1: empty.
        assert!(!feasible(&[x.sub(&one), one.sub(&x)], 0.0));
        // x > 0 and x < 0: measure zero.
        assert!(!feasible(&[x.clone(), x.scale(-1.0)], 0.0));
    }

    #[test]
    fn triangle_decomposes_into_one_cell() {
        // y0 > 0, y1 > 0, y0 + y1 < 1.
        let d = 2;
        let cons = vec![
            Affine::coord(d, 0),
            Affine::coord(d, 1),
            Affine::constant(d, 1.0, 0.0)
                .sub(&Affine::coord(d, 0))
                .sub(&Affine::coord(d, 1)),
        ];
        let cells = decompose(&cons, &[0, 1], 0.0);
        assert_eq!(cells.len(), 1);
        assert!(cells[0].contains_log(&[0.2, 0.3], 0.0));
        assert!(!cells[0].contains_log(&[0.6, 0.6], 0.0));
    }

    #[test]
    fn lp_partition_has_24_regions() {
        let spec = build_scenario(ScenarioKind::OhToLp, 0.5, 16).unwrap();
        let regions = derive_regions(&spec).unwrap();
        assert_eq!(regions.len(), 24);
        for i in 1..=8 {
            for j in 1..=3 {
                assert_eq!(regions.iter().filter(|r| r.id == (i, j)).count(), 1);
            }
        }
    }

    #[test]
    fn a11_matches_table_row() {
        let spec = build_scenario(ScenarioKind::OhToLp, 0.5, 16).unwrap();
        let regions = derive_regions(&spec).unwrap();
        let a11 = regions.iter().find(|r| r.id == (1, 1)).unwrap();
        assert_eq!(a11.active_term, 6);
        assert_eq!(a11.cells.len(), 1);
        let text = a11.cells[0].describe(&spec.variables).join("; ");
        assert!(text.contains("u^(1/2) ≤ s < ∞"), "{text}");
        assert!(text.contains("n^(1/4) ≤ t < ∞"), "{text}");
    }

    #[test]
    fn cp_has_four_regions() {
        let spec = build_scenario(ScenarioKind::OhToCp, 0.7, 8).unwrap();
        let regions = derive_regions(&spec).unwrap();
        assert_eq!(regions.len(), 4);
    }

    #[test]
    fn fractions_are_printed_compactly() {
        assert_eq!(fmt_ratio(0.25), "(1/4)");
        assert_eq!(fmt_ratio(-2.0), "-2");
    }
}
