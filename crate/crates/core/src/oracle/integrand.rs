//! The min-of-exponentials integrand in log coordinates, optionally
//! restricted to a union of open polyhedra, and its crossover hyperplanes.

use crate::regions::{Affine, Region};
use crate::scenario::ScenarioSpec;

/// `y ↦ min_l e^{c_l + a_l·y − shift}` restricted to a union of polyhedra.
#[derive(Debug, Clone)]
pub struct MinIntegrand {
    pub slopes: Vec<Vec<f64>>,
    pub consts: Vec<f64>,
    /// Subtracted from the exponent to keep values near unit scale.
    pub shift: f64,
    /// Union of polyhedra `{g > 0 ∀ g}`; `None` means the whole space.
    pub restriction: Option<Vec<Vec<(Vec<f64>, f64)>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneKind {
    Crossover,
    Restriction,
}

/// A hyperplane `a·y + c = 0` on which the integrand may fail to be smooth.
#[derive(Debug, Clone)]
pub struct Plane {
    pub a: Vec<f64>,
    pub c: f64,
    pub kind: PlaneKind,
    /// Term pairs whose crossover lies on this plane.
    pub pairs: Vec<(usize, usize)>,
}

impl MinIntegrand {
    pub fn new(slopes: Vec<Vec<f64>>, consts: Vec<f64>) -> Self {
        Self {
            slopes,
            consts,
            shift: 0.0,
            restriction: None,
        }
    }

    pub fn from_spec(spec: &ScenarioSpec) -> Self {
        let (slopes, consts) = spec.log_affines().into_iter().unzip();
        Self::new(slopes, consts)
    }

    /// Restricts to a union of polyhedra given as lists of constraints `g > 0`.
    pub fn restricted(mut self, polys: Vec<Vec<Affine>>, ln_n: f64) -> Self {
        self.restriction = Some(
            polys
                .into_iter()
                .map(|p| {
                    p.into_iter()
                        .map(|g| {
                            let c = g.const_value(ln_n);
                            (g.coeffs, c)
                        })
                        .collect()
                })
                .collect(),
        );
        self
    }

    /// Restricts to a derived region (each cell becomes one polyhedron).
    pub fn restricted_to_region(self, region: &Region, ln_n: f64) -> Self {
        let polys = region
            .cells
            .iter()
            .map(|cell| {
                let d = self.dim();
                let mut cons = Vec::new();
                for b in &cell.bounds {
                    let y = Affine::coord(d, b.var);
                    if let Some(l) = &b.lower {
                        cons.push(y.sub(l));
                    }
                    if let Some(h) = &b.upper {
                        cons.push(h.sub(&y));
                    }
                }
                cons
            })
            .collect();
        self.restricted(polys, ln_n)
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn dim(&self) -> usize {
        self.slopes[0].len()
    }

    pub fn n_terms(&self) -> usize {
        self.slopes.len()
    }

    pub fn term_log(&self, l: usize, y: &[f64]) -> f64 {
        self.consts[l] + self.slopes[l].iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `min_l (c_l + a_l·y)` and its smallest minimizing index.
    pub fn envelope(&self, y: &[f64]) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for l in 0..self.n_terms() {
            let v = self.term_log(l, y);
            if v < best.0 {
                best = (v, l);
            }
        }
        best
    }

    pub fn inside(&self, y: &[f64], slack: f64) -> bool {
        match &self.restriction {
            None => true,
            Some(polys) => polys.iter().any(|p| {
                p.iter().all(|(a, c)| {
                    a.iter().zip(y).map(|(x, z)| x * z).sum::<f64>() + c > -slack
                })
            }),
        }
    }

    /// Integrand value (with the shift applied).
    pub fn value(&self, y: &[f64]) -> f64 {
        if !self.inside(y, 0.0) {
            return 0.0;
        }
        (self.envelope(y).0 - self.shift).exp()
    }

    /// All distinct hyperplanes across which the integrand can change form.
    pub fn planes(&self) -> Vec<Plane> {
        let mut out: Vec<Plane> = Vec::new();
        let mut push = |a: Vec<f64>, c: f64, kind: PlaneKind, pair: Option<(usize, usize)>| {
            let m = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if m < 1e-12 {
                return;
            }
            let (a, c): (Vec<f64>, f64) = (a.iter().map(|x| x / m).collect(), c / m);
            // Orient so that the first nonzero coefficient is positive.
            let s = a.iter().find(|x| x.abs() > 1e-12).map_or(1.0, |x| x.signum());
            let (a, c): (Vec<f64>, f64) = (a.iter().map(|x| x * s).collect(), c * s);
            if let Some(p) = out.iter_mut().find(|p| {
                (p.c - c).abs() < 1e-10 && p.a.iter().zip(&a).all(|(x, y)| (x - y).abs() < 1e-10)
            }) {
                if let Some(pr) = pair {
                    p.pairs.push(pr);
                }
                if kind == PlaneKind::Restriction {
                    p.kind = PlaneKind::Restriction;
                }
                return;
            }
            out.push(Plane {
                a,
                c,
                kind,
                pairs: pair.into_iter().collect(),
            });
        };
        for l in 0..self.n_terms() {
            for m in l + 1..self.n_terms() {
                let a: Vec<f64> = self.slopes[l]
                    .iter()
                    .zip(&self.slopes[m])
                    .map(|(x, y)| x - y)
                    .collect();
                push(a, self.consts[l] - self.consts[m], PlaneKind::Crossover, Some((l, m)));
            }
        }
        if let Some(polys) = &self.restriction {
            for p in polys {
                for (a, c) in p {
                    push(a.clone(), *c, PlaneKind::Restriction, None);
                }
            }
        }
        out
    }

    /// Whether a crossover plane is a genuine kink of the envelope at `y`.
    pub fn plane_active(&self, plane: &Plane, y: &[f64]) -> bool {
        match plane.kind {
            PlaneKind::Restriction => self.inside(y, 1e-7),
            PlaneKind::Crossover => {
                let (m, _) = self.envelope(y);
                let tol = 1e-8 * (1.0 + m.abs());
                plane.pairs.iter().any(|&(l, k)| {
                    self.term_log(l, y) <= m + tol && self.term_log(k, y) <= m + tol
                }) && self.inside(y, 1e-7)
            }
        }
    }

    /// Approximate maximiser of the concave envelope inside `[−b, b]^d`, by
    /// projected subgradient ascent on `(1+μ)·g − μ·g_l` (pure `g` when
    /// `term` is `None`).
    pub fn ascend(&self, term: Option<usize>, bound: f64, iters: usize) -> Vec<f64> {
        let d = self.dim();
        let mu = 4.0;
        let mut y = vec![0.0; d];
        let mut best = y.clone();
        let obj = |y: &[f64]| {
            let (g, _) = self.envelope(y);
            match term {
                None => g,
                Some(l) => (1.0 + mu) * g - mu * self.term_log(l, y),
            }
        };
        let mut best_val = obj(&y);
        for it in 0..iters {
            let (_, l_act) = self.envelope(&y);
            let mut grad: Vec<f64> = self.slopes[l_act].iter().map(|a| a * (1.0 + mu)).collect();
            match term {
                None => grad = self.slopes[l_act].clone(),
                Some(l) => {
                    for (gi, a) in grad.iter_mut().zip(&self.slopes[l]) {
                        *gi -= mu * a;
                    }
                }
            }
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if norm < 1e-14 {
                break;
            }
            let step = bound / (1.0 + it as f64).sqrt() / norm;
            for (yi, gi) in y.iter_mut().zip(&grad) {
                *yi = (*yi + step * gi).clamp(-bound, bound);
            }
            let v = obj(&y);
            if v > best_val {
                best_val = v;
                best.clone_from(&y);
            }
        }
        best
    }
}
