//! Nested adaptive Gauss–Kronrod quadrature over a box in log coordinates.
//!
//! Level `k` integrates coordinate `y_k` with the outer coordinates fixed.
//! The integrand of each level is smooth except at the `y_k`-coordinates of
//! vertices of the arrangement formed, inside the remaining slice, by the
//! crossover and restriction hyperplanes together with the box faces.  Those
//! vertices are enumerated exactly (keeping only vertices where every plane
//! involved is a genuine kink) and used as panel breakpoints, so each panel
//! sees an analytic integrand.

use std::cell::Cell;

use super::integrand::{MinIntegrand, Plane};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Fraction of the running level scale used as an absolute error floor.
const SCALE_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    /// Absolute tolerance per one-dimensional call, in shifted units.
    pub abs_tol: f64,
    /// Maximum number of panels per one-dimensional call.
    pub max_panels: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-300,
            max_panels: 64,
        }
    }
}

/// Value, error estimate, evaluation count and budget flag of a box integral
/// (in the integrand's shifted units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxIntegral {
    pub value: f64,
    pub error: f64,
    pub evaluations: u64,
    pub exhausted: bool,
}

struct Nested<'a> {
    f: &'a MinIntegrand,
    planes: Vec<Plane>,
    lo: &'a [f64],
    hi: &'a [f64],
    cfg: QuadConfig,
    evals: Cell<u64>,
    exhausted: Cell<bool>,
    /// Largest magnitude of a completed integral at each level so far; inner
    /// integrals far below it only need absolute accuracy relative to it.
    scale: Vec<Cell<f64>>,
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    own_err: f64,
    inner_err: f64,
}

/// `∫_box integrand` by nested adaptive quadrature.
pub fn integrate_box(f: &MinIntegrand, lo: &[f64], hi: &[f64], cfg: QuadConfig) -> BoxIntegral {
    let n = Nested {
        f,
        planes: f.planes(),
        lo,
        hi,
        cfg,
        evals: Cell::new(0),
        exhausted: Cell::new(false),
        scale: (0..lo.len()).map(|_| Cell::new(0.0)).collect(),
    };
    let mut prefix = Vec::with_capacity(lo.len());
    let (value, error) = n.level(0, &mut prefix);
    BoxIntegral {
        value,
        error,
        evaluations: n.evals.get(),
        exhausted: n.exhausted.get(),
    }
}

impl Nested<'_> {
    fn dim(&self) -> usize {
        self.lo.len()
    }

    fn eval(&self, k: usize, prefix: &mut Vec<f64>, x: f64) -> (f64, f64) {
        prefix.push(x);
        let r = if k + 1 == self.dim() {
            self.evals.set(self.evals.get() + 1);
            (self.f.value(prefix), 0.0)
        } else {
            self.level(k + 1, prefix)
        };
        prefix.pop();
        r
    }

    fn gk(&self, k: usize, prefix: &mut Vec<f64>, a: f64, b: f64) -> Panel {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut kron = 0.0;
        let mut gauss = 0.0;
        let mut inner = 0.0;
        for i in 0..8 {
            let nodes: &[f64] = if i == 7 {
                &[c]
            } else {
                &[c - h * XGK[i], c + h * XGK[i]]
            };
            for &x in nodes {
                let (v, e) = self.eval(k, prefix, x);
                kron += WGK[i] * v;
                inner += WGK[i] * e;
                if i % 2 == 1 {
                    gauss += WG[i / 2] * v;
                }
            }
        }
        Panel {
            a,
            b,
            value: kron * h,
            own_err: ((kron - gauss) * h).abs(),
            inner_err: inner * h.abs(),
        }
    }

    fn level(&self, k: usize, prefix: &mut Vec<f64>) -> (f64, f64) {
        let bps = self.breakpoints(k, prefix);
        let mut panels: Vec<Panel> = bps
            .windows(2)
            .map(|w| self.gk(k, prefix, w[0], w[1]))
            .collect();
        loop {
            let total: f64 = panels.iter().map(|p| p.value).sum();
            let err: f64 = panels.iter().map(|p| p.own_err).sum();
            let floor = self.cfg.abs_tol.max(SCALE_FRACTION * self.cfg.rel_tol * self.scale[k].get());
            if err <= floor.max(self.cfg.rel_tol * total.abs()) {
                break;
            }
            if panels.len() >= self.cfg.max_panels.max(bps.len()) {
                self.exhausted.set(true);
                break;
            }
            let (worst, _) = panels
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, p)| if p.own_err > acc.1 { (i, p.own_err) } else { acc });
            let p = panels.swap_remove(worst);
            let m = 0.5 * (p.a + p.b);
            panels.push(self.gk(k, prefix, p.a, m));
            panels.push(self.gk(k, prefix, m, p.b));
        }
        // Fixed-order reduction by panel position keeps results reproducible.
        panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let err = panels.iter().map(|p| p.own_err + p.inner_err).sum();
        if value.abs() > self.scale[k].get() {
            self.scale[k].set(value.abs());
        }
        (value, err)
    }

    /// Sorted breakpoints of level `k` including the box ends.
    fn breakpoints(&self, k: usize, prefix: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let m = d - k;
        let (lo, hi) = (self.lo[k], self.hi[k]);
        // Planes restricted to the remaining coordinates y_k..y_{d−1}.
        struct Local<'p> {
            a: Vec<f64>,
            c: f64,
            src: Option<&'p Plane>,
        }
        let mut local: Vec<Local> = Vec::new();
        for p in &self.planes {
            let a: Vec<f64> = p.a[k..].to_vec();
            if a.iter().all(|x| x.abs() < 1e-12) {
                continue;
            }
            let c = p.c + p.a[..k].iter().zip(prefix).map(|(x, y)| x * y).sum::<f64>();
            local.push(Local { a, c, src: Some(p) });
        }
        for i in k + 1..d {
            for bound in [self.lo[i], self.hi[i]] {
                let mut a = vec![0.0; m];
                a[i - k] = 1.0;
                local.push(Local {
                    a,
                    c: -bound,
                    src: None,
                });
            }
        }
        let mut out = vec![lo, hi];
        let mut y = prefix.to_vec();
        y.resize(d, 0.0);
        let mut idx: Vec<usize> = (0..m).collect();
        if local.len() >= m {
            loop {
                let rows: Vec<&Local> = idx.iter().map(|&i| &local[i]).collect();
                if let Some(z) = solve(&rows.iter().map(|r| r.a.clone()).collect::<Vec<_>>(), &rows.iter().map(|r| -r.c).collect::<Vec<_>>()) {
                    let in_box = z.iter().enumerate().all(|(j, &zj)| {
                        let (l, h) = (self.lo[k + j], self.hi[k + j]);
                        zj > l - 1e-9 && zj < h + 1e-9
                    });
                    if in_box && z[0] > lo && z[0] < hi {
                        y[k..].copy_from_slice(&z);
                        let ok = rows.iter().all(|r| match r.src {
                            None => true,
                            Some(p) => self.f.plane_active(p, &y),
                        });
                        if ok {
                            out.push(z[0]);
                        }
                    }
                }
                // Next combination.
                let mut i = m;
                while i > 0 && idx[i - 1] == local.len() - m + i - 1 {
                    i -= 1;
                }
                if i == 0 {
                    break;
                }
                idx[i - 1] += 1;
                for j in i..m {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * (1.0 + b.abs()));
        out
    }
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let mut mat: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(r, &bi)| {
            let mut r = r.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| mat[i][col].abs().partial_cmp(&mat[j][col].abs()).unwrap())?;
        if mat[piv][col].abs() < 1e-10 {
            return None;
        }
        mat.swap(col, piv);
        for r in col + 1..m {
            let f = mat[r][col] / mat[col][col];
            if f != 0.0 {
                for c in col..=m {
                    mat[r][c] -= f * mat[col][c];
                }
            }
        }
    }
    let mut z = vec![0.0; m];
    for r in (0..m).rev() {
        let s: f64 = (r + 1..m).map(|c| mat[r][c] * z[c]).sum();
        z[r] = (mat[r][m] - s) / mat[r][r];
    }
    Some(z)
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kronrod_integrates_polynomials_exactly() {
        // Constant integrand over a 2-D box: the volume.
        let f = MinIntegrand::new(vec![vec![0.0, 0.0]], vec![0.0]);
        let r = integrate_box(&f, &[0.0, -1.0], &[1.0, 2.0], QuadConfig::default());
        assert!((r.value - 3.0).abs() < 1e-14);
    }

    #[test]
    fn kinked_one_dimensional_toy() {
        // min(e^{2y}, e^{−2y}) over [−5, 5]: 1 − e^{−10}.
        let f = MinIntegrand::new(vec![vec![2.0], vec![-2.0]], vec![0.0, 0.0]);
        let r = integrate_box(&f, &[-5.0], &[5.0], QuadConfig { rel_tol: 1e-12, ..Default::default() });
        assert!((r.value - (1.0 - (-10.0f64).exp())).abs() < 1e-12);
        assert!(!r.exhausted);
    }

    #[test]
    fn two_dimensional_kinks_are_found() {
        // min(1, e^{y0+y1}) over [−3,0]²: exact value by symmetry of the triangle.
        let f = MinIntegrand::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![0.0, 0.0]);
        let r = integrate_box(&f, &[-3.0, -3.0], &[0.0, 0.0], QuadConfig { rel_tol: 1e-12, ..Default::default() });
        // ∫_{−3}^0 ∫_{−3}^0 e^{x+y} dx dy (since x+y ≤ 0 everywhere) = (1 − e^{−3})².
        let exact = (1.0 - (-3.0f64).exp()).powi(2);
        assert!((r.value - exact).abs() < 1e-12, "{} {}", r.value, exact);
    }
}
