//! Exact iterated integration of exponential-polynomial expressions.
//!
//! An [`ExpPoly`] is a finite sum of terms `c · e^{g + β·y} · Π y_i^{k_i}` in
//! logarithmic coordinates `y`.  Integrating one coordinate between affine
//! limits (or ±∞) yields another `ExpPoly` in the remaining coordinates, so
//! a cylindrical cell is integrated exactly by peeling variables from the
//! innermost outwards.  Constants `g` are kept separate from `c` so that
//! values far outside the floating-point range stay representable.

use crate::error::{Error, Result};
use crate::logval::ln_signed_sum;

/// Log-slopes below this magnitude are treated as exactly zero between finite
/// limits, and as a pole against an infinite one.
pub const SLOPE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ExpTerm {
    pub coef: f64,
    pub lnc: f64,
    pub slopes: Vec<f64>,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    pub terms: Vec<ExpTerm>,
}

/// A numeric affine limit `β · y + b0` (the scale already bound).
#[derive(Debug, Clone, PartialEq)]
pub struct Limit {
    pub beta: Vec<f64>,
    pub b0: f64,
}

impl ExpPoly {
    /// The single exponential `e^{lnc + slopes·y}`.
    pub fn exponential(lnc: f64, slopes: Vec<f64>) -> Self {
        let d = slopes.len();
        Self {
            terms: vec![ExpTerm {
                coef: 1.0,
                lnc,
                slopes,
                powers: vec![0; d],
            }],
        }
    }

    /// `ln` of the value once every variable has been integrated out.
    pub fn ln_constant_value(&self) -> Result<f64> {
        let pairs: Vec<(f64, f64)> = self
            .terms
            .iter()
            .map(|t| {
                debug_assert!(t.powers.iter().all(|&k| k == 0));
                (t.coef, t.lnc)
            })
            .collect();
        ln_signed_sum(&pairs)
    }

    /// Evaluates the expression at a point.
    pub fn eval(&self, y: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let mut v = t.coef
                    * (t.lnc + t.slopes.iter().zip(y).map(|(a, b)| a * b).sum::<f64>()).exp();
                for (k, x) in t.powers.iter().zip(y) {
                    v *= x.powi(*k as i32);
                }
                v
            })
            .sum()
    }

    /// `∫_{lo}^{hi} (·) dy_var`; `None` limits are `−∞` / `+∞`.
    pub fn integrate(
        &self,
        var: usize,
        lo: Option<&Limit>,
        hi: Option<&Limit>,
        var_name: &str,
    ) -> Result<ExpPoly> {
        let mut out: Vec<ExpTerm> = Vec::new();
        for term in &self.terms {
            let alpha_raw = term.slopes[var];
            let k = term.powers[var];
            let finite = lo.is_some() && hi.is_some();
            let alpha = if alpha_raw.abs() < SLOPE_TOL {
                if !finite {
                    return Err(Error::Pole {
                        variable: var_name.to_string(),
                        slope: alpha_raw,
                    });
                }
                0.0
            } else {
                alpha_raw
            };
            if lo.is_none() && alpha < 0.0 || hi.is_none() && alpha > 0.0 {
                return Err(Error::Divergent {
                    variable: var_name.to_string(),
                    exponent: alpha,
                });
            }
            let mut rest = term.clone();
            rest.slopes[var] = 0.0;
            rest.powers[var] = 0;
            // Antiderivative Σ_i a_i y^{m_i} e^{α y}.
            let anti: Vec<(f64, u32)> = if alpha == 0.0 {
                vec![(1.0 / (k as f64 + 1.0), k + 1)]
            } else {
                let mut v = Vec::with_capacity(k as usize + 1);
                let mut c = 1.0 / alpha;
                for i in 0..=k {
                    v.push((c, k - i));
                    // Next coefficient: −(k−i)/α times the current one.
                    c *= -((k - i) as f64) / alpha;
                }
                v
            };
            for (sign, lim) in [(1.0, hi), (-1.0, lo)] {
                // Infinite limits contribute zero (convergence checked above).
                let Some(lim) = lim else { continue };
                for &(a, m) in &anti {
                    for (mono_coef, pows) in expand_power(&lim.beta, lim.b0, m) {
                        let mut t = rest.clone();
                        t.coef *= sign * a * mono_coef;
                        if t.coef == 0.0 {
                            continue;
                        }
                        t.lnc += alpha * lim.b0;
                        for (s, b) in t.slopes.iter_mut().zip(&lim.beta) {
                            *s += alpha * b;
                        }
                        for (p, q) in t.powers.iter_mut().zip(&pows) {
                            *p += q;
                        }
                        out.push(t);
                    }
                }
            }
        }
        Ok(ExpPoly {
            terms: merge(out),
        })
    }
}

/// Expands `(β·y + b0)^m` into `(coefficient, powers)` monomials.
fn expand_power(beta: &[f64], b0: f64, m: u32) -> Vec<(f64, Vec<u32>)> {
    let d = beta.len();
    let mut poly: Vec<(f64, Vec<u32>)> = vec![(1.0, vec![0; d])];
    for _ in 0..m {
        let mut next: Vec<(f64, Vec<u32>)> = Vec::new();
        for (c, p) in &poly {
            let mut push = |coef: f64, pows: Vec<u32>| {
                if coef == 0.0 {
                    return;
                }
                if let Some(slot) = next.iter_mut().find(|(_, q)| *q == pows) {
                    slot.0 += coef;
                } else {
                    next.push((coef, pows));
                }
            };
            push(c * b0, p.clone());
            for (i, &b) in beta.iter().enumerate() {
                if b != 0.0 {
                    let mut q = p.clone();
                    q[i] += 1;
                    push(c * b, q);
                }
            }
        }
        poly = next;
    }
    poly
}

/// Combines terms with identical powers and (numerically) identical slopes.
fn merge(terms: Vec<ExpTerm>) -> Vec<ExpTerm> {
    let mut out: Vec<ExpTerm> = Vec::with_capacity(terms.len());
    for t in terms {
        let slot = out.iter_mut().find(|o| {
            o.powers == t.powers
                && o.slopes
                    .iter()
                    .zip(&t.slopes)
                    .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
        });
        match slot {
            Some(o) => {
                let m = o.lnc.max(t.lnc);
                o.coef = o.coef * (o.lnc - m).exp() + t.coef * (t.lnc - m).exp();
                o.lnc = m;
            }
            None => out.push(t),
        }
    }
    out.retain(|t| t.coef != 0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim(beta: Vec<f64>, b0: f64) -> Limit {
        Limit { beta, b0 }
    }

    #[test]
    fn one_dimensional_exponential() {
        let p = ExpPoly::exponential(0.0, vec![2.0]);
        let r = p
            .integrate(0, Some(&lim(vec![0.0], -1.0)), Some(&lim(vec![0.0], 0.5)), "y")
            .unwrap();
        let exact = ((1.0f64).exp() - (-2.0f64).exp()) / 2.0;
        assert!((r.ln_constant_value().unwrap() - exact.ln()).abs() < 1e-14);
    }

    #[test]
    fn half_line_and_errors() {
        let p = ExpPoly::exponential(0.0, vec![-3.0]);
        let r = p.integrate(0, Some(&lim(vec![0.0], 0.0)), None, "t").unwrap();
        assert!((r.ln_constant_value().unwrap() - (1.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!(matches!(
            p.integrate(0, None, Some(&lim(vec![0.0], 0.0)), "t"),
            Err(Error::Divergent { .. })
        ));
        let flat = ExpPoly::exponential(0.0, vec![1e-12]);
        assert!(matches!(
            flat.integrate(0, Some(&lim(vec![0.0], 0.0)), None, "t"),
            Err(Error::Pole { .. })
        ));
    }

    #[test]
    fn triangle_with_polynomial_factors() {
        // ∫_0^1 ∫_0^{x} e^{y} dy dx = e − 2.
        let p = ExpPoly::exponential(0.0, vec![0.0, 1.0]);
        let inner = p
            .integrate(1, Some(&lim(vec![0.0, 0.0], 0.0)), Some(&lim(vec![1.0, 0.0], 0.0)), "y")
            .unwrap();
        let outer = inner
            .integrate(0, Some(&lim(vec![0.0, 0.0], 0.0)), Some(&lim(vec![0.0, 0.0], 1.0)), "x")
            .unwrap();
        let exact = std::f64::consts::E - 2.0;
        assert!((outer.ln_constant_value().unwrap() - exact.ln()).abs() < 1e-14);
    }

    #[test]
    fn power_factor_antiderivative() {
        // ∫_0^2 y² e^{-y} dy with y² produced by a nested zero-slope integral:
        // ∫_0^2 ∫_0^y ∫_0^z e^{-y} dw dz dy = ∫_0^2 (y²/2) e^{-y} dy.
        let p = ExpPoly::exponential(0.0, vec![-1.0, 0.0, 0.0]);
        let z = lim(vec![0.0, 0.0, 0.0], 0.0);
        let r = p
            .integrate(2, Some(&z), Some(&lim(vec![0.0, 1.0, 0.0], 0.0)), "w")
            .unwrap()
            .integrate(1, Some(&z), Some(&lim(vec![1.0, 0.0, 0.0], 0.0)), "z")
            .unwrap()
            .integrate(0, Some(&z), Some(&lim(vec![0.0, 0.0, 0.0], 2.0)), "y")
            .unwrap();
        let exact = 0.5 * (2.0 - 10.0 * (-2.0f64).exp());
        assert!((r.ln_constant_value().unwrap() - exact.ln()).abs() < 1e-13);
    }

    #[test]
    fn huge_constants_stay_in_log_domain() {
        let p = ExpPoly::exponential(5000.0, vec![-1.0]);
        let r = p.integrate(0, Some(&lim(vec![0.0], 0.0)), None, "t").unwrap();
        assert!((r.ln_constant_value().unwrap() - 5000.0).abs() < 1e-12);
    }
}
