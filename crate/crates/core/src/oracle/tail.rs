//! Certified bounds on the integral of the min integrand outside a box.
//!
//! The complement of the box is split into the faces of the normalised
//! ℓ∞ ball: with `z_i = (y_i − mid_i)/half_i`, face `(j, ±)` holds the points
//! with `±z_j = r ≥ |z_i|` for all `i` and `r > 1`.  On a face the min is
//! bounded by any convex combination `Σ λ_l g_l` of the exponents, which is
//! affine in `y`, so the face integral is bounded by a separable exponential
//! integral in closed form.  The weights `λ` are optimised by exponentiated
//! subgradient descent on the bound's log at `r = 1`, and pure single terms
//! are always tried as well.

use crate::error::{Error, Result};

use super::integrand::MinIntegrand;

/// Coordinates with `|b_i|` below this use the `2r` bound for `∫_{−r}^{r} e^{b z} dz`.
const SMALL_RATE: f64 = 1.0;
const HEDGE_ITERS: usize = 2000;

/// Bound on the integral over face `(j, sign)`, in the integrand's shifted units.
pub fn face_bound(f: &MinIntegrand, lo: &[f64], hi: &[f64], j: usize, sign: f64) -> Result<f64> {
    let d = f.dim();
    let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
    let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
    let ln_jac: f64 = half.iter().map(|h| h.ln()).sum();
    let big_l = f.n_terms();

    // Per-term pieces of the affine bound in normalised coordinates.
    let base: Vec<f64> = (0..big_l)
        .map(|l| f.consts[l] - f.shift + f.slopes[l].iter().zip(&mid).map(|(a, m)| a * m).sum::<f64>())
        .collect();
    let rates: Vec<Vec<f64>> = (0..big_l)
        .map(|l| f.slopes[l].iter().zip(&half).map(|(a, h)| a * h).collect())
        .collect();
    let combine = |lam: &[f64]| -> (f64, Vec<f64>) {
        let c: f64 = lam.iter().zip(&base).map(|(w, b)| w * b).sum();
        let b: Vec<f64> = (0..d)
            .map(|i| lam.iter().zip(&rates).map(|(w, r)| w * r[i]).sum())
            .collect();
        (c, b)
    };
    // ln of the face bound for a given combination, or None if it does not decay.
    let ln_bound = |lam: &[f64]| -> Option<f64> {
        let (c, b) = combine(lam);
        let mut rho = sign * b[j];
        let mut ln_pref = c + ln_jac;
        let mut z = 0i32;
        for i in (0..d).filter(|&i| i != j) {
            rho += b[i].abs();
            if b[i].abs() >= SMALL_RATE {
                ln_pref -= b[i].abs().ln();
            } else {
                ln_pref += 2f64.ln();
                z += 1;
            }
        }
        if rho >= -1e-12 {
            return None;
        }
        Some(ln_pref + ln_power_exp_tail(z, -rho))
    };
    // Subgradient of the r = 1 exponent with respect to λ.
    let surrogate = |lam: &[f64]| -> (f64, Vec<f64>) {
        let (c, b) = combine(lam);
        let val = c + sign * b[j] + (0..d).filter(|&i| i != j).map(|i| b[i].abs()).sum::<f64>();
        let grad = (0..big_l)
            .map(|l| {
                base[l]
                    + sign * rates[l][j]
                    + (0..d)
                        .filter(|&i| i != j)
                        .map(|i| b[i].signum() * rates[l][i])
                        .sum::<f64>()
            })
            .collect();
        (val, grad)
    };

    let mut best: Option<f64> = None;
    let mut consider = |lam: &[f64]| {
        if let Some(v) = ln_bound(lam) {
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    };
    for l in 0..big_l {
        let mut lam = vec![0.0; big_l];
        lam[l] = 1.0;
        consider(&lam);
    }
    let mut lam = vec![1.0 / big_l as f64; big_l];
    let mut best_lam = lam.clone();
    let mut best_val = f64::INFINITY;
    for it in 0..HEDGE_ITERS {
        let (val, grad) = surrogate(&lam);
        if val < best_val {
            best_val = val;
            best_lam.clone_from(&lam);
        }
        let g_max = grad.iter().fold(0.0f64, |m, g| m.max(g.abs())).max(1e-300);
        let eta = 2.0 / (g_max * (1.0 + it as f64).sqrt());
        let m = grad.iter().fold(f64::INFINITY, |m, g| m.min(*g));
        let mut total = 0.0;
        for (w, g) in lam.iter_mut().zip(&grad) {
            *w *= (-eta * (g - m)).exp();
            total += *w;
        }
        for w in lam.iter_mut() {
            *w /= total;
        }
    }
    consider(&best_lam);
    consider(&lam);
    best.map(f64::exp).ok_or_else(|| Error::UnboundedTail {
        cell: format!("face {}{}", if sign > 0.0 { '+' } else { '-' }, j),
    })
}

/// Slowest exponential decay rate of the min along any ℓ∞ face direction
/// from the origin: `min_{face} max_λ (−ρ_face(λ))` with unit half-widths.
/// Nonpositive when the integrand does not decay in some direction.
pub fn decay_rate(f: &MinIntegrand) -> f64 {
    let d = f.dim();
    let big_l = f.n_terms();
    let mut worst = f64::INFINITY;
    for j in 0..d {
        for sign in [1.0, -1.0] {
            let rho = |lam: &[f64]| -> (f64, Vec<f64>) {
                let b: Vec<f64> = (0..d)
                    .map(|i| lam.iter().zip(&f.slopes).map(|(w, a)| w * a[i]).sum())
                    .collect();
                let val = sign * b[j] + (0..d).filter(|&i| i != j).map(|i| b[i].abs()).sum::<f64>();
                let grad = (0..big_l)
                    .map(|l| {
                        sign * f.slopes[l][j]
                            + (0..d)
                                .filter(|&i| i != j)
                                .map(|i| b[i].signum() * f.slopes[l][i])
                                .sum::<f64>()
                    })
                    .collect();
                (val, grad)
            };
            let mut best = (0..big_l)
                .map(|l| {
                    let mut lam = vec![0.0; big_l];
                    lam[l] = 1.0;
                    rho(&lam).0
                })
                .fold(f64::INFINITY, f64::min);
            let mut lam = vec![1.0 / big_l as f64; big_l];
            for it in 0..HEDGE_ITERS {
                let (val, grad) = rho(&lam);
                best = best.min(val);
                let g_max = grad.iter().fold(0.0f64, |m, g| m.max(g.abs())).max(1e-300);
                let eta = 2.0 / (g_max * (1.0 + it as f64).sqrt());
                let m = grad.iter().fold(f64::INFINITY, |m, g| m.min(*g));
                let mut total = 0.0;
                for (w, g) in lam.iter_mut().zip(&grad) {
                    *w *= (-eta * (g - m)).exp();
                    total += *w;
                }
                for w in lam.iter_mut() {
                    *w /= total;
                }
            }
            worst = worst.min(-best);
        }
    }
    worst
}

/// Sum of all `2d` face bounds.
pub fn total_bound(f: &MinIntegrand, lo: &[f64], hi: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..f.dim() {
        for sign in [1.0, -1.0] {
            total += face_bound(f, lo, hi, j, sign)?;
        }
    }
    Ok(total)
}

/// `ln ∫_1^∞ r^z e^{−k r} dr` for integer `z ≥ 0` and `k > 0`, via `z!·e^{−k}·Σ_{i≤z} k^{i−z−1}/i!`.
fn ln_power_exp_tail(z: i32, k: f64) -> f64 {
    let mut sum = 0.0;
    let mut fact = 1.0;
    for i in 0..=z {
        if i > 0 {
            fact *= i as f64;
        }
        sum += k.powi(i - z - 1) / fact;
    }
    let z_fact: f64 = (1..=z).map(f64::from).product();
    z_fact.ln() - k + sum.ln()
}
