//! The `(2, θ)` K-method norm for a couple of weighted ℓ² spaces.
//!
//! For `H_j = ℓ²(w_j)` the K-functional has the pointwise parallel-sum form
//! `K(t,x)² = Σ_i |x_i|² a_i b_i t² / (a_i + b_i t²)` with `a = w0²`, `b = w1²`.
//! Substituting `t² = (a/b) τ` turns each index into the Beta integral
//! `∫_0^∞ τ^{−θ}/(1+τ) dτ = π / sin(πθ)`, so
//! `‖x‖² = π/(2 sin πθ) · Σ_i |x_i|² a_i^{1−θ} b_i^θ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoWeightInterpolation {
    pub w0: Vec<f64>,
    pub w1: Vec<f64>,
    pub theta: f64,
}

impl TwoWeightInterpolation {
    pub fn new(w0: Vec<f64>, w1: Vec<f64>, theta: f64) -> Result<Self> {
        check_range("theta", theta, 0.0, 1.0, "(0, 1)")?;
        if w0.len() != w1.len() {
            return Err(Error::Dimension(format!(
                "weights have lengths {} and {}",
                w0.len(),
                w1.len()
            )));
        }
        if let Some(w) = w0.iter().chain(&w1).find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Data(format!("weight {w} is not strictly positive")));
        }
        Ok(Self { w0, w1, theta })
    }

    pub fn len(&self) -> usize {
        self.w0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w0.is_empty()
    }
}

/// `C(θ)² = ∫_0^∞ t^{−2θ} · t²/(1+t²) dt/t = π / (2 sin πθ)`.
pub fn kfunc_constant_sq(theta: f64) -> f64 {
    std::f64::consts::PI / (2.0 * (std::f64::consts::PI * theta).sin())
}

/// `‖x‖_{(H₀,H₁)_{θ,2;K}}` with `K` the parallel-sum K-functional.
pub fn kfunc_norm(ti: &TwoWeightInterpolation, x: &[Complex64]) -> Result<f64> {
    if x.len() != ti.len() {
        return Err(Error::Dimension(format!(
            "sequence has length {}, weights have length {}",
            x.len(),
            ti.len()
        )));
    }
    let th = ti.theta;
    let s: f64 = x
        .iter()
        .zip(ti.w0.iter().zip(&ti.w1))
        .map(|(xi, (a, b))| xi.norm_sqr() * (a * a).powf(1.0 - th) * (b * b).powf(th))
        .sum();
    Ok((kfunc_constant_sq(th) * s).sqrt())
}

/// `K(t, x)` itself, for checks against the closed form.
pub fn kfunctional(ti: &TwoWeightInterpolation, x: &[Complex64], t: f64) -> f64 {
    x.iter()
        .zip(ti.w0.iter().zip(&ti.w1))
        .map(|(xi, (w0, w1))| {
            let (a, b) = (w0 * w0, w1 * w1);
            xi.norm_sqr() * a * b * t * t / (a + b * t * t)
        })
        .sum::<f64>()
        .sqrt()
}
