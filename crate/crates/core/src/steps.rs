//! Step-function discretisation maps between `ℓ²(δ^{αk})` and `L²(t^α)`.
//!
//! Norms use the conventions `‖x‖² = Σ_k |x_k|² δ^{2αk}` and
//! `‖f‖² = ∫ |f(t)|² t^{2α} dt/t`; cells are `[δ^k, δ^{k+1})`, `|k| ≤ K`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepDiscretization {
    pub delta: f64,
    pub alpha: f64,
    /// Truncation half-width `K`; indices run over `−K..=K`.
    pub half_width: usize,
}

/// A function constant on each cell `[δ^k, δ^{k+1})`, `k = −K..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub delta: f64,
    pub k_min: i64,
    pub values: Vec<f64>,
}

impl StepDiscretization {
    pub fn new(delta: f64, alpha: f64, half_width: usize) -> Result<Self> {
        if !(delta > 1.0 && delta <= 2.0) {
            return Err(Error::Parameter {
                name: "delta",
                value: delta,
                valid: "(1, 2]".into(),
            });
        }
        if !(alpha > -1.0 && alpha < 2.0) {
            return Err(Error::Parameter {
                name: "alpha",
                value: alpha,
                valid: "(-1, 2)".into(),
            });
        }
        Ok(Self {
            delta,
            alpha,
            half_width,
        })
    }

    pub fn len(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn k_min(&self) -> i64 {
        -(self.half_width as i64)
    }

    /// `∫_{δ^k}^{δ^{k+1}} t^{2α} dt/t`.
    pub fn cell_mass(&self, k: i64) -> f64 {
        let ld = self.delta.ln();
        let a2 = 2.0 * self.alpha;
        if a2 == 0.0 {
            ld
        } else {
            (a2 * k as f64 * ld).exp() * (a2 * ld).exp_m1() / a2
        }
    }

    /// `δ^{2αk}`, the weight of index `k`.
    pub fn seq_weight(&self, k: i64) -> f64 {
        (2.0 * self.alpha * k as f64 * self.delta.ln()).exp()
    }

    /// `‖Φ_{δ,α}‖ = ((δ^{2α} − 1) / (2α ln δ))^{1/2}`.
    pub fn embed_norm(&self) -> f64 {
        let ld = self.delta.ln();
        let a2 = 2.0 * self.alpha;
        if a2 == 0.0 {
            1.0
        } else {
            ((a2 * ld).exp_m1() / (a2 * ld)).sqrt()
        }
    }

    /// `‖Ψ_{δ,α}‖ = ((1 − δ^{−2α}) / (2α ln δ))^{1/2}`.
    pub fn project_norm(&self) -> f64 {
        let ld = self.delta.ln();
        let a2 = 2.0 * self.alpha;
        if a2 == 0.0 {
            1.0
        } else {
            (-(-a2 * ld).exp_m1() / (a2 * ld)).sqrt()
        }
    }

    pub fn seq_norm(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(i, v)| v * v * self.seq_weight(self.k_min() + i as i64))
            .sum::<f64>()
            .sqrt()
    }

    pub fn fn_norm(&self, f: &StepFunction) -> f64 {
        f.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * v * self.cell_mass(f.k_min + i as i64))
            .sum::<f64>()
            .sqrt()
    }
}

/// `Φ_{δ,α} x = (ln δ)^{−1/2} Σ_k x_k 1_{[δ^k, δ^{k+1})}`.
pub fn step_embed(sd: &StepDiscretization, x: &[f64]) -> Result<StepFunction> {
    if x.len() != sd.len() {
        return Err(Error::Dimension(format!(
            "sequence has length {}, expected {}",
            x.len(),
            sd.len()
        )));
    }
    let scale = sd.delta.ln().sqrt().recip();
    Ok(StepFunction {
        delta: sd.delta,
        k_min: sd.k_min(),
        values: x.iter().map(|v| v * scale).collect(),
    })
}

/// `(Ψ_{δ,α} f)_k = (ln δ)^{−1/2} ∫_{δ^k}^{δ^{k+1}} f dt/t` for step functions.
pub fn step_project(sd: &StepDiscretization, f: &StepFunction) -> Result<Vec<f64>> {
    if f.delta != sd.delta || f.values.len() != sd.len() || f.k_min != sd.k_min() {
        return Err(Error::Dimension(
            "step function is not piecewise constant on the discretisation cells".into(),
        ));
    }
    // Each cell has dt/t-length ln δ.
    let scale = sd.delta.ln().sqrt();
    Ok(f.values.iter().map(|v| v * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_delta() {
        assert!(StepDiscretization::new(1.0, 0.0, 3).is_err());
        assert!(StepDiscretization::new(2.5, 0.0, 3).is_err());
    }

    #[test]
    fn alpha_zero_embedding_is_isometric() {
        let sd = StepDiscretization::new(1.5, 0.0, 4).unwrap();
        assert_eq!(sd.embed_norm(), 1.0);
        let x: Vec<f64> = (0..9).map(|i| (i as f64 - 3.0) * 0.7).collect();
        let f = step_embed(&sd, &x).unwrap();
        assert!((sd.fn_norm(&f) / sd.seq_norm(&x) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn norm_formula_matches_a_single_cell_ratio() {
        let sd = StepDiscretization::new(2.0, 0.8, 2).unwrap();
        let mut x = vec![0.0; 5];
        x[3] = 1.0;
        let f = step_embed(&sd, &x).unwrap();
        // Every basis vector attains the operator norm.
        assert!((sd.fn_norm(&f) / sd.seq_norm(&x) - sd.embed_norm()).abs() < 1e-14);
    }
}
