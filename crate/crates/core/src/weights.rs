//! Monomial densities `c · n^e · Π x_i^{a_i}` over products of half-lines.
//!
//! Every density in this crate is taken with respect to the Haar measure
//! `Π dx_i / x_i`.  In logarithmic coordinates `y_i = ln x_i` that measure is
//! Lebesgue measure and a monomial becomes the exponential of an affine map,
//! which is the representation the integrators work with.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive monomial density `coefficient · n^{n_power} · Π x_i^{exponents[i]}`.
///
/// The scale parameter `n` is kept symbolic and bound only at evaluation time,
/// always through `ln n` so that astronomically large scales stay representable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialWeight {
    pub coefficient: f64,
    pub n_power: f64,
    pub exponents: Vec<f64>,
    pub variables: Vec<String>,
}

impl MonomialWeight {
    pub fn new(coefficient: f64, n_power: f64, exponents: Vec<f64>, variables: &[&str]) -> Self {
        assert!(coefficient > 0.0, "monomial coefficient must be positive");
        assert_eq!(exponents.len(), variables.len());
        Self {
            coefficient,
            n_power,
            exponents,
            variables: variables.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// The constant weight 1 over the given variables.
    pub fn one(variables: &[&str]) -> Self {
        Self::new(1.0, 0.0, vec![0.0; variables.len()], variables)
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// Exponent of the named variable, zero if the variable is absent.
    pub fn exponent(&self, name: &str) -> f64 {
        self.variables
            .iter()
            .position(|v| v == name)
            .map_or(0.0, |i| self.exponents[i])
    }

    /// `ln w` at a point given in logarithmic coordinates.
    pub fn ln_eval_log(&self, y: &[f64], ln_n: f64) -> f64 {
        debug_assert_eq!(y.len(), self.dim());
        self.coefficient.ln()
            + self.n_power * ln_n
            + self.exponents.iter().zip(y).map(|(a, x)| a * x).sum::<f64>()
    }

    /// `w(x)` at a point with strictly positive coordinates.
    pub fn eval(&self, x: &[f64], n: f64) -> Result<f64> {
        let y = to_log_point(x)?;
        Ok(self.ln_eval_log(&y, n.ln()).exp())
    }

    /// Constant part `ln c + e · ln n` of the affine exponent.
    pub fn ln_constant(&self, ln_n: f64) -> f64 {
        self.coefficient.ln() + self.n_power * ln_n
    }

    /// Pointwise product of two weights over the same variables.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.variables, other.variables);
        Self {
            coefficient: self.coefficient * other.coefficient,
            n_power: self.n_power + other.n_power,
            exponents: self
                .exponents
                .iter()
                .zip(&other.exponents)
                .map(|(a, b)| a + b)
                .collect(),
            variables: self.variables.clone(),
        }
    }

    /// Pointwise quotient of two weights over the same variables.
    pub fn div(&self, other: &Self) -> Self {
        assert_eq!(self.variables, other.variables);
        Self {
            coefficient: self.coefficient / other.coefficient,
            n_power: self.n_power - other.n_power,
            exponents: self
                .exponents
                .iter()
                .zip(&other.exponents)
                .map(|(a, b)| a - b)
                .collect(),
            variables: self.variables.clone(),
        }
    }

    /// Restriction of the exponent vector to a subset of variable indices.
    pub fn restrict(&self, idx: &[usize], coefficient: f64, n_power: f64) -> Self {
        Self {
            coefficient,
            n_power,
            exponents: idx.iter().map(|&i| self.exponents[i]).collect(),
            variables: idx.iter().map(|&i| self.variables[i].clone()).collect(),
        }
    }

    /// Exact integral of the weight over a box given in logarithmic coordinates,
    /// returned as a natural logarithm.
    pub fn ln_box_mass(&self, lo: &[f64], hi: &[f64], ln_n: f64) -> f64 {
        let mut acc = self.ln_constant(ln_n);
        for ((&a, &l), &h) in self.exponents.iter().zip(lo).zip(hi) {
            acc += ln_exp_integral(a, l, h);
        }
        acc
    }
}

impl std::fmt::Display for MonomialWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if self.coefficient != 1.0 {
            parts.push(format!("{}", self.coefficient));
        }
        if self.n_power != 0.0 {
            parts.push(format!("n^{}", fmt_exp(self.n_power)));
        }
        for (v, &a) in self.variables.iter().zip(&self.exponents) {
            if a != 0.0 {
                parts.push(format!("{}^{}", v, fmt_exp(a)));
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("·"))
        }
    }
}

fn fmt_exp(a: f64) -> String {
    if a.fract() == 0.0 {
        format!("{}", a as i64)
    } else {
        format!("({})", a)
    }
}

/// `ln ∫_lo^hi e^{a y} dy` for finite `lo < hi`, stable for every sign of `a`.
pub fn ln_exp_integral(a: f64, lo: f64, hi: f64) -> f64 {
    let w = hi - lo;
    if a == 0.0 {
        return w.ln();
    }
    // ∫ = e^{a·top} (1 − e^{−|a| w}) / |a| with top the endpoint of larger exponent.
    let top = if a > 0.0 { a * hi } else { a * lo };
    top + (-(-(a.abs()) * w).exp_m1()).ln() - a.abs().ln()
}

/// Converts a strictly positive point to logarithmic coordinates.
pub fn to_log_point(x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 0.0 && value.is_finite() {
                Ok(value.ln())
            } else {
                Err(Error::Domain { index, value })
            }
        })
        .collect()
}
