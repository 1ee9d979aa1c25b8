//! Positive quantities carried as natural logarithms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive real `e^{ln}`; products and sums never overflow.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogValue {
    pub ln: f64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue {
        ln: f64::NEG_INFINITY,
    };

    pub fn from_ln(ln: f64) -> Self {
        Self { ln }
    }

    pub fn from_f64(x: f64) -> Self {
        Self { ln: x.ln() }
    }

    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    pub fn sqrt(self) -> Self {
        Self { ln: 0.5 * self.ln }
    }

    pub fn add(self, o: Self) -> Self {
        if self.ln == f64::NEG_INFINITY {
            return o;
        }
        if o.ln == f64::NEG_INFINITY {
            return self;
        }
        let m = self.ln.max(o.ln);
        Self {
            ln: m + ((self.ln - m).exp() + (o.ln - m).exp()).ln(),
        }
    }

    pub fn mul(self, o: Self) -> Self {
        Self { ln: self.ln + o.ln }
    }

    pub fn div(self, o: Self) -> Self {
        Self { ln: self.ln - o.ln }
    }

    pub fn sum<I: IntoIterator<Item = LogValue>>(it: I) -> Self {
        it.into_iter().fold(Self::ZERO, Self::add)
    }
}

/// `ln Σ_i c_i e^{g_i}` for signed coefficients; the sum must be positive.
pub fn ln_signed_sum(terms: &[(f64, f64)]) -> Result<f64> {
    let m = terms
        .iter()
        .filter(|(c, _)| *c != 0.0)
        .map(|t| t.1)
        .fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let mut pos = 0.0;
    let mut neg = 0.0;
    for &(c, g) in terms {
        let x = c * (g - m).exp();
        if x > 0.0 {
            pos += x;
        } else {
            neg -= x;
        }
    }
    let s = pos - neg;
    if s > 0.0 {
        Ok(m + s.ln())
    } else if s == 0.0 || s.abs() <= 1e-13 * (pos + neg) {
        Ok(f64::NEG_INFINITY)
    } else {
        Err(Error::Data(format!(
            "signed exponential sum is negative ({s:e} relative to scale e^{m})"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_without_overflow() {
        let a = LogValue::from_ln(1000.0);
        let b = LogValue::from_ln(1000.0);
        assert!((a.add(b).ln - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(LogValue::ZERO.add(a), a);
    }

    #[test]
    fn signed_sum_with_cancellation() {
        let v = ln_signed_sum(&[(1.0, 800.0), (-1.0, 799.0)]).unwrap();
        assert!((v - (800.0 + (1.0 - (-1f64).exp()).ln())).abs() < 1e-12);
        assert!(ln_signed_sum(&[(1.0, 0.0), (-2.0, 0.0)]).is_err());
    }
}
