//! Unweighted least-squares line fits, used for log-log exponent estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of finite points accepted by a fit.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub r_squared: f64,
}

/// Fits `y ≈ slope · x + intercept`, ignoring non-finite points.
pub fn line_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::Fit {
            needed: MIN_FIT_POINTS,
            got: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Data("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let stderr = (ssr / (m - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        stderr,
        r_squared,
    })
}

/// A fitted scaling exponent together with the data it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub exponent: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(parameter, measured value)` pairs in the fitted coordinates.
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    pub fn from_points(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let f = line_fit(&xs, &ys)?;
        Ok(Self {
            exponent: f.slope,
            stderr: f.stderr,
            intercept: f.intercept,
            r_squared: f.r_squared,
            points: xs.into_iter().zip(ys).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_is_recovered() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.75 * x - 2.0).collect();
        let f = line_fit(&xs, &ys).unwrap();
        assert!((f.slope - 0.75).abs() < 1e-14);
        assert!((f.intercept + 2.0).abs() < 1e-13);
        assert!(f.stderr < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let err = line_fit(&[1.0, 2.0, f64::NAN, 4.0], &[1.0, 2.0, 3.0, 4.0]).unwrap_err();
        assert_eq!(err, Error::Fit { needed: 4, got: 3 });
    }

    #[test]
    fn stderr_matches_textbook_value() {
        // Noisy line; the slope standard error is √(SSR/(m−2)/Sxx).
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 0.0, 3.0, 2.0];
        let f = line_fit(&xs, &ys).unwrap();
        // Independent computation: slope = Sxy/Sxx = 3/5, residuals follow.
        assert!((f.slope - 0.6).abs() < 1e-14);
        let res: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - f.intercept - 0.6 * x).powi(2))
            .sum();
        assert!((f.stderr - (res / 2.0 / 5.0).sqrt()).abs() < 1e-14);
    }
}
