//! Independent evaluation of min-integrals: nested adaptive quadrature on a
//! truncated log-coordinate box with certified tail bounds, and an
//! importance-sampling Monte Carlo estimator.

mod integrand;
mod mc;
mod quad;
mod tail;

pub use integrand::{MinIntegrand, Plane, PlaneKind};
pub use mc::{sample_mean, LaplaceMixture, McResult};
pub use quad::{integrate_box, BoxIntegral, QuadConfig};
pub use tail::{decay_rate, face_bound, total_bound};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regions::Region;
use crate::scenario::ScenarioSpec;

/// Default relative tolerance of `quad_box`.
pub const DEFAULT_QUAD_TOL: f64 = 1e-6;
/// Default ratio of tail bound to interior estimate when sizing a box.
pub const DEFAULT_TAIL_RATIO: f64 = 1e-8;

/// Axis-aligned box in log coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl LogBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::Dimension(format!(
                "box bounds have lengths {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a < b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::Parameter {
                    name: "box",
                    value: b - a,
                    valid: "finite bounds with lo < hi".into(),
                });
            }
        }
        Ok(Self { lo, hi })
    }

    /// `[−h, h]^d`.
    pub fn symmetric(dim: usize, half_width: f64) -> Result<Self> {
        Self::new(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains_origin(&self) -> bool {
        self.lo.iter().zip(&self.hi).all(|(a, b)| *a < 0.0 && *b > 0.0)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    /// The box scaled about its centre by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let (lo, hi) = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| {
                let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
                (m - k * h, m + k * h)
            })
            .unzip();
        Self { lo, hi }
    }
}

/// An oracle estimate of a min-integral.
///
/// For quadrature, `value` is the box integral and the true full-space
/// integral lies in `[value − quadrature_error, value + quadrature_error +
/// tail_bound]`.  For Monte Carlo, `quadrature_error` is the 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub value: f64,
    pub quadrature_error: f64,
    pub tail_bound: f64,
    pub evaluations: u64,
    /// Set when the evaluation budget was exhausted before the tolerance was met.
    pub flagged: bool,
}

impl OracleEstimate {
    pub fn interval(&self) -> (f64, f64) {
        (
            self.value - self.quadrature_error,
            self.value + self.quadrature_error + self.tail_bound,
        )
    }

    pub fn covers(&self, x: f64) -> bool {
        let (a, b) = self.interval();
        a <= x && x <= b
    }
}

fn check_box(spec: &ScenarioSpec, b: &LogBox) -> Result<()> {
    if b.dim() != spec.dim() {
        return Err(Error::Dimension(format!(
            "box has {} coordinates, scenario has {}",
            b.dim(),
            spec.dim()
        )));
    }
    Ok(())
}

/// Shift making the integrand's maximum over the box about 1.
fn peak_shift(f: &MinIntegrand, b: &LogBox) -> f64 {
    let bound = b.lo.iter().chain(&b.hi).fold(0.0f64, |m, x| m.max(x.abs()));
    let y = f.ascend(None, bound, 2000);
    let g = f.envelope(&y).0;
    if g.is_finite() {
        g
    } else {
        0.0
    }
}

/// Rigorous upper bound on `∫ min_l w_l` over the complement of the box.
pub fn tail_bound(spec: &ScenarioSpec, b: &LogBox) -> Result<f64> {
    check_box(spec, b)?;
    let f = MinIntegrand::from_spec(spec);
    let shift = peak_shift(&f, b);
    let f = f.with_shift(shift);
    Ok(total_bound(&f, &b.lo, &b.hi)? * shift.exp())
}

/// Quadrature of an arbitrary (unshifted) min integrand over a box; the tail
/// bound always refers to the unrestricted min, which dominates any
/// restriction, and is infinite when the min does not decay.
pub fn quad_integrand(f: &MinIntegrand, b: &LogBox, tol: f64) -> Result<OracleEstimate> {
    if !(tol > 0.0) {
        return Err(Error::Parameter {
            name: "tol",
            value: tol,
            valid: "tol > 0".into(),
        });
    }
    let shift = peak_shift(f, b);
    let f = f.clone().with_shift(shift);
    let cfg = QuadConfig {
        rel_tol: tol,
        abs_tol: tol * 1e-4,
        max_panels: 64,
    };
    let r = integrate_box(&f, &b.lo, &b.hi, cfg);
    let mut whole = f.clone();
    whole.restriction = None;
    // A non-decaying integrand still has a box integral; its tail is unbounded.
    let tail = match total_bound(&whole, &b.lo, &b.hi) {
        Ok(t) => t,
        Err(Error::UnboundedTail { .. }) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let scale = shift.exp();
    Ok(OracleEstimate {
        value: r.value * scale,
        quadrature_error: r.error * scale,
        tail_bound: tail * scale,
        evaluations: r.evaluations,
        flagged: r.exhausted,
    })
}

/// Nested adaptive quadrature of the scenario's min integrand over the box.
pub fn quad_box(spec: &ScenarioSpec, b: &LogBox, tol: f64) -> Result<OracleEstimate> {
    check_box(spec, b)?;
    quad_integrand(&MinIntegrand::from_spec(spec), b, tol)
}

/// Quadrature of the min integrand restricted to one derived region.
pub fn quad_region(spec: &ScenarioSpec, region: &Region, b: &LogBox, tol: f64) -> Result<OracleEstimate> {
    check_box(spec, b)?;
    let f = MinIntegrand::from_spec(spec).restricted_to_region(region, spec.ln_n);
    quad_integrand(&f, b, tol)
}

/// Box whose tail bound is at most `ratio · reference`, grown face by face
/// from `[−10, 10]^d` by doubling the extent of the face with the largest
/// bound.
pub fn box_for_tail(spec: &ScenarioSpec, reference: f64, ratio: f64) -> Result<LogBox> {
    let f = MinIntegrand::from_spec(spec);
    box_for_integrand_tail(&f, reference, ratio)
}

/// [`box_for_tail`] for an arbitrary (unshifted) min integrand; the tail of
/// the unrestricted min is used.
pub fn box_for_integrand_tail(f: &MinIntegrand, reference: f64, ratio: f64) -> Result<LogBox> {
    const START: f64 = 10.0;
    const MAX_EXTENT: f64 = 1e4;
    let d = f.dim();
    let mut whole = f.clone();
    whole.restriction = None;
    let probe = LogBox::symmetric(d, 4.0 * START)?;
    let shift = peak_shift(&whole, &probe);
    let whole = whole.with_shift(shift);
    let target = ratio * reference * (-shift).exp();
    let mut lo = vec![-START; d];
    let mut hi = vec![START; d];
    loop {
        let mut faces = Vec::with_capacity(2 * d);
        for j in 0..d {
            for sign in [1.0, -1.0] {
                let b = face_bound(&whole, &lo, &hi, j, sign).unwrap_or(f64::INFINITY);
                faces.push((b, j, sign));
            }
        }
        let total: f64 = faces.iter().map(|x| x.0).sum();
        if total <= target {
            return LogBox::new(lo, hi);
        }
        let &(_, j, sign) = faces
            .iter()
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal))
            .expect("at least one face");
        if sign > 0.0 {
            hi[j] *= 2.0;
        } else {
            lo[j] *= 2.0;
        }
        if hi[j] > MAX_EXTENT || -lo[j] > MAX_EXTENT {
            return Err(Error::UnboundedTail {
                cell: format!(
                    "face {}{j}: extent {MAX_EXTENT} does not reach tail ratio {ratio}",
                    if sign > 0.0 { '+' } else { '-' }
                ),
            });
        }
    }
}

/// Quadrature with the box chosen automatically: a coarse pass on
/// `[−20, 20]^d` gives a reference value, then the box is grown until the
/// tail bound is at most `tail_ratio` times that reference.
pub fn quad_auto(f: &MinIntegrand, tol: f64, tail_ratio: f64) -> Result<(LogBox, OracleEstimate)> {
    let coarse = quad_integrand(f, &LogBox::symmetric(f.dim(), 20.0)?, 1e-3)?;
    let b = box_for_integrand_tail(f, coarse.value, tail_ratio)?;
    let est = quad_integrand(f, &b, tol)?;
    Ok((b, est))
}

/// Importance-sampling estimate of the full-space min-integral.
pub fn mc_estimate(spec: &ScenarioSpec, seed: u64, samples: usize) -> Result<OracleEstimate> {
    if samples < 1000 {
        return Err(Error::Parameter {
            name: "samples",
            value: samples as f64,
            valid: "at least 1000".into(),
        });
    }
    mc_integrand(&MinIntegrand::from_spec(spec), seed, samples)
}

/// Importance-sampling estimate for an arbitrary min integrand.
pub fn mc_integrand(f: &MinIntegrand, seed: u64, samples: usize) -> Result<OracleEstimate> {
    let bound = 60.0;
    let probe = LogBox::symmetric(f.dim(), bound)?;
    let shift = peak_shift(f, &probe);
    let f = f.clone().with_shift(shift);
    let q = LaplaceMixture::for_integrand(&f, bound);
    let r = sample_mean(&f, &q, seed, samples);
    let scale = shift.exp();
    Ok(OracleEstimate {
        value: r.mean * scale,
        quadrature_error: r.half_width * scale,
        tail_bound: 0.0,
        evaluations: samples as u64,
        flagged: false,
    })
}
