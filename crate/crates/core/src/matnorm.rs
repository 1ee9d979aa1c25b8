//! Finite-dimensional operator-space norms: the OH matrix norm, the
//! `M_m(C_p)` norm by alternating maximisation, the `ℓ_p(ℓ₂)` norm of
//! diagonal coefficient arrays, and the end-to-end ratio check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::orlicz::{orlicz_norm, p_of_theta, PiecewiseConvexFunction};

pub type CMatrix = DMatrix<Complex64>;

/// A tuple `(x_k)_{k ≤ K}` of `m × m` complex matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixTuple {
    mats: Vec<CMatrix>,
}

impl MatrixTuple {
    pub fn new(mats: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = mats.first() else {
            return Err(Error::Dimension("a matrix tuple needs at least one matrix".into()));
        };
        let m = first.nrows();
        if let Some(bad) = mats.iter().find(|x| x.nrows() != m || x.ncols() != m) {
            return Err(Error::Dimension(format!(
                "expected {m}×{m} matrices, found {}×{}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        Ok(Self { mats })
    }

    /// Scalars `c_k` as `1 × 1` matrices.
    pub fn from_scalars(c: &[Complex64]) -> Result<Self> {
        Self::new(c.iter().map(|&z| CMatrix::from_element(1, 1, z)).collect())
    }

    pub fn m(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            mats: self.mats.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() || self.m() != other.m() {
            return Err(Error::Dimension("tuples differ in shape".into()));
        }
        Ok(Self {
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a + b).collect(),
        })
    }

    /// `(U x_k V)_k`.
    pub fn transform(&self, u: &CMatrix, v: &CMatrix) -> Self {
        Self {
            mats: self.mats.iter().map(|x| u * x * v).collect(),
        }
    }
}

/// `K` random `m × m` matrices with i.i.d. standard complex Gaussian entries.
pub fn random_tuple(m: usize, k: usize, rng: &mut ChaCha8Rng) -> MatrixTuple {
    let normal = StandardNormal;
    let mats = (0..k)
        .map(|_| {
            CMatrix::from_fn(m, m, |_, _| {
                let re: f64 = normal.sample(rng);
                let im: f64 = normal.sample(rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
        })
        .collect();
    MatrixTuple { mats }
}

/// A Haar-random `m × m` unitary (QR of a Gaussian matrix with phase fix).
pub fn random_unitary(m: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = random_tuple(m, 1, rng).mats.remove(0);
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Largest singular value.
pub fn op_norm(x: &CMatrix) -> f64 {
    x.singular_values().iter().fold(0.0f64, |m, &s| m.max(s))
}

/// `‖Σ_k x_k ⊗ conj(x_k)‖^{1/2}`.
pub fn oh_norm(xs: &MatrixTuple) -> f64 {
    let m = xs.m();
    let mut sum = CMatrix::zeros(m * m, m * m);
    for x in xs.mats() {
        sum += x.kronecker(&x.map(|z| z.conj()));
    }
    op_norm(&sum).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpConfig {
    pub restarts: usize,
    pub max_alternations: usize,
    /// Relative objective change below which a restart stops.
    pub tol: f64,
    pub seed: u64,
}

impl Default for CpConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_alternations: 5000,
            tol: 1e-13,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpResult {
    /// Best objective over all restarts (a lower bound on the supremum).
    pub value: f64,
    /// Whether the best restart met the tolerance.
    pub converged: bool,
    /// Objective after every half-step of the best restart.
    pub trace: Vec<f64>,
}

/// `f(H)` for Hermitian positive semidefinite `H` through its eigenbasis.
fn hermitian_fn(h: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let h = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let e = h.symmetric_eigen();
    let d = DVector::from_iterator(
        e.eigenvalues.len(),
        e.eigenvalues.iter().map(|&l| Complex64::new(f(l.max(0.0)), 0.0)),
    );
    &e.eigenvectors * CMatrix::from_diagonal(&d) * e.eigenvectors.adjoint()
}

/// Schatten-`q` norm of a Hermitian PSD matrix.
fn schatten_psd(h: &CMatrix, q: f64) -> f64 {
    let h = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).powf(q))
        .sum::<f64>()
        .powf(1.0 / q)
}

/// Maximiser `P = H^{q−1}/‖H‖_q^{q−1}` of `tr(P H)` over `‖P‖_{q'} ≤ 1`, as a matrix
/// with `P = c²` for the returned `c > 0`.
fn dual_square_root(h: &CMatrix, q: f64) -> CMatrix {
    let norm = schatten_psd(h, q);
    if norm == 0.0 {
        return CMatrix::zeros(h.nrows(), h.ncols());
    }
    hermitian_fn(h, |l| ((l / norm).powf(q - 1.0)).sqrt())
}

fn random_pd(m: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(m, m, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    &g * g.adjoint() + CMatrix::identity(m, m) * Complex64::new(1e-3, 0.0)
}

fn alternate(xs: &MatrixTuple, p: f64, b0: CMatrix, cfg: &CpConfig) -> (f64, bool, Vec<f64>) {
    let pp = p / (p - 1.0);
    let m = xs.m();
    // Normalise b so that ‖b‖_{2p'} = 1.
    let b2 = &b0 * &b0;
    let scale = schatten_psd(&b2, pp).sqrt();
    let mut b = b0 * Complex64::new(1.0 / scale, 0.0);
    let mut trace = Vec::new();
    let mut prev = 0.0;
    for _ in 0..cfg.max_alternations {
        // a-step: maximise tr(a² M) with M = Σ x b² x*, ‖a²‖_p ≤ 1 ⇒ value ‖M‖_{p'}.
        let b2 = &b * &b;
        let mut mm = CMatrix::zeros(m, m);
        for x in xs.mats() {
            mm += x * &b2 * x.adjoint();
        }
        let a = dual_square_root(&mm, pp);
        trace.push(schatten_psd(&mm, pp).sqrt());
        // b-step: maximise tr(b² N) with N = Σ x* a² x, ‖b²‖_{p'} ≤ 1 ⇒ value ‖N‖_p.
        let a2 = &a * &a;
        let mut nn = CMatrix::zeros(m, m);
        for x in xs.mats() {
            nn += x.adjoint() * &a2 * x;
        }
        b = dual_square_root(&nn, p);
        let val = schatten_psd(&nn, p).sqrt();
        trace.push(val);
        if (val - prev).abs() <= cfg.tol * val {
            return (val, true, trace);
        }
        prev = val;
    }
    (prev, false, trace)
}

/// `sup{(Σ_k ‖a x_k b‖₂²)^{1/2} : a, b > 0, ‖a‖_{S_{2p}} ≤ 1, ‖b‖_{S_{2p'}} ≤ 1}`
/// by alternating exact partial maximisation from seeded random starts.
pub fn cp_norm(xs: &MatrixTuple, p: f64, cfg: &CpConfig) -> Result<CpResult> {
    check_range("p", p, 1.0, 2.0, "(1, 2)")?;
    if cfg.restarts == 0 {
        return Err(Error::Parameter {
            name: "restarts",
            value: 0.0,
            valid: "at least 1".into(),
        });
    }
    let runs: Vec<(f64, bool, Vec<f64>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64);
            let b0 = if r == 0 {
                CMatrix::identity(xs.m(), xs.m())
            } else {
                random_pd(xs.m(), &mut rng)
            };
            alternate(xs, p, b0, cfg)
        })
        .collect();
    // Fixed-order reduction: first best wins.
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.0 > runs[best].0 {
            best = i;
        }
    }
    let (value, converged, trace) = runs[best].clone();
    Ok(CpResult {
        value,
        converged,
        trace,
    })
}

/// Diagonal coefficients `a = (a_{ij})` with rows `a_i ∈ ℓ₂ⁿ`, paired with `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalCoefficients {
    pub a: CMatrix,
    pub p: f64,
}

impl DiagonalCoefficients {
    pub fn new(a: CMatrix, p: f64) -> Result<Self> {
        check_range("p", p, 1.0, 2.0, "(1, 2)")?;
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Data("coefficients must be finite".into()));
        }
        Ok(Self { a, p })
    }

    /// `n × n` identity with `p = 2/(2 − θ)`.
    pub fn identity(n: usize, theta: f64) -> Result<Self> {
        Self::new(CMatrix::identity(n, n), p_of_theta(theta))
    }

    pub fn row_norms(&self) -> Vec<f64> {
        self.a.row_iter().map(|r| r.norm()).collect()
    }
}

/// `(Σ_i ‖a_i‖₂^p)^{1/p}`.
pub fn lp_l2_norm(a: &DiagonalCoefficients) -> f64 {
    a.row_norms()
        .iter()
        .map(|r| r.powf(a.p))
        .sum::<f64>()
        .powf(1.0 / a.p)
}

/// `θ(1−θ)·‖(‖a_i‖₂)_i‖_F / ((1−θ)^{−1/2}·‖a‖_{ℓ_p(ℓ₂)})`, or 0 for `a = 0`.
pub fn maurey_ratio(theta: f64, a: &DiagonalCoefficients, f: &PiecewiseConvexFunction) -> Result<f64> {
    check_range("theta", theta, 0.0, 1.0, "(0, 1)")?;
    let denom = (1.0 - theta).powf(-0.5) * lp_l2_norm(a);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(theta * (1.0 - theta) * orlicz_norm(f, &a.row_norms()) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn scalar_tuples_reduce_to_l2() {
        let z = [Complex64::new(1.0, 2.0), c(-3.0), Complex64::new(0.0, 0.5)];
        let l2 = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        let xs = MatrixTuple::from_scalars(&z).unwrap();
        assert!((oh_norm(&xs) - l2).abs() < 1e-12);
        let cp = cp_norm(&xs, 1.5, &CpConfig::default()).unwrap();
        assert!((cp.value - l2).abs() < 1e-10);
    }

    #[test]
    fn diagonal_units_have_unit_oh_norm() {
        let m = 4;
        let units = (0..m)
            .map(|k| {
                let mut e = CMatrix::zeros(m, m);
                e[(k, k)] = c(1.0);
                e
            })
            .collect();
        assert_eq!(oh_norm(&MatrixTuple::new(units).unwrap()), 1.0);
    }

    #[test]
    fn identity_lp_norm() {
        let a = DiagonalCoefficients::identity(16, 0.5).unwrap();
        assert!((lp_l2_norm(&a) - 16f64.powf(1.0 / a.p)).abs() < 1e-12);
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let r = MatrixTuple::new(vec![CMatrix::zeros(2, 2), CMatrix::zeros(3, 3)]);
        assert!(matches!(r, Err(Error::Dimension(_))));
    }
}
