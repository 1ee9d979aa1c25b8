//! Weighted L2 norms and nuclear (projective) norms of grid fields.

use nalgebra::DMatrix;

/// `√(Σ mass·value²)`.
pub fn l2_norm(values: &[f64], masses: &[f64]) -> f64 {
    values
        .iter()
        .zip(masses)
        .map(|(v, m)| m * v * v)
        .sum::<f64>()
        .sqrt()
}

/// Sum of singular values of `[√row_mass_i · values_ij · √col_mass_j]`,
/// with `values` stored row-major as a `rows × cols` array.
pub fn nuclear_norm(values: &[f64], row_mass: &[f64], col_mass: &[f64]) -> f64 {
    let (r, c) = (row_mass.len(), col_mass.len());
    assert_eq!(values.len(), r * c, "values must be a rows × cols array");
    let m = DMatrix::from_fn(r, c, |i, j| row_mass[i].sqrt() * values[i * c + j] * col_mass[j].sqrt());
    nuclear(&m)
}

/// Matrices whose short side is at most this, and at most a quarter of the
/// long side, are handled through the eigen-decomposition of the small Gram
/// matrix instead of a full SVD.
const GRAM_MAX: usize = 16;

fn use_gram(m: &DMatrix<f64>) -> bool {
    let (short, long) = (m.nrows().min(m.ncols()), m.nrows().max(m.ncols()));
    short <= GRAM_MAX && 4 * short <= long
}

/// Eigen-decomposition of the short-side Gram matrix: `(σ², V)` with
/// `M = U Σ Vᵀ` when `M` is tall (`Vᵀ`-side) and of `Mᵀ` otherwise.
fn gram_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let g = if m.nrows() >= m.ncols() {
        m.transpose() * m
    } else {
        m * m.transpose()
    };
    let e = g.symmetric_eigen();
    (e.eigenvalues.iter().map(|&x| x.max(0.0)).collect(), e.eigenvectors)
}

pub(crate) fn nuclear(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if use_gram(m) {
        return gram_eigen(m).0.iter().map(|x| x.sqrt()).sum();
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Proximal map of `τ‖·‖_*`: soft-thresholds the singular values.
pub(crate) fn singular_value_shrink(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    if use_gram(m) {
        // M V diag(max(0, 1 − τ/σ)) Vᵀ (or its transpose for wide M).
        let (ev, v) = gram_eigen(m);
        let k = v.ncols();
        let mut d = DMatrix::zeros(k, k);
        for (i, &l) in ev.iter().enumerate() {
            let s = l.sqrt();
            if s > tau {
                d[(i, i)] = 1.0 - tau / s;
            }
        }
        let p = &v * d * v.transpose();
        return if m.nrows() >= m.ncols() { m * p } else { p * m };
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors");
    let v_t = svd.v_t.expect("right singular vectors");
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        let s = s - tau;
        if s > 0.0 {
            out += s * u.column(k) * v_t.row(k);
        }
    }
    out
}

/// Proximal map of `τ‖·‖₂`: block soft-thresholding, in place.
pub(crate) fn block_shrink(g: &mut [f64], tau: f64) {
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let k = if norm > tau { 1.0 - tau / norm } else { 0.0 };
    for x in g.iter_mut() {
        *x *= k;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_kernel_factors() {
        let g = [1.0, -2.0, 0.5];
        let h = [3.0, 1.0];
        let rm = [0.5, 2.0, 1.0];
        let cm = [4.0, 0.25];
        let values: Vec<f64> = g.iter().flat_map(|a| h.iter().map(move |b| a * b)).collect();
        let lhs = nuclear_norm(&values, &rm, &cm);
        let rhs = l2_norm(&g, &rm) * l2_norm(&h, &cm);
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn gram_path_matches_full_svd() {
        let m = DMatrix::from_fn(40, 5, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + 0.1 * j as f64);
        let full: f64 = m.clone().svd(false, false).singular_values.iter().sum();
        assert!((nuclear(&m) - full).abs() < 1e-9 * full);
        let tau = 3.0;
        let a = singular_value_shrink(&m, tau);
        let svd = m.clone().svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let mut b = DMatrix::zeros(40, 5);
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > tau {
                b += (s - tau) * u.column(k) * vt.row(k);
            }
        }
        assert!((a - &b).norm() < 1e-9 * b.norm());
        let at = singular_value_shrink(&m.transpose(), tau);
        assert!((at - b.transpose()).norm() < 1e-9 * b.norm());
    }

    #[test]
    fn shrink_of_zero_threshold_is_identity() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, -1.0, 0.0, 4.0]);
        let s = singular_value_shrink(&m, 0.0);
        assert!((s - m).norm() < 1e-12);
    }

    #[test]
    fn block_shrink_reduces_norm_by_threshold() {
        let mut g = [3.0, 4.0];
        block_shrink(&mut g, 1.0);
        assert!((g[0] - 2.4).abs() < 1e-15 && (g[1] - 3.2).abs() < 1e-15);
        block_shrink(&mut g, 10.0);
        assert_eq!(g, [0.0, 0.0]);
    }
}
