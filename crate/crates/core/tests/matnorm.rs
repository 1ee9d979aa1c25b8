use maurey_core::matnorm::{
    cp_norm, lp_l2_norm, maurey_ratio, oh_norm, op_norm, random_tuple, random_unitary, CMatrix,
    CpConfig, DiagonalCoefficients, MatrixTuple,
};
use maurey_core::orlicz::{convexify, geometric_ladder, p_of_theta, PiecewiseConvexFunction};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn single_matrix_cp_norm_is_operator_norm() {
    let cfg = CpConfig::default();
    let mut r = rng(7);
    for p in [1.25, 1.5, 1.75] {
        for _ in 0..10 {
            let xs = random_tuple(6, 1, &mut r);
            let op = op_norm(&xs.mats()[0]);
            let cp = cp_norm(&xs, p, &cfg).unwrap();
            assert!((cp.value - op).abs() <= 1e-6 * op, "p={p}: {} vs {op}", cp.value);
        }
    }
}

#[test]
fn alternation_trace_is_nondecreasing() {
    let xs = random_tuple(5, 3, &mut rng(3));
    let cp = cp_norm(&xs, 1.4, &CpConfig::default()).unwrap();
    assert!(cp.converged);
    for w in cp.trace.windows(2) {
        assert!(w[1] >= w[0] * (1.0 - 1e-12), "{} then {}", w[0], w[1]);
    }
}

#[test]
fn diagonal_units_and_scalars() {
    for m in [1, 3, 6] {
        let units = (0..m)
            .map(|k| {
                let mut e = CMatrix::zeros(m, m);
                e[(k, k)] = Complex64::new(1.0, 0.0);
                e
            })
            .collect();
        assert_eq!(oh_norm(&MatrixTuple::new(units).unwrap()), 1.0);
    }
}

#[test]
fn norm_axioms_on_random_tuples() {
    let cfg = CpConfig::default();
    let mut r = rng(11);
    for i in 0..20 {
        let m = 2 + i % 4;
        let k = 1 + i % 3;
        let x = random_tuple(m, k, &mut r);
        let y = random_tuple(m, k, &mut r);
        let c = Complex64::new(r.gen::<f64>() * 4.0 - 2.0, r.gen::<f64>() * 4.0 - 2.0);
        let (u, v) = (random_unitary(m, &mut r), random_unitary(m, &mut r));
        let p = 1.1 + 0.8 * r.gen::<f64>();
        let cp = |t: &MatrixTuple| cp_norm(t, p, &cfg).unwrap().value;
        for norm in [&oh_norm as &dyn Fn(&MatrixTuple) -> f64, &cp] {
            let (nx, ny) = (norm(&x), norm(&y));
            assert!(nx > 0.0);
            assert!(norm(&x.scale(Complex64::new(0.0, 0.0))) == 0.0);
            assert!((norm(&x.scale(c)) - c.norm() * nx).abs() <= 1e-9 * c.norm() * nx);
            assert!(norm(&x.add(&y).unwrap()) <= (nx + ny) * (1.0 + 1e-9));
            assert!((norm(&x.transform(&u, &v)) - nx).abs() <= 1e-9 * nx);
        }
    }
}

#[test]
fn cp_norm_rejects_p_outside_open_interval() {
    let xs = random_tuple(2, 1, &mut rng(0));
    assert!(cp_norm(&xs, 1.0, &CpConfig::default()).is_err());
    assert!(cp_norm(&xs, 2.0, &CpConfig::default()).is_err());
}

#[test]
fn lp_l2_norm_of_rows() {
    let a = CMatrix::from_row_slice(2, 2, &[3.0, 4.0, 0.0, 0.0].map(|v| Complex64::new(v, 0.0)));
    let d = DiagonalCoefficients::new(a, 1.5).unwrap();
    assert!((lp_l2_norm(&d) - 5.0).abs() < 1e-12);
}

/// `Ψ(x) = x^p` sampled on a ladder: the Orlicz norm is then the `ℓ_p` norm.
fn power_function(p: f64) -> PiecewiseConvexFunction {
    let mut s = vec![(0.0, 0.0)];
    s.extend(geometric_ladder(-40, 40).into_iter().map(|x| (x, x.powf(p))));
    convexify(&s).unwrap()
}

#[test]
fn ratio_with_exact_power_function_is_constant() {
    let theta = 0.5;
    let f = power_function(p_of_theta(theta));
    let expected = theta * (1.0 - theta).powf(1.5);
    for n in [2, 16, 128] {
        let a = DiagonalCoefficients::identity(n, theta).unwrap();
        let r = maurey_ratio(theta, &a, &f).unwrap();
        // Chords of x^p on a dyadic ladder overestimate by at most a few percent.
        assert!((r / expected - 1.0).abs() < 0.05, "n={n}: {r}");
    }
    let zero = DiagonalCoefficients::new(CMatrix::zeros(3, 3), 1.5).unwrap();
    assert_eq!(maurey_ratio(theta, &zero, &f).unwrap(), 0.0);
}

#[test]
fn cp_norm_lies_between_single_and_hilbert_schmidt_bounds() {
    let cfg = CpConfig::default();
    let mut r = rng(21);
    for _ in 0..20 {
        let xs = random_tuple(4, 3, &mut r);
        let cp = cp_norm(&xs, 1.6, &cfg).unwrap().value;
        let hs = xs.mats().iter().map(|x| x.norm_squared()).sum::<f64>().sqrt();
        for x in xs.mats() {
            assert!(op_norm(x) <= cp * (1.0 + 1e-9));
        }
        assert!(cp <= hs * (1.0 + 1e-12));
    }
}

#[test]
fn ratio_sees_only_row_norms() {
    let theta = 0.3;
    let f = power_function(p_of_theta(theta));
    let mut r = rng(5);
    let g = random_tuple(6, 1, &mut r).mats()[0].clone();
    let a = DiagonalCoefficients::new(g.clone(), p_of_theta(theta)).unwrap();
    let base = maurey_ratio(theta, &a, &f).unwrap();
    // Reverse the rows and rotate each row by its own unitary.
    let mut h = CMatrix::zeros(6, 6);
    for i in 0..6 {
        let u = random_unitary(6, &mut r);
        let row = g.row(5 - i) * &u;
        h.set_row(i, &row);
    }
    let b = DiagonalCoefficients::new(h, p_of_theta(theta)).unwrap();
    assert!((maurey_ratio(theta, &b, &f).unwrap() / base - 1.0).abs() < 1e-9);
    // One nonzero row: the single-coordinate Orlicz norm over the ℓ₂ row norm.
    let mut one = CMatrix::zeros(6, 6);
    one.set_row(2, &g.row(0));
    let d = DiagonalCoefficients::new(one, p_of_theta(theta)).unwrap();
    let norm = g.row(0).norm();
    let want = theta * (1.0 - theta).powf(1.5) / f.inverse(1.0);
    assert!((maurey_ratio(theta, &d, &f).unwrap() / want - 1.0).abs() < 1e-9);
    assert!((lp_l2_norm(&d) - norm).abs() < 1e-12 * norm);
    let scaled = DiagonalCoefficients::new(&d.a * Complex64::new(0.0, -3.0), d.p).unwrap();
    assert!((lp_l2_norm(&scaled) - 3.0 * norm).abs() < 1e-12 * norm);
}
