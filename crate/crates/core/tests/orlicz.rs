use maurey_core::orlicz::{
    convexify, geometric_ladder, lp_inclusion_ratio, orlicz_norm, p_of_theta, sandwich_violations,
    unit_vector_norm, PiecewiseConvexFunction, PsiCache, PsiConfig,
};
use maurey_core::sumsolve::SolverConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coarse(theta: f64) -> Vec<(f64, f64)> {
    let cfg = PsiConfig {
        resolution: 4,
        half_width: 6.0,
        ladder: geometric_ladder(-6, 6),
        solver: SolverConfig::default(),
    };
    PsiCache::new(theta, cfg).unwrap().samples().unwrap()
}

#[test]
fn psi_is_nondecreasing_and_sandwiches_its_envelope() {
    for theta in [0.3, 0.7] {
        let s = coarse(theta);
        assert_eq!(s[0], (0.0, 0.0));
        assert!(s.windows(2).all(|w| w[1].1 >= w[0].1 && w[1].0 > w[0].0));
        // Ψ(x)/x is nondecreasing and Ψ grows without bound.
        assert!(s[1..].windows(2).all(|w| w[1].1 / w[1].0 >= w[0].1 / w[0].0 * (1.0 - 1e-6)));
        assert!(s.last().unwrap().1 > 30.0 * s[s.len() / 2].1);
        let f = convexify(&s).unwrap();
        assert!(f.is_valid());
        assert!(sandwich_violations(&s, &f).is_empty());
        // Between the linear and the quadratic regime.
        let (x, y) = (s[3], s[s.len() - 1]);
        let exponent = (y.1 / x.1).ln() / (y.0 / x.0).ln();
        assert!((1.0..=2.0).contains(&exponent), "{exponent}");
    }
}

#[test]
fn cache_returns_identical_values() {
    let cfg = PsiConfig {
        resolution: 3,
        half_width: 4.0,
        ladder: geometric_ladder(-3, 3),
        solver: SolverConfig::default(),
    };
    let mut c = PsiCache::new(0.5, cfg).unwrap();
    let a = c.samples().unwrap();
    let b = c.samples().unwrap();
    assert_eq!(a, b);
    assert_eq!(c.eval(0.25).unwrap(), a.iter().find(|s| s.0 == 0.25).unwrap().1);
}

fn power(p: f64) -> PiecewiseConvexFunction {
    let mut s = vec![(0.0, 0.0)];
    s.extend(geometric_ladder(-60, 60).into_iter().map(|x| (x, x.powf(p))));
    convexify(&s).unwrap()
}

#[test]
fn orlicz_norm_axioms() {
    let f = convexify(&coarse(0.5)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let len = rng.gen_range(1..12);
        let a: Vec<f64> = (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..len).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let c = rng.gen_range(-5.0..5.0);
        let na = orlicz_norm(&f, &a);
        let nb = orlicz_norm(&f, &b);
        let ca: Vec<f64> = a.iter().map(|x| c * x).collect();
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        assert!((orlicz_norm(&f, &ca) - c.abs() * na).abs() <= 1e-8 * c.abs() * na);
        assert!(orlicz_norm(&f, &sum) <= (na + nb) * (1.0 + 1e-9));
        let dominated: Vec<f64> = a.iter().map(|x| x * rng.gen_range(0.0..1.0)).collect();
        assert!(orlicz_norm(&f, &dominated) <= na * (1.0 + 1e-9));
    }
    assert_eq!(orlicz_norm(&f, &[0.0; 4]), 0.0);
}

#[test]
fn power_function_gives_lp_norms() {
    let p = p_of_theta(0.5);
    let f = power(p);
    let a = [0.3, -1.2, 2.0, 0.0, 0.7];
    let lp = a.iter().map(|x: &f64| x.abs().powf(p)).sum::<f64>().powf(1.0 / p);
    // Dyadic chords of x^p overestimate it by at most a few percent.
    assert!((orlicz_norm(&f, &a) / lp - 1.0).abs() < 0.05);
    let ns: Vec<usize> = (1..=8).map(|k| 1 << k).collect();
    let fit = lp_inclusion_ratio(0.5, &f, &ns).unwrap();
    assert!(fit.exponent.abs() < 0.01, "{}", fit.exponent);
    assert!((unit_vector_norm(&f, 1) * f.inverse(1.0) - 1.0).abs() < 1e-12);
}

#[test]
fn tables_round_trip() {
    let f = power(1.5);
    let g = PiecewiseConvexFunction::from_table(&f.to_table()).unwrap();
    assert_eq!(f, g);
    assert!(PiecewiseConvexFunction::from_table(&[(0.0, 0.0), (1.0, 2.0), (2.0, 2.5)]).is_err());
}
