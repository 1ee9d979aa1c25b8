use maurey_core::integrator::{
    fit_n_exponent, fit_theta_blowup, integrate_min, integrate_region, integrate_regions_log,
    log_factor_check, table2_report, a2_block_normalized,
};
use maurey_core::oracle::{quad_auto, MinIntegrand};
use maurey_core::regions::derive_regions;
use maurey_core::scenario::{build_scenario, build_scenario_ln, ScenarioKind};

#[test]
fn upper_and_lower_blocks_are_symmetric() {
    for (theta, n) in [(0.3, 16), (0.5, 256), (0.8, 1024)] {
        let spec = build_scenario(ScenarioKind::OhToLp, theta, n).unwrap();
        let regions = derive_regions(&spec).unwrap();
        let (lower, upper): (Vec<_>, Vec<_>) = regions.into_iter().partition(|r| r.id.0 <= 4);
        let a = integrate_regions_log(&spec, &lower).unwrap().ln;
        let b = integrate_regions_log(&spec, &upper).unwrap().ln;
        assert!((a - b).abs() < 1e-10, "θ={theta} n={n}: {a} vs {b}");
    }
}

#[test]
fn total_matches_adaptive_quadrature() {
    let spec = build_scenario(ScenarioKind::OhToLp, 0.5, 16).unwrap();
    let exact = integrate_min(&spec).unwrap();
    assert!((exact - 1536.0).abs() < 1e-9 * 1536.0);
    let (_, est) = quad_auto(&MinIntegrand::from_spec(&spec), 1e-3, 1e-8).unwrap();
    assert!((est.value / exact - 1.0).abs() < 1e-3, "{} vs {exact}", est.value);
}

#[test]
fn region_sum_equals_total() {
    let spec = build_scenario(ScenarioKind::OhToLp, 0.4, 64).unwrap();
    let sum: f64 = derive_regions(&spec)
        .unwrap()
        .iter()
        .map(|r| integrate_region(&spec, r).unwrap())
        .sum();
    assert!((sum / integrate_min(&spec).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn total_is_nondecreasing_in_n() {
    for theta in [0.2, 0.5, 0.8] {
        let vals: Vec<f64> = (0..12)
            .map(|k| integrate_min(&build_scenario(ScenarioKind::OhToLp, theta, 1 << k).unwrap()).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }
}

#[test]
fn table_ratios_are_n_free_or_saturate() {
    // Blocks A1 and A3 are exact power laws; A2 and A4 carry lower-order
    // corrections in n, so their ratios converge monotonically to a limit.
    for theta in [0.2, 0.5, 0.8] {
        let rows: Vec<_> = [16.0, 1024.0, 2f64.powi(40), 2f64.powi(200)]
            .iter()
            .map(|&n| table2_report(theta, n).unwrap())
            .collect();
        for k in 0..rows[0].len() {
            let r: Vec<f64> = rows.iter().map(|row| row[k].ratio.unwrap()).collect();
            let label = rows[0][k].label();
            if matches!(rows[0][k].region_id.0, 1 | 3) {
                assert!(r.iter().all(|x| (x / r[0] - 1.0).abs() < 1e-6), "{label} θ={theta}: {r:?}");
            } else {
                assert!(r.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)), "{label} θ={theta}: {r:?}");
                assert!(r[3] / r[0] <= 4.0, "{label} θ={theta}: {r:?}");
            }
        }
    }
}

#[test]
fn a11_ratio_is_one_half_everywhere() {
    for theta in [0.1, 0.5, 0.9] {
        for n in [4.0, 1e3, 1e6] {
            let a11 = &table2_report(theta, n).unwrap()[0];
            assert_eq!(a11.region_id, (1, 1));
            assert!((a11.ratio.unwrap() - 0.5).abs() < 1e-12);
            assert!((a11.sqrt_value.powi(2) / a11.value - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn n_exponents_match_the_predicted_powers() {
    let ns: Vec<f64> = (4..=12).map(|k| 2f64.powi(k)).collect();
    let lp = fit_n_exponent(ScenarioKind::OhToLp, 0.5, &ns).unwrap();
    assert!((lp.exponent - 0.75).abs() < 0.02, "{}", lp.exponent);
    assert!(lp.points.len() == ns.len() && lp.stderr >= 0.0);
    let ln_ns: Vec<f64> = (16..=48).step_by(4).map(|k| k as f64 * 2f64.ln()).collect();
    let ns_big: Vec<f64> = ln_ns.iter().map(|l| l.exp()).collect();
    let cp = fit_n_exponent(ScenarioKind::OhToCp, 0.7, &ns_big).unwrap();
    assert!((cp.exponent - 0.6).abs() < 0.02, "{}", cp.exponent);
}

#[test]
fn theta_blowup_exponents() {
    let ln_n = 1000.0 * 2f64.ln();
    let zero = fit_theta_blowup(ScenarioKind::OhToLp, 256f64.ln(), &[0.02, 0.04, 0.06, 0.08, 0.1]).unwrap();
    assert!((zero.exponent + 1.0).abs() < 0.1, "{}", zero.exponent);
    let one = fit_theta_blowup(ScenarioKind::OhToLp, ln_n, &[0.9, 0.92, 0.94, 0.96, 0.98]).unwrap();
    assert!((one.exponent + 1.5).abs() < 0.1, "{}", one.exponent);
    let half = fit_theta_blowup(ScenarioKind::OhToCp, ln_n, &[0.51, 0.52, 0.53, 0.54, 0.55]).unwrap();
    assert!((half.exponent + 0.5).abs() < 0.1, "{}", half.exponent);
}

#[test]
fn logarithmic_factor_at_the_endpoint() {
    let ns: Vec<f64> = (6..=16).map(|k| 2f64.powi(k)).collect();
    let fit = log_factor_check(&ns).unwrap();
    assert!(fit.exponent > 0.0 && fit.r_squared >= 0.99, "{fit:?}");
    // Interior control: the block over its own power law saturates.
    let at = |k: i32| a2_block_normalized(0.5, k as f64 * 2f64.ln()).unwrap();
    let (a, b, c, d) = (at(6), at(16), at(100), at(200));
    assert!(b / a < 2.0 && (d / c - 1.0).abs() < 1e-6, "{a} {b} {c} {d}");
}

#[test]
fn unit_scale_is_finite() {
    for theta in [0.01, 0.5, 0.99] {
        let v = integrate_min(&build_scenario_ln(ScenarioKind::OhToLp, theta, 0.0).unwrap()).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }
}
