//! Named sum-space scenarios: ordered lists of weighted L2 and projective terms.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};
use crate::weights::{to_log_point, MonomialWeight};

/// The scenarios the toolkit knows how to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Eight terms over `(s,t,u,v)`: two weighted L2 terms and six projective pairs.
    OhToLp,
    /// The same eight densities, every term taken as a plain weighted L2 space.
    OhToLpRelaxed,
    /// Four terms over `(t,s)`.
    OhToCp,
    /// A user-assembled scenario (toy problems, tests).
    Custom,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::OhToLp => "oh_to_lp",
            ScenarioKind::OhToLpRelaxed => "oh_to_lp_relaxed",
            ScenarioKind::OhToCp => "oh_to_cp",
            ScenarioKind::Custom => "custom",
        }
    }

    /// Open interval of admissible `theta`.
    pub fn theta_range(self) -> (f64, f64) {
        match self {
            ScenarioKind::OhToCp => (0.5, 1.0),
            _ => (0.0, 1.0),
        }
    }

    /// Exponent `e` in the expected growth `√I ~ n^e` of the min-integral.
    pub fn n_exponent(self, theta: f64) -> f64 {
        match self {
            // (p+2)/(4p) with p = 1/θ.
            ScenarioKind::OhToCp => 0.25 + 0.5 * theta,
            // 1/p with p = 2/(2−θ).
            _ => 1.0 - 0.5 * theta,
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "oh_to_lp" => Ok(ScenarioKind::OhToLp),
            "oh_to_lp_relaxed" => Ok(ScenarioKind::OhToLpRelaxed),
            "oh_to_cp" => Ok(ScenarioKind::OhToCp),
            other => Err(Error::Data(format!("unknown scenario kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermKind {
    /// `‖f‖_{L2(w)}`.
    L2,
    /// `‖f‖_{L2(w₁) ⊗_π L2(w₂)}` over a split of the variables into two groups.
    Proj,
}

/// One summand of a sum-space.
///
/// For projective terms both factor weights are stored over the full variable
/// list; each is constant in the variables outside its own group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub kind: TermKind,
    pub weights: Vec<MonomialWeight>,
    pub groups: Option<(Vec<usize>, Vec<usize>)>,
}

impl Term {
    pub fn l2(weight: MonomialWeight) -> Self {
        Self {
            kind: TermKind::L2,
            weights: vec![weight],
            groups: None,
        }
    }

    pub fn proj(w1: MonomialWeight, w2: MonomialWeight, g1: Vec<usize>, g2: Vec<usize>) -> Self {
        for (w, other) in [(&w1, &g2), (&w2, &g1)] {
            assert!(
                other.iter().all(|&i| w.exponents[i] == 0.0),
                "projective factor depends on a variable outside its group"
            );
        }
        Self {
            kind: TermKind::Proj,
            weights: vec![w1, w2],
            groups: Some((g1, g2)),
        }
    }

    /// The product density (for L2 terms, the weight itself).
    pub fn density(&self) -> MonomialWeight {
        let mut d = self.weights[0].clone();
        for w in &self.weights[1..] {
            d = d.mul(w);
        }
        d
    }
}

/// A sum-space `Σ_l X_l` evaluated at fixed `(θ, n)`.
///
/// `n` is stored as `ln n`, so scales far beyond the floating-point range
/// (e.g. `n = 2^4000`) remain usable by the log-domain integrators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub theta: f64,
    pub ln_n: f64,
    pub variables: Vec<String>,
    pub terms: Vec<Term>,
    /// Common factor divided out of every density to obtain the reduced terms.
    pub common: MonomialWeight,
}

const LP_VARS: [&str; 4] = ["s", "t", "u", "v"];
const CP_VARS: [&str; 2] = ["t", "s"];

/// Builds a named scenario for an integer scale `n ≥ 1`.
pub fn build_scenario(kind: ScenarioKind, theta: f64, n: u64) -> Result<ScenarioSpec> {
    if n == 0 {
        return Err(Error::Parameter {
            name: "n",
            value: 0.0,
            valid: "n ≥ 1".into(),
        });
    }
    build_scenario_ln(kind, theta, (n as f64).ln())
}

/// Builds a named scenario for a scale given as `ln n ≥ 0`.
pub fn build_scenario_ln(kind: ScenarioKind, theta: f64, ln_n: f64) -> Result<ScenarioSpec> {
    if !(ln_n >= 0.0 && ln_n.is_finite()) {
        return Err(Error::Parameter {
            name: "ln n",
            value: ln_n,
            valid: "[0, ∞)".into(),
        });
    }
    let (lo, hi) = kind.theta_range();
    check_range("theta", theta, lo, hi, &format!("({lo}, {hi})"))?;
    let spec = match kind {
        ScenarioKind::OhToLp => oh_to_lp(theta, ln_n, false),
        ScenarioKind::OhToLpRelaxed => oh_to_lp(theta, ln_n, true),
        ScenarioKind::OhToCp => oh_to_cp(theta, ln_n),
        ScenarioKind::Custom => {
            return Err(Error::Data(
                "custom scenarios are assembled with ScenarioSpec::custom".into(),
            ))
        }
    };
    Ok(spec)
}

fn oh_to_lp(theta: f64, ln_n: f64, relaxed: bool) -> ScenarioSpec {
    let a = -2.0 * theta;
    let b = 4.0 - 2.0 * theta;
    let w = |n_power: f64, e: [f64; 4]| MonomialWeight::new(1.0, n_power, e.to_vec(), &LP_VARS);
    // Groups are index lists into (s,t,u,v).
    let (s, t, u, v) = (0usize, 1usize, 2usize, 3usize);
    let proj = |w1: [f64; 4], w2: [f64; 4], g1: Vec<usize>, g2: Vec<usize>| {
        let t = Term::proj(w(1.0, w1), w(1.0, w2), g1, g2);
        if relaxed {
            Term::l2(t.density())
        } else {
            t
        }
    };
    let terms = vec![
        Term::l2(w(1.0, [b, a, -1.0, -1.0])),
        Term::l2(w(1.0, [a, b, 1.0, 1.0])),
        proj([b, a, -1.0, 0.0], [0.0, 0.0, 0.0, 1.0], vec![s, t, u], vec![v]),
        proj([a, b, 1.0, 0.0], [0.0, 0.0, 0.0, -1.0], vec![s, t, u], vec![v]),
        proj([a, 0.0, 0.0, 0.0], [0.0, a, -1.0, -1.0], vec![s], vec![t, u, v]),
        proj([a, 0.0, 0.0, 1.0], [0.0, a, -1.0, 0.0], vec![s, v], vec![t, u]),
        proj([a, 0.0, 1.0, 1.0], [0.0, a, 0.0, 0.0], vec![s, u, v], vec![t]),
        proj([a, 0.0, 1.0, 0.0], [0.0, a, 0.0, -1.0], vec![s, u], vec![t, v]),
    ];
    ScenarioSpec {
        kind: if relaxed {
            ScenarioKind::OhToLpRelaxed
        } else {
            ScenarioKind::OhToLp
        },
        theta,
        ln_n,
        variables: LP_VARS.iter().map(|s| s.to_string()).collect(),
        terms,
        common: w(2.0, [a, a, 1.0, 1.0]),
    }
}

fn oh_to_cp(theta: f64, ln_n: f64) -> ScenarioSpec {
    let a = -2.0 * theta;
    let w = |n_power: f64, e: [f64; 2]| MonomialWeight::new(1.0, n_power, e.to_vec(), &CP_VARS);
    let terms = vec![
        Term::l2(w(1.0, [-1.0, a])),
        Term::l2(w(1.0, [1.0, 2.0 + a])),
        Term::proj(w(1.0, [-1.0, 0.0]), w(1.0, [0.0, 2.0 + a]), vec![0], vec![1]),
        Term::proj(w(1.0, [1.0, 0.0]), w(1.0, [0.0, a]), vec![0], vec![1]),
    ];
    ScenarioSpec {
        kind: ScenarioKind::OhToCp,
        theta,
        ln_n,
        variables: CP_VARS.iter().map(|s| s.to_string()).collect(),
        terms,
        common: w(1.0, [-1.0, a]),
    }
}

impl ScenarioSpec {
    /// Assembles a custom scenario; the common factor is the constant 1.
    pub fn custom(variables: &[&str], terms: Vec<Term>, theta: f64, ln_n: f64) -> Self {
        for t in &terms {
            for w in &t.weights {
                assert_eq!(w.dim(), variables.len());
            }
        }
        Self {
            kind: ScenarioKind::Custom,
            theta,
            ln_n,
            variables: variables.iter().map(|s| s.to_string()).collect(),
            terms,
            common: MonomialWeight::one(variables),
        }
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The scale `n` as a float (infinite when `ln n` exceeds the float range).
    pub fn n(&self) -> f64 {
        self.ln_n.exp()
    }

    /// Same scenario with another scale.
    pub fn with_ln_n(&self, ln_n: f64) -> Self {
        Self {
            ln_n,
            ..self.clone()
        }
    }

    /// Product densities of all terms.
    pub fn densities(&self) -> Vec<MonomialWeight> {
        self.terms.iter().map(Term::density).collect()
    }

    /// Densities divided by the common factor, in term order.
    pub fn reduced_terms(&self) -> Vec<MonomialWeight> {
        self.terms
            .iter()
            .map(|t| t.density().div(&self.common))
            .collect()
    }

    /// Affine exponents `(slopes, constant)` of each density in log coordinates.
    pub fn log_affines(&self) -> Vec<(Vec<f64>, f64)> {
        self.densities()
            .into_iter()
            .map(|w| {
                let c = w.ln_constant(self.ln_n);
                (w.exponents, c)
            })
            .collect()
    }

    /// Index of the minimal reduced term at a point in log coordinates;
    /// ties go to the smallest index.
    pub fn active_term_log(&self, y: &[f64]) -> usize {
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for (l, w) in self.reduced_terms().iter().enumerate() {
            let val = w.ln_eval_log(y, self.ln_n);
            if val < best_val {
                best_val = val;
                best = l;
            }
        }
        best
    }

    /// `ln min_l density_l` at a point in log coordinates.
    pub fn ln_min_density(&self, y: &[f64]) -> f64 {
        self.densities()
            .iter()
            .map(|w| w.ln_eval_log(y, self.ln_n))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Index (0-based) of the active reduced term at a point with positive coordinates.
pub fn active_term(spec: &ScenarioSpec, point: &[f64]) -> Result<usize> {
    if point.len() != spec.dim() {
        return Err(Error::Dimension(format!(
            "point has {} coordinates, scenario has {}",
            point.len(),
            spec.dim()
        )));
    }
    let y = to_log_point(point)?;
    Ok(spec.active_term_log(&y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp() -> ScenarioSpec {
        build_scenario(ScenarioKind::OhToLp, 0.5, 16).unwrap()
    }

    #[test]
    fn reduced_terms_follow_declaration_order() {
        let expected: [(f64, [f64; 4]); 8] = [
            (-1.0, [4.0, 0.0, -2.0, -2.0]),
            (-1.0, [0.0, 4.0, 0.0, 0.0]),
            (0.0, [4.0, 0.0, -2.0, 0.0]),
            (0.0, [0.0, 4.0, 0.0, -2.0]),
            (0.0, [0.0, 0.0, -2.0, -2.0]),
            (0.0, [0.0, 0.0, -2.0, 0.0]),
            (0.0, [0.0, 0.0, 0.0, 0.0]),
            (0.0, [0.0, 0.0, 0.0, -2.0]),
        ];
        for theta in [0.1, 0.5, 0.9] {
            let spec = build_scenario(ScenarioKind::OhToLp, theta, 16).unwrap();
            for (w, (np, e)) in spec.reduced_terms().iter().zip(expected.iter()) {
                assert_eq!(w.n_power, *np);
                for (a, b) in w.exponents.iter().zip(e) {
                    assert!((a - b).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn relaxed_densities_equal_projective_products() {
        let a = lp();
        let b = build_scenario(ScenarioKind::OhToLpRelaxed, 0.5, 16).unwrap();
        assert!(b.terms.iter().all(|t| t.kind == TermKind::L2));
        assert_eq!(a.densities(), b.densities());
    }

    #[test]
    fn cp_reduced_terms() {
        let spec = build_scenario(ScenarioKind::OhToCp, 0.7, 8).unwrap();
        assert_eq!(spec.len(), 4);
        let r = spec.reduced_terms();
        assert_eq!(r[1].exponents, vec![2.0, 2.0]);
        assert_eq!((r[2].n_power, r[2].exponents.clone()), (1.0, vec![0.0, 2.0]));
        assert_eq!((r[3].n_power, r[3].exponents.clone()), (1.0, vec![2.0, 0.0]));
    }

    #[test]
    fn theta_out_of_range_names_interval() {
        let err = build_scenario(ScenarioKind::OhToCp, 0.4, 8).unwrap_err();
        assert!(err.to_string().contains("(0.5, 1)"));
        assert!(build_scenario(ScenarioKind::OhToLp, 1.0, 8).is_err());
        assert!(build_scenario(ScenarioKind::OhToLp, 0.5, 0).is_err());
    }

    #[test]
    fn active_term_example_point() {
        // Direct evaluation of the eight reduced weights at (1, 3, 0.5, 0.1), n = 16.
        let spec = lp();
        let x = [1.0f64, 3.0, 0.5, 0.1];
        let vals = [
            x[0].powi(4) / (x[2] * x[2] * x[3] * x[3]) / 16.0,
            x[1].powi(4) / 16.0,
            x[0].powi(4) / (x[2] * x[2]),
            x[1].powi(4) / (x[3] * x[3]),
            1.0 / (x[2] * x[2] * x[3] * x[3]),
            1.0 / (x[2] * x[2]),
            1.0,
            1.0 / (x[3] * x[3]),
        ];
        let argmin = (0..8)
            .min_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap())
            .unwrap();
        assert_eq!(argmin, 6);
        assert_eq!(active_term(&spec, &x).unwrap(), 6);
    }

    #[test]
    fn active_term_rejects_nonpositive_point() {
        assert!(matches!(
            active_term(&lp(), &[1.0, -1.0, 1.0, 1.0]),
            Err(Error::Domain { index: 1, .. })
        ));
    }

    #[test]
    fn large_s_t_at_unit_u_v_selects_a_bounded_term() {
        let spec = lp();
        let l = active_term(&spec, &[1e6, 1e6, 1.0, 1.0]).unwrap();
        assert!((4..8).contains(&l));
    }
}
