//! Importance-sampling Monte Carlo for the min integrand over all of
//! log-space, with a mixture of product-Laplace proposals (one per term).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use super::integrand::MinIntegrand;
use super::tail::decay_rate;

/// Samples per independently seeded chunk; chunking keeps results identical
/// for any number of worker threads.
const CHUNK: usize = 4096;
const Z95: f64 = 1.959_963_984_540_054;

/// Mixture proposal `q(y) = (1/L) Σ_l Π_i (r/2) e^{−r|y_i − c_{l,i}|}`.
#[derive(Debug, Clone)]
pub struct LaplaceMixture {
    pub centers: Vec<Vec<f64>>,
    pub rate: f64,
}

impl LaplaceMixture {
    /// Centres each component near the region where its term is active and
    /// picks a rate slower than the integrand's decay so weights stay bounded.
    pub fn for_integrand(f: &MinIntegrand, bound: f64) -> Self {
        let d = f.dim() as f64;
        let kappa = decay_rate(f);
        let rate = if kappa > 0.0 { 0.6 * kappa / d } else { 0.1 };
        let mut centers: Vec<Vec<f64>> = Vec::new();
        for l in 0..f.n_terms() {
            let c = f.ascend(Some(l), bound, 4000);
            if !centers.iter().any(|x| x.iter().zip(&c).all(|(a, b)| (a - b).abs() < 1e-9)) {
                centers.push(c);
            }
        }
        Self { centers, rate }
    }

    pub fn ln_density(&self, y: &[f64]) -> f64 {
        let d = y.len() as f64;
        let ln_norm = d * (0.5 * self.rate).ln() - (self.centers.len() as f64).ln();
        let exps: Vec<f64> = self
            .centers
            .iter()
            .map(|c| -self.rate * c.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .collect();
        let m = exps.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        ln_norm + m + exps.iter().map(|e| (e - m).exp()).sum::<f64>().ln()
    }

    fn sample<R: Rng>(&self, rng: &mut R, out: &mut [f64]) {
        let c = &self.centers[rng.gen_range(0..self.centers.len())];
        let exp = Exp::new(self.rate).expect("positive rate");
        for (o, ci) in out.iter_mut().zip(c) {
            let e: f64 = exp.sample(rng);
            *o = if rng.gen::<bool>() { ci + e } else { ci - e };
        }
    }
}

/// Mean and standard error of `f/q` over `samples` draws (shifted units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub mean: f64,
    pub stderr: f64,
    pub half_width: f64,
}

pub fn sample_mean(f: &MinIntegrand, q: &LaplaceMixture, seed: u64, samples: usize) -> McResult {
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let len = CHUNK.min(samples - k * CHUNK);
            let mut y = vec![0.0; f.dim()];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                q.sample(&mut rng, &mut y);
                let w = if f.inside(&y, 0.0) {
                    (f.envelope(&y).0 - f.shift - q.ln_density(&y)).exp()
                } else {
                    0.0
                };
                s1 += w;
                s2 += w * w;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = partial.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = samples as f64;
    let mean = s1 / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    let stderr = (var / n).sqrt();
    McResult {
        mean,
        stderr,
        half_width: Z95 * stderr,
    }
}
