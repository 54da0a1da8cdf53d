//! Hill estimation of the tail index of `|X|`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Minimum number of positive `|values|` before a tail index is estimated.
pub const MIN_TAIL_VALUES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillEstimate {
    /// GEV-convention shape `γ̂ = 1/ξ̂`.
    pub gamma: f64,
    /// Number of upper order statistics used.
    pub k: usize,
    /// The `(k+1)`-th largest `|value|`, the threshold.
    pub threshold: f64,
}

/// `min(0.1, 1/√n)`.
pub fn default_k_frac(n: usize) -> f64 {
    (1.0 / (n.max(1) as f64).sqrt()).min(0.1)
}

/// Hill estimate on the top `⌈k_frac · n⌉` order statistics of `|sample|`.
pub fn hill_tail_index(sample: &[f64], k_frac: f64) -> Result<HillEstimate> {
    if !(k_frac > 0.0 && k_frac <= 0.2) {
        return Err(Error::InvalidInput(format!("k_frac = {k_frac} outside (0, 0.2]")));
    }
    let k = ((k_frac * sample.len() as f64).ceil() as usize).max(1);
    hill_with_k(sample, k)
}

pub fn hill_with_k(sample: &[f64], k: usize) -> Result<HillEstimate> {
    let mut abs: Vec<f64> = sample
        .iter()
        .map(|v| v.abs())
        .filter(|v| *v > 0.0 && v.is_finite())
        .collect();
    let required = MIN_TAIL_VALUES.max(k + 1);
    if abs.len() < required || k == 0 {
        return Err(Error::InsufficientTail {
            positive: abs.len(),
            required,
        });
    }
    abs.sort_unstable_by(|a, b| b.total_cmp(a));
    let threshold = abs[k];
    let log_u = threshold.ln();
    let gamma = abs[..k].iter().map(|v| v.ln() - log_u).sum::<f64>() / k as f64;
    Ok(HillEstimate { gamma, k, threshold })
}

/// Large-sample expectation of the Hill estimate for `|Z|`, `Z ~ N(0, 1)`,
/// using the top `k` of `n` values:
///
/// ```text
/// E[log(|Z|/u) | |Z| > u] = ∫_u^∞ Φ̄(t)/t dt / Φ̄(u),   Φ̄(u) = k / (2n)
/// ```
///
/// Light tails give a positive Hill estimate at finite `n`; this is the level
/// a Gaussian tail produces.
pub fn gaussian_hill_reference(n: usize, k: usize) -> f64 {
    let normal = Normal::standard();
    let tail = (k as f64 / (2.0 * n.max(1) as f64)).min(0.5);
    let u = normal.inverse_cdf(1.0 - tail).max(1e-6);
    let f = |t: f64| normal.sf(t) / t;
    let upper = u + 12.0;
    let steps = 4000;
    let h = (upper - u) / steps as f64;
    let mut acc = f(u) + f(upper);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(u + i as f64 * h);
    }
    acc * h / 3.0 / normal.sf(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Pareto, StandardNormal};

    #[test]
    fn pareto_tail_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = Pareto::new(1.0, 5.0).unwrap();
        let x: Vec<f64> = (0..10_000).map(|_| d.sample(&mut rng)).collect();
        let h = hill_tail_index(&x, default_k_frac(x.len())).unwrap();
        assert!((h.gamma - 0.2).abs() < 0.05, "{h:?}");
    }

    #[test]
    fn normal_tail_is_light() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let h = hill_tail_index(&x, 0.002).unwrap();
        assert!(h.gamma <= 0.1, "{h:?}");
    }

    #[test]
    fn scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        let scaled: Vec<f64> = x.iter().map(|v| v * 4.0).collect();
        let a = hill_tail_index(&x, 0.1).unwrap();
        let b = hill_tail_index(&scaled, 0.1).unwrap();
        assert!((a.gamma - b.gamma).abs() < 1e-14);
    }

    #[test]
    fn too_short_tail() {
        assert!(matches!(
            hill_tail_index(&[1.0; 20], 0.1),
            Err(Error::InsufficientTail { .. })
        ));
        assert!(hill_tail_index(&[1.0; 100], 0.5).is_err());
    }

    #[test]
    fn gaussian_reference_matches_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let n = 1000;
        let k = 32;
        let reps = 400;
        let mut total = 0.0;
        for _ in 0..reps {
            let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            total += hill_with_k(&x, k).unwrap().gamma;
        }
        let reference = gaussian_hill_reference(n, k);
        assert!((total / reps as f64 - reference).abs() < 0.02, "{reference}");
        assert!(gaussian_hill_reference(100_000, 316) < reference);
    }
}
