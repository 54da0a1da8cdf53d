//! Data generators shared by the benchmarks.

use misig_core::Dataset;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gumbel, StandardNormal};

/// `y = x + ε` with standard normal `x` and `ε`.
pub fn normal_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let y = x
        .iter()
        .map(|v| v + Distribution::<f64>::sample(&StandardNormal, &mut rng))
        .collect();
    Dataset::new(x, y).expect("finite draws")
}

pub fn gumbel_sample(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Gumbel::new(0.0, 1.0).expect("valid parameters");
    (0..n).map(|_| d.sample(&mut rng)).collect()
}
