//! Shared inputs for the benchmarks.

use lpdens::Sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// `n` standard normal draws from a fixed seed.
pub fn normal_sample(n: usize) -> Sample {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let xs: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Sample::new(&xs, None).expect("finite draws")
}
