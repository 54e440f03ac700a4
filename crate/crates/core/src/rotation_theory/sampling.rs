use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::metric::frac;

/// Generator of the additive recurrence with the best known 2-D spread,
/// based on the plastic number.
const PLASTIC: f64 = 1.324_717_957_244_746;
const JITTER: f64 = 1.0 / 256.0;

/// Initial points: a nested low-discrepancy sequence with seeded jitter.
/// The first `m` points of a plan with `count ≥ m` coincide with the plan
/// of size `m` for the same seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub count: usize,
    pub seed: u64,
}

impl SamplePlan {
    pub fn new(count: usize, seed: u64) -> Self {
        Self { count, seed }
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        let step = [1.0 / PLASTIC, 1.0 / (PLASTIC * PLASTIC)];
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.count)
            .map(|i| {
                let i = i as f64;
                let jx: f64 = rng.gen_range(-JITTER..JITTER);
                let jy: f64 = rng.gen_range(-JITTER..JITTER);
                [frac(0.5 + i * step[0] + jx), frac(0.5 + i * step[1] + jy)]
            })
            .collect()
    }
}
