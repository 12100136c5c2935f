//! Seeded sampling. Every draw goes through a ChaCha stream so that a seed
//! fully determines a run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Alpha, PointE};

/// Closed coordinate range `[lo, hi]` with `0 < lo ≤ hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
}

impl SampleBox {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi {
            Ok(SampleBox { lo, hi })
        } else {
            Err(Error::Precondition(format!(
                "box [{lo}, {hi}] must satisfy 0 < lo <= hi"
            )))
        }
    }
}

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for a named sub-task; the same `(seed, stream)`
    /// always yields the same draws regardless of what other streams did.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Sampler { rng }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            lo
        } else {
            self.rng.random_range(lo..hi)
        }
    }

    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn log_uniform(&mut self, b: SampleBox) -> f64 {
        self.uniform(b.lo.ln(), b.hi.ln()).exp().clamp(b.lo, b.hi)
    }

    pub fn point(&mut self, b: SampleBox) -> PointE {
        let (x, y, z) = (
            self.log_uniform(b),
            self.log_uniform(b),
            self.log_uniform(b),
        );
        PointE::new(x, y, z).expect("log-uniform coordinates are positive")
    }

    pub fn alpha(&mut self, lo: f64, hi: f64) -> Alpha {
        Alpha::new(self.uniform(lo, hi)).expect("alpha range is positive")
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.rng.random_range(0..items.len())]
    }
}
