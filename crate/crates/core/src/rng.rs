//! Seeded, counter-based random streams.
//!
//! Every Monte Carlo loop derives an independent stream from
//! `(master seed, stream index)`, so results do not depend on how work is
//! spread across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

/// Generator type used by every sampler in the crate.
pub type SimRng = ChaCha8Rng;

/// Independent generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard normal variates by the Marsaglia polar method.
///
/// The method yields values in pairs; the spare is cached so consecutive
/// draws consume the uniform stream deterministically.
#[derive(Debug, Clone)]
pub struct NormalSampler {
    rng: SimRng,
    spare: Option<f64>,
}

impl NormalSampler {
    pub fn new(rng: SimRng) -> Self {
        Self { rng, spare: None }
    }

    pub fn from_stream(seed: u64, stream: u64) -> Self {
        Self::new(stream_rng(seed, stream))
    }

    pub fn standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.rng.random::<f64>() - 1.0;
            let v = 2.0 * self.rng.random::<f64>() - 1.0;
            let r2 = u * u + v * v;
            if r2 > 0.0 && r2 < 1.0 {
                let scale = (-2.0 * r2.ln() / r2).sqrt();
                self.spare = Some(v * scale);
                return u * scale;
            }
        }
    }

    /// Zero-mean normal with standard deviation `sigma`.
    pub fn normal<T: Real>(&mut self, sigma: T) -> T {
        T::lit(self.standard()) * sigma
    }

    /// Uniform draw on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}
