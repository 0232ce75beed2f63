//! Seeded random source for every simulation in the crate.
//!
//! The generator is ChaCha8 seeded through `seed_from_u64`, and Gaussian
//! deviates come from `rand_distr`'s ziggurat sampler. Both are portable, so
//! a seed reproduces the same stream on every platform.
//!
//! Parallel work is split into shards. Shard `i` of master seed `s` uses the
//! ChaCha key derived from `s` with stream id `i`. Streams never overlap, and
//! the shard layout depends only on the sample count, never on thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Mat, Vector};

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream `shard` under the master seed.
    pub fn for_shard(seed: u64, shard: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(shard);
        Self { inner }
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn standard_normal_vector(&mut self, dim: usize) -> Vector {
        Vector::from_fn(dim, |_, _| self.standard_normal())
    }

    /// Draws `F·w` with `w` standard normal, i.e. `N(0, F Fᵀ)`.
    pub fn gaussian(&mut self, factor: &Mat) -> Vector {
        let w = self.standard_normal_vector(factor.ncols());
        factor * w
    }

    /// χ² deviate with `dof` degrees of freedom, as a sum of squared normals.
    pub fn chi_square(&mut self, dof: u32) -> f64 {
        (0..dof)
            .map(|_| {
                let w = self.standard_normal();
                w * w
            })
            .sum()
    }
}
