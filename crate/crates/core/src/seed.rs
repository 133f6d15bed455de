//! Deterministic seed streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] whose seed is
//! derived from a master seed and a path of stream indices, for example
//! `(experiment id, set index, pattern index, grid index)`. Derivation folds
//! each index into the running state with the SplitMix64 finalizer:
//!
//! ```text
//! h0      = mix(master)
//! h(k+1)  = mix(h(k) ^ mix(index_k + GOLDEN))
//! ```
//!
//! where `mix` is the SplitMix64 output function and `GOLDEN` is
//! `0x9E37_79B9_7F4A_7C15`. The final `h` seeds `ChaCha8Rng::seed_from_u64`.
//! Streams are therefore independent of evaluation order, so trials may run
//! in parallel and still reproduce a sequential run bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Master seed of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunSeed {
    pub master: u64,
}

impl RunSeed {
    pub const fn new(master: u64) -> Self {
        Self { master }
    }

    /// Derives the 64-bit stream seed for `path`.
    pub fn derive(&self, path: &[u64]) -> u64 {
        path.iter()
            .fold(mix64(self.master), |h, &k| mix64(h ^ mix64(k.wrapping_add(GOLDEN))))
    }

    /// Generator for the stream identified by `path`.
    pub fn rng(&self, path: &[u64]) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.derive(path))
    }
}

impl From<u64> for RunSeed {
    fn from(master: u64) -> Self {
        Self::new(master)
    }
}
