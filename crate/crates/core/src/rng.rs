//! Counter-based random substreams.
//!
//! A [`RandomStream`] is a ChaCha8 keystream keyed by the master seed and
//! positioned on the ChaCha stream selected by the substream index. Workers
//! that own distinct substreams never share state, so results do not depend
//! on scheduling.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a list of keys into one substream index.
///
/// The scheme is fixed: start from `0x436c_6179` ("Clay"), then for each key
/// `h = mix64(h ^ mix64(key))`.
pub fn substream_key(keys: &[u64]) -> u64 {
    keys.iter()
        .fold(0x436c_6179_u64, |h, &k| mix64(h ^ mix64(k)))
}

#[derive(Debug, Clone)]
pub struct RandomStream {
    master_seed: u64,
    substream_index: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, substream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(substream_index);
        Self {
            master_seed,
            substream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn substream_index(&self) -> u64 {
        self.substream_index
    }

    /// A fresh stream under the same master seed whose index is derived from
    /// this stream's index and `key`. Does not advance `self`.
    pub fn child(&self, key: u64) -> RandomStream {
        RandomStream::new(
            self.master_seed,
            substream_key(&[self.substream_index, key]),
        )
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        Open01.sample(&mut self.rng)
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}
