//! Counter-based random substreams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator addressed by
//! `(purpose, index, counter)`. The master seed fixes the key, `purpose` and
//! `index` select the 64-bit ChaCha stream and `counter` (usually the MCMC
//! iteration) selects a disjoint window of the keystream. Results therefore
//! do not depend on how work is split across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Consumers of randomness. Each gets its own family of streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Simulation = 1,
    Ffbs = 2,
    Gibbs = 3,
    Hyper = 4,
    FixedEffects = 5,
    Derive = 6,
}

const INDEX_BITS: u32 = 56;
/// Keystream words reserved per counter value (2^40 words is far more than
/// any single FFBS pass consumes).
const WORDS_PER_COUNTER: u32 = 40;
const MAX_COUNTER: u64 = 1 << 28;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substreams {
    seed: u64,
    key: [u8; 32],
}

impl Substreams {
    pub fn new(seed: u64) -> Self {
        let key = ChaCha8Rng::seed_from_u64(seed).get_seed();
        Self { seed, key }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Generator for `(purpose, index, counter)`.
    pub fn rng(&self, purpose: Purpose, index: u64, counter: u64) -> StreamRng {
        assert!(index < (1 << INDEX_BITS), "substream index {index} out of range");
        assert!(counter < MAX_COUNTER, "substream counter {counter} out of range");
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(((purpose as u64) << INDEX_BITS) | index);
        rng.set_word_pos(u128::from(counter) << WORDS_PER_COUNTER);
        rng
    }

    /// A child seed, for handing a whole sub-run its own master seed.
    pub fn derive_seed(&self, index: u64) -> u64 {
        self.rng(Purpose::Derive, index, 0).next_u64()
    }
}
