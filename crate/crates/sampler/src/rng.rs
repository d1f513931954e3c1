//! Counter-based random streams. A stream is keyed by (seed, chain) and
//! every MCMC step starts at its own fixed word offset, so the numbers a
//! step sees depend only on (seed, chain, step).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// 32-bit words reserved per step: four ChaCha blocks.
pub const WORDS_PER_STEP: u128 = 64;

/// Offset of the initialization region, far past any step counter.
const INIT_WORD_POS: u128 = 1 << 66;

pub fn stream(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain);
    rng
}

/// Positions `rng` at the start of step `step`.
#[inline]
pub fn seek_step(rng: &mut ChaCha8Rng, step: u64) {
    rng.set_word_pos(step as u128 * WORDS_PER_STEP);
}

pub fn init_stream(seed: u64, chain: u64) -> ChaCha8Rng {
    let mut rng = stream(seed, chain);
    rng.set_word_pos(INIT_WORD_POS);
    rng
}
