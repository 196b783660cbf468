//! Counter-based random streams.
//!
//! Every random decision in the approximator is drawn from a stream keyed by
//! `(master_seed, purpose, level, q_index, iteration)`, so results do not depend
//! on the order in which parallel tasks run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    HashDraw = 1,
    Subsample = 2,
    Validation = 3,
    Bench = 4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    pub level: u32,
    pub q_index: u32,
    pub iteration: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive(master_seed: u64, words: &[u64]) -> [u8; 32] {
    let mut state = splitmix64(master_seed);
    for &w in words {
        state = splitmix64(state ^ w);
    }
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

pub fn stream(master_seed: u64, purpose: Purpose, key: StreamKey) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive(
        master_seed,
        &[
            purpose as u64,
            key.level as u64,
            key.q_index as u64,
            key.iteration,
        ],
    ))
}

/// Stream for one-off uses that only need a purpose and a counter.
pub fn simple_stream(master_seed: u64, purpose: Purpose, counter: u64) -> ChaCha8Rng {
    stream(
        master_seed,
        purpose,
        StreamKey {
            level: 0,
            q_index: 0,
            iteration: counter,
        },
    )
}
