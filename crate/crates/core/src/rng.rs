//! Deterministic stream derivation.
//!
//! Every consumer of randomness gets its own ChaCha stream keyed by
//! (master seed, node, round, purpose). Evaluation order therefore never
//! affects results, and any single stream can be replayed in isolation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a derived stream is used for. Each purpose gets an independent stream
/// even for the same (node, round).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// Graph generation.
    Graph,
    /// Dataset synthesis.
    Data,
    /// Picking which nodes are Byzantine.
    AdversarySelection,
    /// Byzantine message generation.
    Adversary,
    /// Mini-batch index selection.
    Batch,
    /// Miscellaneous (tests, samplers).
    Aux,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Graph => 1,
            Purpose::Data => 2,
            Purpose::AdversarySelection => 3,
            Purpose::Adversary => 4,
            Purpose::Batch => 5,
            Purpose::Aux => 6,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent stream for (master, node, round, purpose).
pub fn derive_rng(master: u64, node: u64, round: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut state = master
        ^ node.wrapping_mul(0xa076_1d64_78bd_642f)
        ^ round.wrapping_mul(0xe703_7ed1_a0b4_28db)
        ^ purpose.tag().wrapping_mul(0x8ebc_6af0_9c88_c6e3);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Stream not tied to a node or round.
pub fn global_rng(master: u64, purpose: Purpose) -> ChaCha8Rng {
    derive_rng(master, u64::MAX, u64::MAX, purpose)
}
