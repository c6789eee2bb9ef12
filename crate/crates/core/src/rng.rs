//! Deterministic RNG substream derivation.
//!
//! Every random quantity in the toolkit (channel gains, dithers, per-trial
//! symbols and noise) is drawn from its own substream derived from the master
//! seed and a structured label list. Substreams for different labels never
//! collide, so adding trials cannot perturb the channel draw and parallel
//! schedules cannot reorder anything.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Well-known first labels. Later labels index within a domain
/// (grid point, trial number, ...).
pub mod label {
    pub const CHANNEL: u64 = 1;
    pub const DITHERS: u64 = 2;
    pub const SER_TRIAL: u64 = 3;
    pub const POWER_FRAME: u64 = 4;
}

/// Derives an independent RNG from `(master_seed, labels)`.
///
/// The ChaCha key is SHA-256 over a domain tag, the little-endian master
/// seed, the label count, and the labels, so label lists of different length
/// or content map to unrelated streams.
pub fn seed_substream(master_seed: u64, labels: &[u64]) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"noisealign.stream.v1");
    hasher.update(master_seed.to_le_bytes());
    hasher.update((labels.len() as u64).to_le_bytes());
    for &l in labels {
        hasher.update(l.to_le_bytes());
    }
    let key: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(key)
}
