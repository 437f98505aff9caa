//! Seeded random streams.
//!
//! Every random choice in the crate is drawn from a [`Stream`] created from a
//! master seed. Monte Carlo trials derive their stream from
//! `(master seed, domain, trial index)` so that trials are order-independent
//! and can run in parallel without changing any result.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha12Rng;

/// Default master seed used when none is given.
pub const DEFAULT_SEED: u64 = 0xC0DE;

pub fn stream(seed: u64) -> Stream {
    Stream::seed_from_u64(seed)
}

/// Stream for trial `index` of the experiment named `domain`.
pub fn trial_stream(master: u64, domain: &str, index: u64) -> Stream {
    let mut hasher = Sha256::new();
    hasher.update(b"cdenlab/trial");
    hasher.update(master.to_le_bytes());
    hasher.update((domain.len() as u64).to_le_bytes());
    hasher.update(domain.as_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    let mut rng = Stream::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Derive an independent 64-bit sub-seed, e.g. for an oracle table.
pub fn subseed(master: u64, domain: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"cdenlab/subseed");
    hasher.update(master.to_le_bytes());
    hasher.update(domain.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
