//! Named random substreams.
//!
//! Every consumer draws from its own ChaCha stream keyed by
//! `SHA-256(master ‖ name ‖ index)`, so adding a consumer never shifts the
//! draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub const ALPHA_STREAM: &str = "alpha";
pub const AGENT_STREAM: &str = "agent";
pub const ROLLOUT_STREAM: &str = "rollout";
pub const DELAY_STREAM: &str = "delay";

pub fn substream(master: u64, name: &str, index: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update((name.len() as u64).to_le_bytes());
    hasher.update(name.as_bytes());
    hasher.update(index.to_le_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}
