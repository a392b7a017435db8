//! Deterministic seed derivation.
//!
//! Every trial gets an independent RNG stream derived from the master seed by
//! a stable, documented hash: the per-trial seed is the first 8 bytes
//! (little-endian) of
//!
//! ```text
//! SHA-256( "magloc/trial/v1" || master_seed_le64 || pose_index_le32
//!          || trial_index_le32 || scenario_name_utf8 )
//! ```
//!
//! so re-running any scenario with the same master seed reproduces every
//! trial bit for bit, regardless of execution order.

use sha2::{Digest, Sha256};

fn digest_to_seed(digest: &[u8]) -> u64 {
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Seed for one (scenario, pose, trial) cell.
pub fn trial_seed(master_seed: u64, scenario: &str, pose_index: u32, trial_index: u32) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"magloc/trial/v1");
    hasher.update(master_seed.to_le_bytes());
    hasher.update(pose_index.to_le_bytes());
    hasher.update(trial_index.to_le_bytes());
    hasher.update(scenario.as_bytes());
    digest_to_seed(&hasher.finalize())
}

/// Seed for auxiliary streams (e.g. random pose generation), namespaced by a
/// tag.
pub fn derived_seed(master_seed: u64, tag: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(b"magloc/derived/v1");
    hasher.update(master_seed.to_le_bytes());
    hasher.update(tag.as_bytes());
    digest_to_seed(&hasher.finalize())
}
