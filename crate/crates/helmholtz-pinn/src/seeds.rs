//! Deterministic derivation of sub-seeds from a master seed.
//!
//! Every independent random stream in a run (collocation sampling, per-trial
//! network init, GP restarts, acquisition candidates, sweep cells) gets its own
//! seed derived from the master seed, a purpose tag and an index. The scheme is
//! a fixed splitmix64 chain, so derived seeds are stable across platforms and
//! unaffected by how many draws other streams consume.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a sub-seed from `master`, a purpose `tag`, and an `index`.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut h = splitmix64(master);
    for &b in tag.as_bytes() {
        h = splitmix64(h ^ u64::from(b));
    }
    splitmix64(h ^ index)
}

/// ChaCha8 stream seeded from a derived sub-seed.
pub fn derived_rng(master: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tag, index))
}
