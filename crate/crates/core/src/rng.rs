//! Deterministic, portable randomness for the check suites.
//!
//! Generator: **ChaCha8** (`rand_chacha`), a seedable stream cipher whose
//! output is specified byte-for-byte and therefore identical across
//! platforms, architectures, and compiler versions. Each check derives its
//! own stream from the run seed and a textual label, so adding or
//! reordering checks never perturbs the samples of the others.
//!
//! Labels are hashed with FNV-1a (hand-rolled below, ~10 lines) instead of
//! `std::hash::DefaultHasher`, because the std hasher's output is
//! explicitly not guaranteed stable across Rust releases and report
//! determinism is part of the tool's contract.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// FNV-1a 64-bit hash of a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Dedicated random stream for the check identified by `label`.
pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(label.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn fnv_matches_reference_vectors() {
        // Standard FNV-1a test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn streams_are_deterministic_and_label_separated() {
        let mut a1 = rng_for(42, "alpha");
        let mut a2 = rng_for(42, "alpha");
        let mut b = rng_for(42, "beta");
        let x1: f64 = a1.gen();
        let x2: f64 = a2.gen();
        let y: f64 = b.gen();
        assert_eq!(x1, x2);
        assert_ne!(x1, y);
    }
}
