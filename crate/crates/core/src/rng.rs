//! Seed derivation. Every random decision in the crate draws from a
//! `ChaCha8Rng` whose seed is derived from a parent seed and a label, so
//! results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A component of a derived seed.
#[derive(Debug, Clone, Copy)]
pub enum SeedPart<'a> {
    Str(&'a str),
    Int(u64),
}

impl<'a> From<&'a str> for SeedPart<'a> {
    fn from(s: &'a str) -> Self {
        SeedPart::Str(s)
    }
}

impl<'a> From<&'a String> for SeedPart<'a> {
    fn from(s: &'a String) -> Self {
        SeedPart::Str(s.as_str())
    }
}

impl From<u64> for SeedPart<'_> {
    fn from(v: u64) -> Self {
        SeedPart::Int(v)
    }
}

impl From<usize> for SeedPart<'_> {
    fn from(v: usize) -> Self {
        SeedPart::Int(v as u64)
    }
}

/// 64-bit hash of `(base, parts...)`. Parts are length-prefixed and
/// type-tagged so `("ab", "c")` and `("a", "bc")` never collide structurally.
pub fn derive(base: u64, parts: &[SeedPart<'_>]) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    for part in parts {
        match part {
            SeedPart::Str(s) => {
                h.update([0u8]);
                h.update((s.len() as u64).to_le_bytes());
                h.update(s.as_bytes());
            }
            SeedPart::Int(v) => {
                h.update([1u8]);
                h.update(v.to_le_bytes());
            }
        }
    }
    let digest = h.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(out)
}

/// Shorthand for deriving a child seed from a label and an index.
pub fn child(base: u64, label: &str, index: u64) -> u64 {
    derive(base, &[SeedPart::Str(label), SeedPart::Int(index)])
}
