//! Seeding and sampling primitives.
//!
//! Every random stream in the workbench is a `ChaCha8Rng` seeded from a 64-bit
//! value. Sub-stream seeds are derived with [`derive_seed`]: FNV-1a (64-bit)
//! over the length-prefixed little-endian encoding of each key part, followed
//! by the SplitMix64 finalizer. The derivation depends only on its inputs, so
//! work can be scheduled in any order without changing results.
//!
//! Shuffling and bounded draws are implemented here rather than through
//! `rand`'s helpers so that the exact sequence is pinned by this crate.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// One component of a sub-stream key.
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

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-stream seed from a master seed and an ordered key.
pub fn derive_seed(master: u64, parts: &[SeedPart<'_>]) -> u64 {
    let mut h = fnv1a(FNV_OFFSET, &master.to_le_bytes());
    for part in parts {
        match part {
            SeedPart::Str(s) => {
                h = fnv1a(h, &[0x53]);
                h = fnv1a(h, &(s.len() as u64).to_le_bytes());
                h = fnv1a(h, s.as_bytes());
            }
            SeedPart::Int(v) => {
                h = fnv1a(h, &[0x49]);
                h = fnv1a(h, &v.to_le_bytes());
            }
        }
    }
    splitmix64(h)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integer in `0..bound` (Lemire's multiply-shift with rejection).
pub fn below(rng: &mut impl RngCore, bound: usize) -> usize {
    assert!(bound > 0, "bound must be positive");
    let bound = bound as u64;
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let x = rng.next_u64();
        let m = u128::from(x) * u128::from(bound);
        if (m as u64) >= threshold {
            return (m >> 64) as usize;
        }
    }
}

/// In-place Fisher–Yates shuffle.
pub fn shuffle<T>(rng: &mut impl RngCore, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = below(rng, i + 1);
        items.swap(i, j);
    }
}
