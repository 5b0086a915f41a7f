//! Deterministic hash families used by the feedback codecs.
//!
//! Three consumers with different requirements share this module: the
//! linear-equation scheme needs a universal family (`UniversalHasher`, a
//! 128-bit multiply-add-shift) plus an approximation of a fully random
//! function expanded to one field element per matrix column (`RowHasher`);
//! the Bloom filter needs position hashes over an arbitrary-length bit array
//! (`BloomHasher`). Everything is a pure function of (seed, trial, input) so
//! base station and users agree bit-exactly given shared protocol constants.

use crate::gf::FieldVector;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

const DOMAIN_UNIVERSAL: u64 = 1;
const DOMAIN_ROW: u64 = 2;
const DOMAIN_BLOOM: u64 = 3;
const DOMAIN_STREAM: u64 = 4;

/// splitmix64 finalizer: a fixed 64-bit permutation with full avalanche.
#[inline]
pub fn avalanche(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Keyed mixing function; the workhorse behind every family here.
#[inline]
pub fn mix64(key: u64, x: u64) -> u64 {
    avalanche(x.wrapping_add(key).wrapping_add(GOLDEN))
}

/// Protocol seed plus the retry counter for the linear-equation scheme.
/// Identical (seed, trial, input) always yields identical output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct HashSeed {
    pub seed: u64,
    pub trial: u16,
}

impl HashSeed {
    pub fn new(seed: u64, trial: u16) -> Self {
        HashSeed { seed, trial }
    }

    /// Base key for one hash-family domain under this (seed, trial).
    fn stream(&self, domain: u64) -> u64 {
        mix64(mix64(self.seed, domain), self.trial as u64)
    }
}

/// Derive an independent 64-bit sub-seed, e.g. one per Monte-Carlo trial.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master, DOMAIN_STREAM), index)
}

/// Strongly universal hash for 64-bit keys: h(x) = ((a·x + b) mod 2^128)
/// truncated to the top `bits` of the upper word. Collision probability of
/// distinct keys is at most 2^-bits.
#[derive(Debug, Clone)]
pub struct UniversalHasher {
    a: u128,
    b: u128,
}

impl UniversalHasher {
    pub fn new(seed: &HashSeed) -> Self {
        let base = seed.stream(DOMAIN_UNIVERSAL);
        let w = |i: u64| mix64(base, i) as u128;
        UniversalHasher { a: (w(0) << 64) | w(1), b: (w(2) << 64) | w(3) }
    }

    /// Hash into [0, 2^bits); bits ≤ 64.
    #[inline]
    pub fn hash(&self, x: u64, bits: u32) -> u64 {
        debug_assert!(bits <= 64);
        if bits == 0 {
            return 0;
        }
        let v = self.a.wrapping_mul(x as u128).wrapping_add(self.b);
        ((v >> 64) as u64) >> (64 - bits)
    }
}

/// One-shot universal hash into [0, 2^bits).
pub fn universal_hash(x: u64, bits: u32, seed: &HashSeed) -> u64 {
    UniversalHasher::new(seed).hash(x, bits)
}

/// Approximation of a fully random function [N] → GF(2^b)^K: one keyed mixer
/// per coordinate, truncated to the field width. A true random function would
/// need exponential storage; a strong mixer is the standard substitute.
#[derive(Debug, Clone)]
pub struct RowHasher {
    keys: Vec<u64>,
    mask: u64,
}

impl RowHasher {
    pub fn new(seed: &HashSeed, columns: usize, field_width: u32) -> Self {
        debug_assert!((1..=32).contains(&field_width));
        let base = seed.stream(DOMAIN_ROW);
        RowHasher {
            keys: (0..columns as u64).map(|i| mix64(base, i)).collect(),
            mask: if field_width == 64 { u64::MAX } else { (1u64 << field_width) - 1 },
        }
    }

    pub fn columns(&self) -> usize {
        self.keys.len()
    }

    #[inline]
    pub fn element(&self, x: u64, column: usize) -> u32 {
        (mix64(self.keys[column], x) & self.mask) as u32
    }

    pub fn fill_row(&self, x: u64, out: &mut [u32]) {
        debug_assert_eq!(out.len(), self.keys.len());
        for (slot, &key) in out.iter_mut().zip(&self.keys) {
            *slot = (mix64(key, x) & self.mask) as u32;
        }
    }

    pub fn row(&self, x: u64) -> FieldVector {
        let mut out = vec![0u32; self.keys.len()];
        self.fill_row(x, &mut out);
        FieldVector(out)
    }
}

/// One-shot row expansion; prefer `RowHasher` in loops.
pub fn prf_row(x: u64, columns: usize, field_width: u32, seed: &HashSeed) -> FieldVector {
    RowHasher::new(seed, columns, field_width).row(x)
}

/// T independent position hashes into [0, len): 64-bit mix followed by a
/// multiply-high range reduction (bias is O(len/2^64), negligible here).
#[derive(Debug, Clone)]
pub struct BloomHasher {
    keys: Vec<u64>,
    len: u64,
}

impl BloomHasher {
    pub fn new(seed: &HashSeed, hash_count: u32, len: usize) -> Self {
        assert!(len > 0);
        let base = seed.stream(DOMAIN_BLOOM);
        BloomHasher {
            keys: (0..hash_count as u64).map(|i| mix64(base, i)).collect(),
            len: len as u64,
        }
    }

    #[inline]
    pub fn position(&self, x: u64, i: usize) -> usize {
        let v = mix64(self.keys[i], x);
        ((v as u128 * self.len as u128) >> 64) as usize
    }

    pub fn hash_count(&self) -> usize {
        self.keys.len()
    }
}
