//! Bloom-filter feedback: a fixed B-bit array with T hash positions set per
//! acknowledged user. Works for any instantaneous K (unlike the solver-based
//! scheme) at roughly a log2(e) factor in message length.

use super::bits::BitString;
use super::{CodecError, DecodedSet, FeedbackMessage, Scheme};
use crate::hashing::{BloomHasher, HashSeed};

#[derive(Debug, Clone)]
pub struct BloomConfig {
    message_bits: usize,
    hash_count: u32,
    seed: u64,
}

impl BloomConfig {
    pub fn new(message_bits: usize, hash_count: u32, seed: u64) -> Result<Self, CodecError> {
        if message_bits == 0 {
            return Err(CodecError::InvalidConfig("message_bits must be positive".into()));
        }
        if hash_count == 0 {
            return Err(CodecError::InvalidConfig("hash_count must be positive".into()));
        }
        Ok(BloomConfig { message_bits, hash_count, seed })
    }

    /// Size the filter for a design point (K, ε_fp):
    /// B = ⌈K·log2(e)·log2(1/ε_fp)⌉ and T = round((B/K)·ln 2).
    pub fn for_target(design_k: u32, target_fp: f64, seed: u64) -> Result<Self, CodecError> {
        if !(target_fp > 0.0 && target_fp < 1.0) || design_k == 0 {
            return Err(CodecError::InvalidConfig(format!(
                "invalid design point K={design_k}, eps_fp={target_fp}"
            )));
        }
        let bits =
            (design_k as f64 * std::f64::consts::LOG2_E * (1.0 / target_fp).log2()).ceil() as usize;
        let t = optimal_hash_count(bits, design_k as usize);
        Self::new(bits.max(1), t, seed)
    }

    pub fn message_bits(&self) -> usize {
        self.message_bits
    }

    pub fn hash_count(&self) -> u32 {
        self.hash_count
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Exact expected false-positive probability for k encoded users:
    /// E[(X/B)^T] where X is the number of distinct set bits after kT
    /// uniform throws, by occupancy dynamic programming.
    pub fn analytic_fp_exact(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let b = self.message_bits;
        let t = self.hash_count as usize;
        let throws = k * t;
        let mut p = vec![0.0f64; throws.min(b) + 1];
        p[0] = 1.0;
        let bf = b as f64;
        for _ in 0..throws {
            for x in (0..p.len()).rev() {
                let stay = p[x] * (x as f64 / bf);
                let grow = if x > 0 { p[x - 1] * (1.0 - (x as f64 - 1.0) / bf) } else { 0.0 };
                p[x] = stay + grow;
            }
        }
        p.iter()
            .enumerate()
            .map(|(x, &px)| px * (x as f64 / bf).powi(t as i32))
            .sum()
    }

    /// The usual closed-form approximation (1 − (1 − 1/B)^{kT})^T. Slightly
    /// below the exact expectation because occupancy fluctuates.
    pub fn analytic_fp_simple(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let b = self.message_bits as f64;
        let kt = (k * self.hash_count as usize) as f64;
        (1.0 - (1.0 - 1.0 / b).powf(kt)).powi(self.hash_count as i32)
    }

    /// Round-to-half-integer power-of-two approximation,
    /// 2^-⌈(B/K)·ln2 + 0.5⌉; reported alongside the exact value.
    pub fn analytic_fp_rounded(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let exponent =
            (self.message_bits as f64 / k as f64 * std::f64::consts::LN_2 + 0.5).ceil();
        2f64.powf(-exponent)
    }
}

/// T = round((B/K)·ln 2), at least one hash.
pub fn optimal_hash_count(message_bits: usize, k: usize) -> u32 {
    ((message_bits as f64 / k as f64) * std::f64::consts::LN_2).round().max(1.0) as u32
}

pub fn encode(set: &DecodedSet, cfg: &BloomConfig) -> Result<FeedbackMessage, CodecError> {
    let mut payload = BitString::zeros(cfg.message_bits);
    let hasher = BloomHasher::new(&HashSeed::new(cfg.seed, 0), cfg.hash_count, cfg.message_bits);
    for &member in set.members() {
        for i in 0..cfg.hash_count as usize {
            payload.set_bit(hasher.position(member, i));
        }
    }
    Ok(FeedbackMessage { scheme: Scheme::Bloom, header: BitString::new(), payload })
}

#[derive(Debug)]
pub struct BloomDecoder {
    bits: BitString,
    hasher: BloomHasher,
}

impl BloomDecoder {
    pub fn new(msg: &FeedbackMessage, cfg: &BloomConfig) -> Result<Self, CodecError> {
        if msg.scheme != Scheme::Bloom {
            return Err(CodecError::SchemeMismatch { expected: Scheme::Bloom, got: msg.scheme });
        }
        if msg.payload.len() != cfg.message_bits {
            return Err(CodecError::MalformedMessage("payload length mismatch"));
        }
        Ok(BloomDecoder {
            bits: msg.payload.clone(),
            hasher: BloomHasher::new(
                &HashSeed::new(cfg.seed, 0),
                cfg.hash_count,
                cfg.message_bits,
            ),
        })
    }

    pub fn query(&self, id: u64) -> bool {
        (0..self.hasher.hash_count()).all(|i| self.bits.bit(self.hasher.position(id, i)))
    }
}
