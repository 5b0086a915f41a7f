//! Error-free feedback by enumerative coding: a K-subset of [0, N) is
//! transmitted as its rank in the combinatorial number system, using exactly
//! ⌈log2 C(N,K)⌉ payload bits. Decode recovers the set, so both error
//! probabilities are zero.

use num_bigint::BigUint;
use num_traits::Zero;

use super::bits::{field_width_for, BitString};
use super::{CodecError, DecodedSet, FeedbackMessage, Scheme};
use crate::numeric::{binomial, ceil_log2_biguint};

#[derive(Debug, Clone)]
pub struct EnumerativeConfig {
    population: u128,
    k_max: u32,
}

impl EnumerativeConfig {
    pub fn new(population: u128, k_max: u32) -> Result<Self, CodecError> {
        if population == 0 || population > super::MAX_POPULATION {
            return Err(CodecError::InvalidConfig(format!(
                "population {population} outside 1..=2^64"
            )));
        }
        if k_max == 0 {
            return Err(CodecError::InvalidConfig("k_max must be at least 1".into()));
        }
        Ok(EnumerativeConfig { population, k_max })
    }

    pub fn population(&self) -> u128 {
        self.population
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// ⌈log2 C(N, k)⌉.
    pub fn payload_bits(&self, k: usize) -> usize {
        let c = binomial(self.population, k as u64);
        if c.is_zero() {
            return 0;
        }
        ceil_log2_biguint(&c) as usize
    }

    pub fn header_bits(&self) -> usize {
        field_width_for(self.k_max as u64) as usize
    }

    fn k_field_bits(&self) -> u32 {
        field_width_for(self.k_max as u64)
    }
}

/// Colexicographic rank: Σ C(s_i, i+1) over ascending members, so
/// {0, 1, ..., K−1} ranks zero and ranks stay below C(N, K).
pub fn rank(set: &DecodedSet) -> BigUint {
    let mut acc = BigUint::zero();
    for (i, &s) in set.members().iter().enumerate() {
        acc += binomial(s as u128, i as u64 + 1);
    }
    acc
}

/// Inverse of [`rank`]: the k-subset of [0, population) with the given rank.
pub fn unrank(population: u128, k: usize, rank: &BigUint) -> Result<DecodedSet, CodecError> {
    if k as u128 > population {
        return Err(CodecError::InvalidSet(format!("k={k} exceeds population {population}")));
    }
    if rank >= &binomial(population, k as u64) {
        return Err(CodecError::MalformedMessage("rank out of range"));
    }
    let mut members = vec![0u64; k];
    let mut rem = rank.clone();
    let mut hi = population; // exclusive upper bound for the next member
    for i in (0..k).rev() {
        // Largest s in [i, hi) with C(s, i+1) <= rem; binary search on the
        // monotone binomial.
        let (mut lo, mut up) = (i as u128, hi - 1);
        while lo < up {
            let mid = (lo + up).div_ceil(2);
            if binomial(mid, i as u64 + 1) <= rem {
                lo = mid;
            } else {
                up = mid - 1;
            }
        }
        members[i] = lo as u64;
        rem -= binomial(lo, i as u64 + 1);
        hi = lo;
    }
    debug_assert!(rem.is_zero());
    DecodedSet::new(population, members)
}

pub fn encode(set: &DecodedSet, cfg: &EnumerativeConfig) -> Result<FeedbackMessage, CodecError> {
    if set.population() != cfg.population {
        return Err(CodecError::InvalidSet(format!(
            "set population {} does not match config {}",
            set.population(),
            cfg.population
        )));
    }
    let k = set.k();
    if k > cfg.k_max as usize {
        return Err(CodecError::CapacityExceeded { k, capacity: cfg.k_max as usize });
    }
    let mut header = BitString::new();
    header.push_bits(k as u64, cfg.k_field_bits());
    let mut payload = BitString::new();
    payload.push_big(&rank(set), cfg.payload_bits(k));
    Ok(FeedbackMessage { scheme: Scheme::Enumerative, header, payload })
}

pub struct EnumerativeDecoder {
    set: DecodedSet,
}

impl EnumerativeDecoder {
    pub fn new(msg: &FeedbackMessage, cfg: &EnumerativeConfig) -> Result<Self, CodecError> {
        if msg.scheme != Scheme::Enumerative {
            return Err(CodecError::SchemeMismatch {
                expected: Scheme::Enumerative,
                got: msg.scheme,
            });
        }
        let mut hr = msg.header.reader();
        let k = hr
            .read_bits(cfg.k_field_bits())
            .ok_or(CodecError::MalformedMessage("header truncated"))? as usize;
        if k > cfg.k_max as usize {
            return Err(CodecError::MalformedMessage("K field exceeds k_max"));
        }
        let width = cfg.payload_bits(k);
        if msg.payload.len() != width {
            return Err(CodecError::MalformedMessage("payload length mismatch"));
        }
        let r = msg
            .payload
            .reader()
            .read_big(width)
            .ok_or(CodecError::MalformedMessage("payload truncated"))?;
        Ok(EnumerativeDecoder { set: unrank(cfg.population, k, &r)? })
    }

    /// The exactly recovered set.
    pub fn set(&self) -> &DecodedSet {
        &self.set
    }

    pub fn query(&self, id: u64) -> bool {
        self.set.contains(id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_subset_ranks_zero() {
        let s = DecodedSet::new(5, vec![0, 1]).unwrap();
        assert!(rank(&s).is_zero());
        let last = DecodedSet::new(5, vec![3, 4]).unwrap();
        assert_eq!(rank(&last), BigUint::from(9u32)); // C(5,2) - 1
    }

    #[test]
    fn exhaustive_bijection_n10_k3() {
        // All C(10,3) = 120 subsets roundtrip through rank/unrank and the
        // ranks cover 0..120 exactly once.
        let mut seen = [false; 120];
        for a in 0..10u64 {
            for b in a + 1..10 {
                for c in b + 1..10 {
                    let s = DecodedSet::new(10, vec![a, b, c]).unwrap();
                    let r = rank(&s);
                    let idx: u64 = r.clone().try_into().unwrap();
                    assert!(!seen[idx as usize], "rank collision at {idx}");
                    seen[idx as usize] = true;
                    assert_eq!(unrank(10, 3, &r).unwrap(), s);
                }
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn wire_roundtrip() {
        let cfg = EnumerativeConfig::new(1 << 32, 300).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for k in [0usize, 1, 7, 100] {
            let set = DecodedSet::sample(1 << 32, k, &mut rng);
            let msg = encode(&set, &cfg).unwrap();
            let dec = EnumerativeDecoder::new(&msg, &cfg).unwrap();
            assert_eq!(dec.set(), &set);
            for &m in set.members() {
                assert!(dec.query(m));
            }
            assert!(!dec.query(set.members().iter().max().map_or(5, |m| m ^ 1)) || k > 0);
        }
    }

    #[test]
    fn paper_scale_message_length() {
        // N = 2^32, K = 100: payload is ⌈log2 C(2^32, 100)⌉ ≈ 2675 bits.
        let cfg = EnumerativeConfig::new(1 << 32, 300).unwrap();
        let bits = cfg.payload_bits(100);
        assert!((2674..=2676).contains(&bits), "got {bits}");
    }

    #[test]
    fn rank_out_of_range_rejected() {
        let c = binomial(10, 3);
        assert!(matches!(
            unrank(10, 3, &c),
            Err(CodecError::MalformedMessage("rank out of range"))
        ));
    }

    #[test]
    fn zero_k_is_empty_message() {
        let cfg = EnumerativeConfig::new(4096, 16).unwrap();
        let msg = encode(&DecodedSet::empty(4096), &cfg).unwrap();
        assert_eq!(msg.payload.len(), 0);
        let dec = EnumerativeDecoder::new(&msg, &cfg).unwrap();
        assert_eq!(dec.set().k(), 0);
        assert!(!dec.query(0));
    }
}
