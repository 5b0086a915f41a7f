//! Hash-concatenation feedback: one b-bit fingerprint per acknowledged user,
//! membership by fingerprint match. The S-MIM satellite system does the same
//! thing with CRCs. Costs about K·log2(K) bits more than optimal but needs no
//! linear algebra.

use super::bits::{field_width_for, BitString};
use super::{CodecError, DecodedSet, FeedbackMessage, Scheme};
use crate::hashing::{HashSeed, UniversalHasher};

#[derive(Debug, Clone)]
pub struct HashConcatConfig {
    fingerprint_bits: u32,
    k_max: u32,
    seed: u64,
}

impl HashConcatConfig {
    pub fn new(fingerprint_bits: u32, k_max: u32, seed: u64) -> Result<Self, CodecError> {
        if fingerprint_bits == 0 || fingerprint_bits > 64 {
            return Err(CodecError::InvalidConfig(format!(
                "fingerprint width {fingerprint_bits} outside 1..=64"
            )));
        }
        if k_max == 0 {
            return Err(CodecError::InvalidConfig("k_max must be at least 1".into()));
        }
        Ok(HashConcatConfig { fingerprint_bits, k_max, seed })
    }

    /// Fingerprint width for a design point (K, ε_fp):
    /// b = ⌈−log2(1 − (1−ε_fp)^{1/K})⌉, from ε_fp = 1 − (1 − 2^-b)^K.
    pub fn for_target(
        target_fp: f64,
        design_k: u32,
        k_max: u32,
        seed: u64,
    ) -> Result<Self, CodecError> {
        Self::new(fingerprint_bits_for(target_fp, design_k)?, k_max, seed)
    }

    pub fn fingerprint_bits(&self) -> u32 {
        self.fingerprint_bits
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn payload_bits(&self, k: usize) -> usize {
        k * self.fingerprint_bits as usize
    }

    pub fn header_bits(&self) -> usize {
        field_width_for(self.k_max as u64) as usize
    }

    /// ε_fp = 1 − (1 − 2^-b)^k exactly in expectation.
    pub fn analytic_fp(&self, k: usize) -> f64 {
        let per = 2f64.powi(-(self.fingerprint_bits as i32));
        -((-per).ln_1p() * k as f64).exp_m1()
    }

    fn k_field_bits(&self) -> u32 {
        field_width_for(self.k_max as u64)
    }
}

/// b = ⌈−log2(1 − (1−ε_fp)^{1/K})⌉ computed without cancellation.
pub fn fingerprint_bits_for(target_fp: f64, design_k: u32) -> Result<u32, CodecError> {
    if !(target_fp > 0.0 && target_fp < 1.0) || design_k == 0 {
        return Err(CodecError::InvalidConfig(format!(
            "invalid design point K={design_k}, eps_fp={target_fp}"
        )));
    }
    // 1 - (1-fp)^(1/K) = -expm1(ln(1-fp)/K)
    let per_user = -((-target_fp).ln_1p() / design_k as f64).exp_m1();
    let bits = (-per_user.log2()).ceil() as i64;
    if !(1..=64).contains(&bits) {
        return Err(CodecError::InvalidConfig(format!(
            "design point needs {bits} fingerprint bits (supported 1..=64)"
        )));
    }
    Ok(bits as u32)
}

pub fn encode(set: &DecodedSet, cfg: &HashConcatConfig) -> Result<FeedbackMessage, CodecError> {
    let k = set.k();
    if k > cfg.k_max as usize {
        return Err(CodecError::CapacityExceeded { k, capacity: cfg.k_max as usize });
    }
    let hasher = UniversalHasher::new(&HashSeed::new(cfg.seed, 0));
    let mut payload = BitString::new();
    for &member in set.members() {
        payload.push_bits(hasher.hash(member, cfg.fingerprint_bits), cfg.fingerprint_bits);
    }
    let mut header = BitString::new();
    header.push_bits(k as u64, cfg.k_field_bits());
    Ok(FeedbackMessage { scheme: Scheme::HashConcat, header, payload })
}

pub struct HashConcatDecoder {
    stored: Vec<u64>, // sorted, deduplicated fingerprints
    hasher: UniversalHasher,
    fingerprint_bits: u32,
}

impl HashConcatDecoder {
    pub fn new(msg: &FeedbackMessage, cfg: &HashConcatConfig) -> Result<Self, CodecError> {
        if msg.scheme != Scheme::HashConcat {
            return Err(CodecError::SchemeMismatch {
                expected: Scheme::HashConcat,
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
        if msg.payload.len() != k * cfg.fingerprint_bits as usize {
            return Err(CodecError::MalformedMessage("payload length mismatch"));
        }
        let mut pr = msg.payload.reader();
        let mut stored: Vec<u64> = (0..k)
            .map(|_| pr.read_bits(cfg.fingerprint_bits))
            .collect::<Option<_>>()
            .ok_or(CodecError::MalformedMessage("payload truncated"))?;
        stored.sort_unstable();
        stored.dedup();
        Ok(HashConcatDecoder {
            stored,
            hasher: UniversalHasher::new(&HashSeed::new(cfg.seed, 0)),
            fingerprint_bits: cfg.fingerprint_bits,
        })
    }

    pub fn query(&self, id: u64) -> bool {
        self.stored
            .binary_search(&self.hasher.hash(id, self.fingerprint_bits))
            .is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn width_formula() {
        // K=1 collapses to ⌈log2(1/eps)⌉.
        assert_eq!(fingerprint_bits_for(0.01, 1).unwrap(), 7);
        // eps=0.01, K=100 → 14 (direct evaluation of the closed form).
        assert_eq!(fingerprint_bits_for(0.01, 100).unwrap(), 14);
        assert!(fingerprint_bits_for(0.0, 10).is_err());
    }

    #[test]
    fn members_always_decode_true() {
        let cfg = HashConcatConfig::for_target(0.01, 100, 300, 0xAB).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let set = DecodedSet::sample(1 << 32, 100, &mut rng);
        let msg = encode(&set, &cfg).unwrap();
        assert_eq!(msg.payload.len(), 100 * 14);
        let dec = HashConcatDecoder::new(&msg, &cfg).unwrap();
        for &m in set.members() {
            assert!(dec.query(m));
        }
    }

    #[test]
    fn empty_set_rejects_everyone() {
        let cfg = HashConcatConfig::new(14, 100, 1).unwrap();
        let msg = encode(&DecodedSet::empty(1 << 32), &cfg).unwrap();
        let dec = HashConcatDecoder::new(&msg, &cfg).unwrap();
        assert!(!dec.query(0) && !dec.query(12345));
    }

    #[test]
    fn measured_fp_near_formula() {
        let cfg = HashConcatConfig::for_target(0.01, 100, 300, 0xCD).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let probes = 200_000u32;
        let mut fp = 0u32;
        for enc in 0..8u64 {
            let cfg_e = HashConcatConfig::new(14, 300, 0xCD00 + enc).unwrap();
            let set = DecodedSet::sample(1 << 32, 100, &mut rng);
            let msg = encode(&set, &cfg_e).unwrap();
            let dec = HashConcatDecoder::new(&msg, &cfg_e).unwrap();
            for _ in 0..probes / 8 {
                let id = rng.gen::<u64>();
                if !set.contains(id) && dec.query(id) {
                    fp += 1;
                }
            }
        }
        let p = cfg.analytic_fp(100);
        let sigma = (p * (1.0 - p) / probes as f64).sqrt();
        let rate = fp as f64 / probes as f64;
        assert!((rate - p).abs() < 4.0 * sigma, "rate {rate} vs formula {p}");
    }

    #[test]
    fn capacity_enforced() {
        let cfg = HashConcatConfig::new(8, 2, 1).unwrap();
        let set = DecodedSet::new(64, vec![1, 2, 3]).unwrap();
        assert_eq!(
            encode(&set, &cfg).unwrap_err(),
            CodecError::CapacityExceeded { k: 3, capacity: 2 }
        );
    }
}
