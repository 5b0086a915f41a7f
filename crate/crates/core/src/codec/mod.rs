//! Feedback encoders and decoders: five ways to tell up to K' users out of a
//! population of N that their packet was decoded.
//!
//! All schemes share the same surface: `encode` turns a [`DecodedSet`] into a
//! bit-exact [`FeedbackMessage`], `Decoder::query` answers the per-user
//! membership question. An erasure (modeled as `None` on the decode path)
//! always answers `false` — a user that cannot read the feedback must
//! retransmit.

pub mod bits;
pub mod bloom;
pub mod enumerative;
pub mod hash_concat;
pub mod le;
pub mod naive_concat;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use bits::BitString;
pub use bloom::{BloomConfig, BloomDecoder};
pub use enumerative::{EnumerativeConfig, EnumerativeDecoder};
pub use hash_concat::{HashConcatConfig, HashConcatDecoder};
pub use le::{LeConfig, LeDecoder};
pub use naive_concat::{NaiveConcatConfig, NaiveConcatDecoder};

/// Maximum population size: identifiers are 64-bit.
pub const MAX_POPULATION: u128 = 1 << 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("decoded set invalid: {0}")]
    InvalidSet(String),
    #[error("invalid scheme configuration: {0}")]
    InvalidConfig(String),
    #[error("set of {k} users exceeds scheme capacity {capacity}")]
    CapacityExceeded { k: usize, capacity: usize },
    #[error("all {0} hash trials produced a singular system")]
    EncodingFailed(u32),
    #[error("malformed message: {0}")]
    MalformedMessage(&'static str),
    #[error("message encoded with {got:?}, decoder configured for {expected:?}")]
    SchemeMismatch { expected: Scheme, got: Scheme },
}

/// The five wire formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    LinearEquations,
    Bloom,
    HashConcat,
    Enumerative,
    NaiveConcat,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::LinearEquations => "le",
            Scheme::Bloom => "bloom",
            Scheme::HashConcat => "hashconcat",
            Scheme::Enumerative => "enumerative",
            Scheme::NaiveConcat => "naiveconcat",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "le" => Ok(Scheme::LinearEquations),
            "bloom" => Ok(Scheme::Bloom),
            "hashconcat" => Ok(Scheme::HashConcat),
            "enumerative" => Ok(Scheme::Enumerative),
            "naiveconcat" => Ok(Scheme::NaiveConcat),
            other => Err(format!("unknown scheme '{other}'")),
        }
    }
}

/// The set S of decoded user identifiers: strictly increasing members, all
/// below the population size N (N ≤ 2^64, typically a power of two).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodedSet {
    population: u128,
    members: Vec<u64>,
}

impl DecodedSet {
    pub fn new(population: u128, mut members: Vec<u64>) -> Result<Self, CodecError> {
        if population == 0 || population > MAX_POPULATION {
            return Err(CodecError::InvalidSet(format!(
                "population {population} outside 1..=2^64"
            )));
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(CodecError::InvalidSet("duplicate member".into()));
        }
        if let Some(&last) = members.last() {
            if last as u128 >= population {
                return Err(CodecError::InvalidSet(format!(
                    "member {last} >= population {population}"
                )));
            }
        }
        Ok(DecodedSet { population, members })
    }

    pub fn empty(population: u128) -> Self {
        DecodedSet::new(population, Vec::new()).expect("empty set is always valid")
    }

    /// Uniform draw from all K-element subsets of [0, N).
    pub fn sample(population: u128, k: usize, rng: &mut impl Rng) -> Self {
        assert!((k as u128) <= population);
        let mut members = std::collections::HashSet::with_capacity(k);
        while members.len() < k {
            let id = if population == MAX_POPULATION {
                rng.gen::<u64>()
            } else {
                rng.gen_range(0..population as u64)
            };
            members.insert(id);
        }
        DecodedSet::new(population, members.into_iter().collect()).unwrap()
    }

    pub fn population(&self) -> u128 {
        self.population
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn contains(&self, id: u64) -> bool {
        self.members.binary_search(&id).is_ok()
    }

    /// Uniformly keep `k_max` members, dropping the rest — the overload
    /// policy when more users were decoded than the feedback provisions for.
    pub fn random_subset(&self, k_max: usize, rng: &mut impl Rng) -> DecodedSet {
        if self.k() <= k_max {
            return self.clone();
        }
        let mut members = self.members.clone();
        members.shuffle(rng);
        members.truncate(k_max);
        DecodedSet::new(self.population, members).unwrap()
    }
}

/// Bit-exact encoded acknowledgment: scheme-dependent header (trial counter
/// and/or K field) plus the payload whose length is the scheme's B formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackMessage {
    pub scheme: Scheme,
    pub header: BitString,
    pub payload: BitString,
}

impl FeedbackMessage {
    /// Total transmitted length in bits.
    pub fn wire_bits(&self) -> usize {
        self.header.len() + self.payload.len()
    }

    /// Golden-test dump: `scheme,N,K,seed,trial,hex(payload)`.
    pub fn dump_line(&self, population: u128, k: usize, seed: u64, trial: u16) -> String {
        format!(
            "{},{},{},{:#x},{},{}",
            self.scheme.label(),
            population,
            k,
            seed,
            trial,
            self.payload.to_hex()
        )
    }
}

/// Per-scheme parameters under one roof; see each scheme module for the
/// constructors that derive widths and hash counts from a target ε_fp.
#[derive(Debug, Clone)]
pub enum SchemeConfig {
    LinearEquations(LeConfig),
    Bloom(BloomConfig),
    HashConcat(HashConcatConfig),
    Enumerative(EnumerativeConfig),
    NaiveConcat(NaiveConcatConfig),
}

impl SchemeConfig {
    pub fn scheme(&self) -> Scheme {
        match self {
            SchemeConfig::LinearEquations(_) => Scheme::LinearEquations,
            SchemeConfig::Bloom(_) => Scheme::Bloom,
            SchemeConfig::HashConcat(_) => Scheme::HashConcat,
            SchemeConfig::Enumerative(_) => Scheme::Enumerative,
            SchemeConfig::NaiveConcat(_) => Scheme::NaiveConcat,
        }
    }

    /// Maximum K the scheme can encode, if bounded.
    pub fn capacity(&self) -> Option<usize> {
        match self {
            SchemeConfig::LinearEquations(c) => Some(c.k_max() as usize),
            SchemeConfig::Bloom(_) => None,
            SchemeConfig::HashConcat(c) => Some(c.k_max() as usize),
            SchemeConfig::Enumerative(c) => Some(c.k_max() as usize),
            SchemeConfig::NaiveConcat(c) => c.capacity_ids(),
        }
    }

    /// Payload length B in bits for a set of cardinality k — the scheme's
    /// message-length formula.
    pub fn payload_bits(&self, k: usize) -> usize {
        match self {
            SchemeConfig::LinearEquations(c) => c.payload_bits(k),
            SchemeConfig::Bloom(c) => c.message_bits(),
            SchemeConfig::HashConcat(c) => c.payload_bits(k),
            SchemeConfig::Enumerative(c) => c.payload_bits(k),
            SchemeConfig::NaiveConcat(c) => c.payload_bits(k),
        }
    }

    /// Expected false-positive probability when k users are encoded.
    pub fn analytic_fp(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match self {
            SchemeConfig::LinearEquations(c) => c.analytic_fp(),
            SchemeConfig::Bloom(c) => c.analytic_fp_exact(k),
            SchemeConfig::HashConcat(c) => c.analytic_fp(k),
            SchemeConfig::Enumerative(_) | SchemeConfig::NaiveConcat(_) => 0.0,
        }
    }

    /// False-negative probability when k users were decoded (only the
    /// overloaded identifier-concatenation scheme drops members).
    pub fn analytic_fn(&self, k: usize) -> f64 {
        match self {
            SchemeConfig::NaiveConcat(c) => c.analytic_fn(k),
            _ => 0.0,
        }
    }

    pub fn encode(&self, set: &DecodedSet) -> Result<FeedbackMessage, CodecError> {
        match self {
            SchemeConfig::LinearEquations(c) => le::encode(set, c),
            SchemeConfig::Bloom(c) => bloom::encode(set, c),
            SchemeConfig::HashConcat(c) => hash_concat::encode(set, c),
            SchemeConfig::Enumerative(c) => enumerative::encode(set, c),
            SchemeConfig::NaiveConcat(c) => naive_concat::encode(set, c),
        }
    }

    /// Encode with the overload policy applied: when K exceeds the scheme
    /// capacity, a uniformly random subset is kept (the dropped members
    /// become false negatives). Returns the message and the kept set.
    pub fn encode_capped(
        &self,
        set: &DecodedSet,
        rng: &mut impl Rng,
    ) -> Result<(FeedbackMessage, DecodedSet), CodecError> {
        let kept = match self.capacity() {
            Some(cap) if set.k() > cap => set.random_subset(cap, rng),
            _ => set.clone(),
        };
        let msg = self.encode(&kept)?;
        Ok((msg, kept))
    }

    /// Decode a possibly-erased message for one user. An erasure decodes to
    /// `false` by definition.
    pub fn decode(
        &self,
        received: Option<&FeedbackMessage>,
        id: u64,
    ) -> Result<bool, CodecError> {
        match received {
            None => Ok(false),
            Some(msg) => Ok(Decoder::new(self, msg)?.query(id)),
        }
    }
}

/// Parsed message ready for repeated membership queries. Parsing once and
/// querying many times is what the probing loops need.
pub enum Decoder {
    Le(LeDecoder),
    Bloom(BloomDecoder),
    HashConcat(HashConcatDecoder),
    Enumerative(EnumerativeDecoder),
    NaiveConcat(NaiveConcatDecoder),
}

impl Decoder {
    pub fn new(cfg: &SchemeConfig, msg: &FeedbackMessage) -> Result<Self, CodecError> {
        if msg.scheme != cfg.scheme() {
            return Err(CodecError::SchemeMismatch { expected: cfg.scheme(), got: msg.scheme });
        }
        Ok(match cfg {
            SchemeConfig::LinearEquations(c) => Decoder::Le(LeDecoder::new(msg, c)?),
            SchemeConfig::Bloom(c) => Decoder::Bloom(BloomDecoder::new(msg, c)?),
            SchemeConfig::HashConcat(c) => Decoder::HashConcat(HashConcatDecoder::new(msg, c)?),
            SchemeConfig::Enumerative(c) => {
                Decoder::Enumerative(EnumerativeDecoder::new(msg, c)?)
            }
            SchemeConfig::NaiveConcat(c) => {
                Decoder::NaiveConcat(NaiveConcatDecoder::new(msg, c)?)
            }
        })
    }

    pub fn query(&self, id: u64) -> bool {
        match self {
            Decoder::Le(d) => d.query(id),
            Decoder::Bloom(d) => d.query(id),
            Decoder::HashConcat(d) => d.query(id),
            Decoder::Enumerative(d) => d.query(id),
            Decoder::NaiveConcat(d) => d.query(id),
        }
    }
}
