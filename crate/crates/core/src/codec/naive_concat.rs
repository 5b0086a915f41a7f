//! Identifier concatenation: the baseline that simply lists 32-bit user
//! identifiers. Exact when everything fits; under a fixed bit budget only a
//! random ⌈B/32⌉-subset is listed, trading false negatives (never false
//! positives) for the cap.

use super::bits::BitString;
use super::{CodecError, DecodedSet, FeedbackMessage, Scheme};

pub const ID_BITS: usize = 32;

#[derive(Debug, Clone)]
pub struct NaiveConcatConfig {
    bit_budget: Option<usize>,
}

impl NaiveConcatConfig {
    /// Unbounded variant: every member is listed.
    pub fn unbounded() -> Self {
        NaiveConcatConfig { bit_budget: None }
    }

    /// Fixed-budget variant: at most ⌈budget/32⌉ identifiers are listed.
    pub fn with_budget(bit_budget: usize) -> Self {
        NaiveConcatConfig { bit_budget: Some(bit_budget) }
    }

    pub fn bit_budget(&self) -> Option<usize> {
        self.bit_budget
    }

    /// Identifier capacity, ⌈B/32⌉, when budgeted.
    pub fn capacity_ids(&self) -> Option<usize> {
        self.bit_budget.map(|b| b.div_ceil(ID_BITS))
    }

    pub fn payload_bits(&self, k: usize) -> usize {
        let kept = match self.capacity_ids() {
            Some(cap) => k.min(cap),
            None => k,
        };
        kept * ID_BITS
    }

    /// ε_fn = 1 − ⌈B/32⌉/K when K exceeds the capacity, else 0.
    pub fn analytic_fn(&self, k: usize) -> f64 {
        match self.capacity_ids() {
            Some(cap) if k > cap => 1.0 - cap as f64 / k as f64,
            _ => 0.0,
        }
    }
}

pub fn encode(set: &DecodedSet, cfg: &NaiveConcatConfig) -> Result<FeedbackMessage, CodecError> {
    if let Some(&top) = set.members().last() {
        if top > u32::MAX as u64 {
            return Err(CodecError::InvalidSet(format!(
                "identifier {top} does not fit {ID_BITS} bits"
            )));
        }
    }
    if let Some(cap) = cfg.capacity_ids() {
        if set.k() > cap {
            return Err(CodecError::CapacityExceeded { k: set.k(), capacity: cap });
        }
    }
    let mut payload = BitString::new();
    for &member in set.members() {
        payload.push_bits(member, ID_BITS as u32);
    }
    Ok(FeedbackMessage { scheme: Scheme::NaiveConcat, header: BitString::new(), payload })
}

pub struct NaiveConcatDecoder {
    ids: Vec<u64>, // sorted
}

impl NaiveConcatDecoder {
    pub fn new(msg: &FeedbackMessage, cfg: &NaiveConcatConfig) -> Result<Self, CodecError> {
        if msg.scheme != Scheme::NaiveConcat {
            return Err(CodecError::SchemeMismatch {
                expected: Scheme::NaiveConcat,
                got: msg.scheme,
            });
        }
        if !msg.payload.len().is_multiple_of(ID_BITS) {
            return Err(CodecError::MalformedMessage("payload not a whole number of ids"));
        }
        let count = msg.payload.len() / ID_BITS;
        if let Some(cap) = cfg.capacity_ids() {
            if count > cap {
                return Err(CodecError::MalformedMessage("more ids than the budget allows"));
            }
        }
        let mut pr = msg.payload.reader();
        let mut ids: Vec<u64> = (0..count)
            .map(|_| pr.read_bits(ID_BITS as u32))
            .collect::<Option<_>>()
            .ok_or(CodecError::MalformedMessage("payload truncated"))?;
        ids.sort_unstable();
        Ok(NaiveConcatDecoder { ids })
    }

    pub fn query(&self, id: u64) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    /// The listed identifiers (the kept subset).
    pub fn ids(&self) -> &[u64] {
        &self.ids
    }
}
