//! MSB-first bit strings with exact lengths, the wire representation of
//! feedback messages. The final byte is zero-padded at the least significant
//! end so hex dumps are stable.

use num_bigint::BigUint;
use num_traits::Zero;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitString {
    bytes: Vec<u8>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn zeros(len: usize) -> Self {
        BitString { bytes: vec![0u8; len.div_ceil(8)], len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push_bit(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[self.len / 8] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    /// Append the low `width` bits of `value`, most significant first.
    pub fn push_bits(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        debug_assert!(width == 64 || value < (1u64 << width) || width == 0);
        for i in (0..width).rev() {
            self.push_bit(value >> i & 1 != 0);
        }
    }

    /// Append a big integer in exactly `width` bits, most significant first.
    /// Panics if the value does not fit.
    pub fn push_big(&mut self, value: &BigUint, width: usize) {
        assert!(value.bits() as usize <= width || value.is_zero());
        for i in (0..width).rev() {
            self.push_bit(value.bit(i as u64));
        }
    }

    pub fn bit(&self, idx: usize) -> bool {
        assert!(idx < self.len);
        self.bytes[idx / 8] & (0x80 >> (idx % 8)) != 0
    }

    pub fn set_bit(&mut self, idx: usize) {
        assert!(idx < self.len);
        self.bytes[idx / 8] |= 0x80 >> (idx % 8);
    }

    pub fn extend(&mut self, other: &BitString) {
        for i in 0..other.len {
            self.push_bit(other.bit(i));
        }
    }

    /// Lowercase hex of the packed bytes (MSB-first, zero-padded tail).
    pub fn to_hex(&self) -> String {
        self.bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: self, pos: 0 }
    }
}

pub struct BitReader<'a> {
    bits: &'a BitString,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn read_bits(&mut self, width: u32) -> Option<u64> {
        debug_assert!(width <= 64);
        if self.remaining() < width as usize {
            return None;
        }
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | u64::from(self.bits.bit(self.pos));
            self.pos += 1;
        }
        Some(v)
    }

    pub fn read_big(&mut self, width: usize) -> Option<BigUint> {
        if self.remaining() < width {
            return None;
        }
        let mut v = BigUint::zero();
        for _ in 0..width {
            v <<= 1u8;
            if self.bits.bit(self.pos) {
                v |= BigUint::from(1u8);
            }
            self.pos += 1;
        }
        Some(v)
    }
}

/// Bits needed to store values 0..=max, i.e. ⌈log2(max + 1)⌉.
pub fn field_width_for(max: u64) -> u32 {
    64 - max.leading_zeros()
}
