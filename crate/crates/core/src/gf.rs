//! Arithmetic in GF(2^b) for 1 ≤ b ≤ 32 and dense linear solving.
//!
//! Elements are machine integers below 2^b; addition is XOR. Multiplication
//! reduces modulo a fixed irreducible polynomial per width, so encoder and
//! decoder agree bit-exactly without negotiation. For b ≤ 16 a log/antilog
//! table pair is built at construction; wider fields fall back to shift-and-add
//! multiplication.

use thiserror::Error;

/// Reduction polynomial per width, leading x^b term implicit. Entry `b` holds
/// the lexicographically smallest irreducible of degree b (with nonzero
/// constant term), e.g. index 8 is 0x1B for x^8 + x^4 + x^3 + x + 1.
pub const DEFAULT_POLYS: [u32; 33] = [
    0, // width 0 unused
    0x1, 0x3, 0x3, 0x3, 0x5, 0x3, 0x3, 0x1B, 0x3, 0x9, 0x5, 0x9, 0x1B, 0x21, 0x3, 0x2B, 0x9, 0x9,
    0x27, 0x9, 0x5, 0x3, 0x21, 0x1B, 0x9, 0x1B, 0x27, 0x3, 0x5, 0x3, 0x9, 0x8D,
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GfError {
    #[error("field width {0} outside 1..=32")]
    InvalidWidth(u32),
    #[error("polynomial 0x{poly:X} is not irreducible of degree {width}")]
    ReduciblePolynomial { width: u32, poly: u32 },
    #[error("widths above 16 require the table polynomial (got 0x{poly:X}, want 0x{expected:X})")]
    UntabulatedPolynomial { poly: u32, expected: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("matrix is singular")]
    Singular,
}

/// A concrete GF(2^b) with its reduction polynomial and, for b ≤ 16, discrete
/// log/antilog tables. Immutable after construction and shareable across
/// threads.
#[derive(Debug, Clone)]
pub struct FieldSpec {
    width: u32,
    poly: u32,
    mask: u32,
    /// exp[i] = g^i for a primitive g, doubled in length so products of two
    /// logs index without a modular reduction. Empty for b > 16.
    exp: Vec<u32>,
    /// log[a] for a in 1..2^b; log[0] is unused. Empty for b > 16.
    log: Vec<u32>,
}

impl FieldSpec {
    /// Field of the given width with the default reduction polynomial.
    pub fn with_width(width: u32) -> Result<Self, GfError> {
        if !(1..=32).contains(&width) {
            return Err(GfError::InvalidWidth(width));
        }
        Self::new(width, DEFAULT_POLYS[width as usize])
    }

    /// Field with an explicit reduction polynomial (low bits, x^b implicit).
    ///
    /// Irreducibility is verified by exhaustive trial division for b ≤ 16;
    /// wider fields only accept the precomputed table entry.
    pub fn new(width: u32, poly: u32) -> Result<Self, GfError> {
        if !(1..=32).contains(&width) {
            return Err(GfError::InvalidWidth(width));
        }
        if width > 16 {
            let expected = DEFAULT_POLYS[width as usize];
            if poly != expected {
                return Err(GfError::UntabulatedPolynomial { poly, expected });
            }
        } else if !irreducible(width, poly) {
            return Err(GfError::ReduciblePolynomial { width, poly });
        }
        let mask = if width == 32 { u32::MAX } else { (1u32 << width) - 1 };
        let mut spec = FieldSpec { width, poly, mask, exp: Vec::new(), log: Vec::new() };
        if width <= 16 {
            spec.build_tables();
        }
        Ok(spec)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    /// Number of elements, 2^b.
    pub fn order(&self) -> u64 {
        1u64 << self.width
    }

    /// Addition (= subtraction) is XOR.
    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }

    /// Product in GF(2^b).
    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        debug_assert!(a <= self.mask && b <= self.mask);
        if !self.log.is_empty() {
            if a == 0 || b == 0 {
                return 0;
            }
            let la = self.log[a as usize] as usize;
            let lb = self.log[b as usize] as usize;
            self.exp[la + lb]
        } else {
            self.mul_slow(a, b)
        }
    }

    /// Shift-and-add multiplication with in-loop reduction; works for any
    /// width and is the reference the tables are built from.
    fn mul_slow(&self, mut a: u32, mut b: u32) -> u32 {
        let mut acc = 0u32;
        let top = 1u32 << (self.width - 1);
        for _ in 0..self.width {
            if b & 1 != 0 {
                acc ^= a;
            }
            b >>= 1;
            let carry = a & top != 0;
            a = (a << 1) & self.mask;
            if carry {
                a ^= self.poly;
            }
        }
        acc
    }

    /// a^e by square-and-multiply.
    pub fn pow(&self, mut a: u32, mut e: u64) -> u32 {
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 != 0 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: u32) -> Result<u32, GfError> {
        if a == 0 {
            return Err(GfError::ZeroInverse);
        }
        if !self.log.is_empty() {
            let group = (self.order() - 1) as usize;
            return Ok(self.exp[group - self.log[a as usize] as usize]);
        }
        // a^(2^b - 2) = a^{-1}
        Ok(self.pow(a, self.order() - 2))
    }

    fn build_tables(&mut self) {
        let group = (self.order() - 1) as usize;
        let mut exp = vec![0u32; 2 * group.max(1)];
        let mut log = vec![0u32; self.order() as usize];
        if group == 1 {
            // GF(2): trivial group.
            exp = vec![1, 1];
            log[1] = 0;
            self.exp = exp;
            self.log = log;
            return;
        }
        // Find the smallest primitive element by direct order check.
        let mut g = 2u32;
        'candidates: loop {
            let mut v = 1u32;
            for (i, slot) in exp.iter_mut().enumerate().take(group) {
                *slot = v;
                log[v as usize] = i as u32;
                v = self.mul_slow(v, g);
                if v == 1 && i + 1 < group {
                    g += 1;
                    continue 'candidates;
                }
            }
            debug_assert_eq!(v, 1);
            break;
        }
        exp.copy_within(0..group, group);
        self.exp = exp;
        self.log = log;
    }
}

/// Trial-division irreducibility test over GF(2), for degrees ≤ 16.
fn irreducible(width: u32, poly: u32) -> bool {
    let full = (1u64 << width) | poly as u64;
    if width == 1 {
        return true; // x and x+1 are both irreducible
    }
    if full & 1 == 0 {
        return false; // divisible by x
    }
    let deg = |p: u64| 63 - p.leading_zeros() as i32;
    for k in 1..=width / 2 {
        for q in (1u64 << k)..(1u64 << (k + 1)) {
            let mut r = full;
            while r != 0 && deg(r) >= k as i32 {
                r ^= q << (deg(r) - k as i32);
            }
            if r == 0 {
                return false;
            }
        }
    }
    true
}

/// Dense row-major matrix of field elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl FieldMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        FieldMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<u32>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        FieldMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v;
    }

    fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// H·x over the field.
    pub fn mul_vec(&self, x: &FieldVector, spec: &FieldSpec) -> FieldVector {
        assert_eq!(self.cols, x.len());
        let out = (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x.as_slice())
                    .fold(0u32, |acc, (&a, &b)| acc ^ spec.mul(a, b))
            })
            .collect();
        FieldVector(out)
    }
}

/// Column vector of field elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldVector(pub Vec<u32>);

impl FieldVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Inner product over the field.
    pub fn dot(&self, other: &FieldVector, spec: &FieldSpec) -> u32 {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .fold(0u32, |acc, (&a, &b)| acc ^ spec.mul(a, b))
    }
}

/// Solve H·z = y by Gaussian elimination with partial pivoting (first nonzero
/// pivot, deterministic). Returns `Singular` on rank deficiency, which signals
/// the caller to retry with a fresh hash trial.
pub fn solve(h: &FieldMatrix, y: &FieldVector, spec: &FieldSpec) -> Result<FieldVector, GfError> {
    assert_eq!(h.rows, h.cols, "square system expected");
    assert_eq!(h.rows, y.len());
    let n = h.rows;
    let mut a = h.data.clone();
    let mut b = y.0.clone();

    for p in 0..n {
        let pivot_row = (p..n)
            .find(|&r| a[r * n + p] != 0)
            .ok_or(GfError::Singular)?;
        if pivot_row != p {
            for c in p..n {
                a.swap(p * n + c, pivot_row * n + c);
            }
            b.swap(p, pivot_row);
        }
        let pivot_inv = spec.inv(a[p * n + p])?;
        if spec.log.is_empty() {
            eliminate_below_generic(&mut a, &mut b, spec, n, p, pivot_inv);
        } else {
            eliminate_below_tabled(&mut a, &mut b, spec, n, p, pivot_inv);
        }
    }

    // Back substitution.
    let mut z = vec![0u32; n];
    for p in (0..n).rev() {
        let mut acc = b[p];
        for c in p + 1..n {
            acc ^= spec.mul(a[p * n + c], z[c]);
        }
        z[p] = spec.mul(acc, spec.inv(a[p * n + p])?);
    }
    Ok(FieldVector(z))
}

fn eliminate_below_generic(
    a: &mut [u32],
    b: &mut [u32],
    spec: &FieldSpec,
    n: usize,
    p: usize,
    pivot_inv: u32,
) {
    for r in p + 1..n {
        let lead = a[r * n + p];
        if lead == 0 {
            continue;
        }
        let factor = spec.mul(lead, pivot_inv);
        a[r * n + p] = 0;
        let (top, bottom) = a.split_at_mut(r * n);
        let prow = &top[p * n + p + 1..p * n + n];
        let rrow = &mut bottom[p + 1..n];
        for (dst, &src) in rrow.iter_mut().zip(prow) {
            *dst ^= spec.mul(factor, src);
        }
        b[r] ^= spec.mul(factor, b[p]);
    }
}

/// Hot path for b ≤ 16: the factor's discrete log is hoisted out of the row
/// loop, leaving one branch and two table reads per updated element.
fn eliminate_below_tabled(
    a: &mut [u32],
    b: &mut [u32],
    spec: &FieldSpec,
    n: usize,
    p: usize,
    pivot_inv: u32,
) {
    let log = &spec.log[..];
    let exp = &spec.exp[..];
    for r in p + 1..n {
        let lead = a[r * n + p];
        if lead == 0 {
            continue;
        }
        let factor = spec.mul(lead, pivot_inv);
        if factor == 0 {
            continue; // only in GF(2) degenerate tables; lead != 0 implies factor != 0
        }
        let lf = log[factor as usize] as usize;
        a[r * n + p] = 0;
        let (top, bottom) = a.split_at_mut(r * n);
        let prow = &top[p * n + p + 1..p * n + n];
        let rrow = &mut bottom[p + 1..n];
        for (dst, &src) in rrow.iter_mut().zip(prow) {
            if src != 0 {
                *dst ^= exp[lf + log[src as usize] as usize];
            }
        }
        if b[p] != 0 {
            b[r] ^= exp[lf + log[b[p] as usize] as usize];
        }
    }
}
