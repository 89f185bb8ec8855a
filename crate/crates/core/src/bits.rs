//! Bit strings and the self-delimiting integer code used by program encodings.

use std::fmt;

/// A finite binary string, most significant (first written) bit first.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    /// The `len`-bit big-endian representation of `value`.
    pub fn from_value(value: u128, len: usize) -> Self {
        assert!(len <= 128, "at most 128 bits");
        assert!(len == 128 || value >> len == 0, "value {value} does not fit in {len} bits");
        Bits((0..len).rev().map(|i| (value >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn push_value(&mut self, value: u128, len: usize) {
        self.extend_from(&Bits::from_value(value, len));
    }

    /// Big-endian value; `None` if longer than 128 bits.
    pub fn value(&self) -> Option<u128> {
        if self.0.len() > 128 {
            return None;
        }
        Some(self.0.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128))
    }

    /// `<len>:<hex>`, the hex digits holding the value right-aligned.
    pub fn to_prefixed_hex(&self) -> String {
        let digits = self.len().div_ceil(4);
        let mut s = format!("{}:", self.len());
        // pad on the left to a whole number of nibbles
        let pad = digits * 4 - self.len();
        let padded: Vec<bool> = std::iter::repeat_n(false, pad).chain(self.0.iter().copied()).collect();
        for chunk in padded.chunks(4) {
            let nib = chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8);
            s.push(char::from_digit(nib as u32, 16).unwrap());
        }
        s
    }

    pub fn parse_prefixed_hex(s: &str) -> Option<Bits> {
        let (len, hex) = s.split_once(':')?;
        let len: usize = len.parse().ok()?;
        if hex.len() != len.div_ceil(4) {
            return None;
        }
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let nib = c.to_digit(16)?;
            for i in (0..4).rev() {
                bits.push((nib >> i) & 1 == 1);
            }
        }
        let pad = bits.len() - len;
        if bits[..pad].iter().any(|&b| b) {
            return None;
        }
        Some(Bits(bits[pad..].to_vec()))
    }

    pub fn reader(&self) -> BitReader<'_> {
        BitReader { bits: &self.0, pos: 0 }
    }
}

impl From<Vec<bool>> for Bits {
    fn from(v: Vec<bool>) -> Self {
        Bits(v)
    }
}

impl std::str::FromStr for Bits {
    type Err = String;

    /// Parses a string of `0`/`1` characters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("not a binary digit: {other:?}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Bits)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bits({self})")
    }
}

pub struct BitReader<'a> {
    bits: &'a [bool],
    pos: usize,
}

impl BitReader<'_> {
    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn read_bit(&mut self) -> Option<bool> {
        let b = *self.bits.get(self.pos)?;
        self.pos += 1;
        Some(b)
    }

    pub fn read_value(&mut self, len: usize) -> Option<u128> {
        if len > 128 || self.remaining() < len {
            return None;
        }
        let v = self.bits[self.pos..self.pos + len]
            .iter()
            .fold(0u128, |acc, &b| (acc << 1) | b as u128);
        self.pos += len;
        Some(v)
    }

    pub fn read_bits(&mut self, len: usize) -> Option<Bits> {
        if self.remaining() < len {
            return None;
        }
        let out = Bits(self.bits[self.pos..self.pos + len].to_vec());
        self.pos += len;
        Some(out)
    }

    pub fn rest(&mut self) -> Bits {
        let out = Bits(self.bits[self.pos..].to_vec());
        self.pos = self.bits.len();
        out
    }

    /// Reads an Elias gamma codeword; `None` on truncation or overflow.
    pub fn read_gamma(&mut self) -> Option<u64> {
        let mut zeros = 0usize;
        loop {
            match self.read_bit()? {
                false => zeros += 1,
                true => break,
            }
            if zeros > 63 {
                return None;
            }
        }
        let tail = self.read_value(zeros)? as u64;
        Some((1u64 << zeros) | tail)
    }
}

/// Elias gamma code of `v ≥ 1`: `⌊log2 v⌋` zeros, then the binary form of `v`.
pub fn gamma(v: u64) -> Bits {
    assert!(v >= 1, "gamma code is defined for positive integers");
    let width = 64 - v.leading_zeros() as usize;
    let mut out = Bits(vec![false; width - 1]);
    out.push_value(v as u128, width);
    out
}

pub fn gamma_len(v: u64) -> usize {
    assert!(v >= 1);
    2 * (63 - v.leading_zeros() as usize) + 1
}
