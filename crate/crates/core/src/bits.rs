//! Packed bit strings.
//!
//! Bit `j` of a string lives in word `j / 64` at position `j % 64`. Bits past
//! `len` in the last word are always zero, so derived equality, ordering and
//! hashing are well defined.
//!
//! The text form writes bit 0 first: `"011"` has bit 0 clear and bits 1 and 2
//! set.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = BitString {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        b.clear_tail();
        b
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut b = BitString::zeros(0);
        for bit in bits {
            b.push(bit);
        }
        b
    }

    /// The low `len` bits of `value`, bit 0 first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut b = BitString::zeros(len);
        if len > 0 {
            b.words[0] = if len == 64 {
                value
            } else {
                value & ((1u64 << len) - 1)
            };
        }
        b
    }

    /// Little-endian integer value; only valid for strings of at most 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "to_u64 supports at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len, "bit {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD);
        if bit {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        let i = self.len - 1;
        self.set(i, bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        for bit in other.iter() {
            self.push(bit);
        }
    }

    pub fn concat<'a, I: IntoIterator<Item = &'a BitString>>(parts: I) -> BitString {
        let mut out = BitString::zeros(0);
        for p in parts {
            out.extend_from(p);
        }
        out
    }

    pub fn slice(&self, range: Range<usize>) -> BitString {
        assert!(
            range.end <= self.len,
            "slice {range:?} out of range {}",
            self.len
        );
        BitString::from_bools(range.map(|i| self.get(i)))
    }

    /// Bits at the given positions, in order.
    pub fn select(&self, positions: &[usize]) -> BitString {
        BitString::from_bools(positions.iter().map(|&p| self.get(p)))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn xor_assign(&mut self, other: &BitString) {
        assert_eq!(
            self.len, other.len,
            "xor of bit strings with different lengths"
        );
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of `popcount(self AND other)`.
    pub fn and_parity(&self, other: &BitString) -> bool {
        assert_eq!(self.len, other.len);
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn and_count(&self, other: &BitString) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Lowercase hex, four bits per digit with bit `4k` as the most
    /// significant bit of digit `k`. The final digit is zero padded.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.len.div_ceil(4));
        for chunk in 0..self.len.div_ceil(4) {
            let mut digit = 0u32;
            for k in 0..4 {
                let i = chunk * 4 + k;
                if i < self.len && self.get(i) {
                    digit |= 8 >> k;
                }
            }
            s.push(char::from_digit(digit, 16).unwrap());
        }
        s
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<BitString> {
        if hex.len() != len.div_ceil(4) {
            return Err(Error::Parse {
                line: 0,
                msg: format!("hex key {hex:?} does not encode {len} bits"),
            });
        }
        let mut b = BitString::zeros(len);
        for (chunk, c) in hex.chars().enumerate() {
            let digit = c.to_digit(16).ok_or_else(|| Error::Parse {
                line: 0,
                msg: format!("invalid hex digit {c:?}"),
            })?;
            for k in 0..4 {
                let i = chunk * 4 + k;
                let bit = digit & (8 >> k) != 0;
                if i < len {
                    b.set(i, bit);
                } else if bit {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("hex key {hex:?} has padding bits set"),
                    });
                }
            }
        }
        Ok(b)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut b = BitString::zeros(0);
        for c in s.trim().chars() {
            match c {
                '0' => b.push(false),
                '1' => b.push(true),
                '_' => {}
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("invalid bit {other:?} in {s:?}"),
                    })
                }
            }
        }
        Ok(b)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_and_order() {
        let b: BitString = "0110".parse().unwrap();
        assert!(!b.get(0) && b.get(1) && b.get(2) && !b.get(3));
        assert_eq!(b.to_string(), "0110");
        assert_eq!(b.to_u64(), 0b0110);
    }

    #[test]
    fn push_crosses_word_boundary() {
        let mut b = BitString::ones(63);
        b.push(true);
        b.push(false);
        b.push(true);
        assert_eq!(b.len(), 66);
        assert_eq!(b.count_ones(), 65);
        assert_eq!(b.words().len(), 2);
    }

    #[test]
    fn hex_is_msb_first_per_digit() {
        let b: BitString = "10000".parse().unwrap();
        assert_eq!(b.to_hex(), "80");
        assert_eq!(BitString::from_hex("80", 5).unwrap(), b);
        assert!(BitString::from_hex("84", 5).is_err());
        assert_eq!(BitString::zeros(0).to_hex(), "");
    }

    #[test]
    fn ones_clears_tail() {
        assert_eq!(BitString::ones(3), "111".parse().unwrap());
        assert_eq!(BitString::ones(3).count_ones(), 3);
    }
}
