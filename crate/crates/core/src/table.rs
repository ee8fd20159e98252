//! Bit-packed truth tables.
//!
//! A Boolean function of `n` variables is stored as its value vector: entry
//! `x` (for `x` in `0..2^n`, read as the integer encoding of the input
//! vector) is `f(x)`, with index 0 holding `f(0…0)`. Bit 0 is the least
//! significant position throughout.

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use rand::RngCore;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Maximum supported variable count (tables of length 2^16).
pub const MAX_N: u32 = 16;

/// The value vector of a Boolean function, bit-packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: u32,
    words: Vec<u64>,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl TruthTable {
    /// The constant-zero function of `n` variables.
    pub fn zeros(n: u32) -> Result<Self> {
        if !(1..=MAX_N).contains(&n) {
            return Err(Error::InvalidVariableCount { n });
        }
        let len = 1usize << n;
        Ok(Self {
            n,
            words: vec![0; word_count(len)],
        })
    }

    /// The constant-one function of `n` variables.
    pub fn ones(n: u32) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        let len = t.len();
        for w in &mut t.words {
            *w = u64::MAX;
        }
        t.mask_tail(len);
        Ok(t)
    }

    /// Builds a table from explicit 0/1 entries; `bits.len()` must be `2^n`.
    pub fn from_bits(n: u32, bits: &[u8]) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        if bits.len() != t.len() {
            return Err(Error::LengthMismatch {
                expected: t.len(),
                actual: bits.len(),
            });
        }
        for (i, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => t.set(i, true),
                value => return Err(Error::InvalidBit { index: i, value }),
            }
        }
        Ok(t)
    }

    /// Builds a table by evaluating `f` on every input index.
    pub fn from_fn(n: u32, mut f: impl FnMut(usize) -> bool) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        for i in 0..t.len() {
            if f(i) {
                t.set(i, true);
            }
        }
        Ok(t)
    }

    /// Builds an `n ≤ 6` table directly from its packed word.
    pub fn from_word(n: u32, word: u64) -> Result<Self> {
        if !(1..=6).contains(&n) {
            return Err(Error::InvalidVariableCount { n });
        }
        let len = 1usize << n;
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Ok(Self {
            n,
            words: vec![word & mask],
        })
    }

    /// Uniformly random table: each entry an independent fair bit.
    pub fn random(n: u32, rng: &mut RandomSource) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        let len = t.len();
        for w in &mut t.words {
            *w = rng.next_u64();
        }
        t.mask_tail(len);
        Ok(t)
    }

    /// Parses the hexadecimal encoding: most significant hex digit first,
    /// entry 0 of the table in the least significant bit.
    pub fn from_hex(n: u32, text: &str) -> Result<Self> {
        let mut t = Self::zeros(n)?;
        let len = t.len();
        let digits = len.div_ceil(4);
        if text.len() != digits {
            return Err(Error::InvalidHex {
                text: text.to_owned(),
                reason: "wrong digit count for variable count",
            });
        }
        for (pos, ch) in text.chars().rev().enumerate() {
            let value = ch.to_digit(16).ok_or_else(|| Error::InvalidHex {
                text: text.to_owned(),
                reason: "non-hex digit",
            })? as u64;
            let bit_base = pos * 4;
            t.words[bit_base / 64] |= value << (bit_base % 64);
        }
        // A table shorter than its hex digits (n=1) must not carry spare bits.
        if len % 64 != 0 && t.words[len / 64] >> (len % 64) != 0 {
            return Err(Error::InvalidHex {
                text: text.to_owned(),
                reason: "encoded bits beyond table length",
            });
        }
        Ok(t)
    }

    /// Hexadecimal encoding (inverse of [`TruthTable::from_hex`]).
    pub fn to_hex(&self) -> String {
        let digits = self.len().div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit_base = d * 4;
            let nibble = (self.words[bit_base / 64] >> (bit_base % 64)) & 0xF;
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Table length `2^n`.
    pub fn len(&self) -> usize {
        1usize << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        debug_assert!(index < self.len());
        (self.words[index / 64] >> (index % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: usize, value: bool) {
        debug_assert!(index < self.len());
        let (w, b) = (index / 64, index % 64);
        if value {
            self.words[w] |= 1 << b;
        } else {
            self.words[w] &= !(1 << b);
        }
    }

    #[inline]
    pub fn flip(&mut self, index: usize) {
        debug_assert!(index < self.len());
        self.words[index / 64] ^= 1 << (index % 64);
    }

    /// Number of ones in the table (the function's Hamming weight).
    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Entries in index order.
    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Packed words, least significant bit = entry 0.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// The packed word of a short table (`n ≤ 6`).
    pub fn as_word(&self) -> Option<u64> {
        (self.n <= 6).then(|| self.words[0])
    }

    /// Cyclic left shift by `amount`: the entry at index `k` moves to index
    /// `(k − amount) mod 2^n`, i.e. `new[k] = old[(k + amount) mod 2^n]`.
    pub fn rotate_left(&self, amount: usize) -> Self {
        let len = self.len();
        let r = amount % len;
        if r == 0 {
            return self.clone();
        }
        let mut out = self.clone();
        if len <= 64 {
            let w = self.words[0];
            let rotated = (w >> r) | (w << (len - r));
            out.words[0] = rotated;
            out.mask_tail(len);
        } else {
            // Multi-word cyclic shift toward lower indices.
            let (word_shift, bit_shift) = (r / 64, r % 64);
            let words = self.words.len();
            for k in 0..words {
                let src = (k + word_shift) % words;
                let lo = self.words[src] >> bit_shift;
                let hi = if bit_shift == 0 {
                    0
                } else {
                    self.words[(src + 1) % words] << (64 - bit_shift)
                };
                out.words[k] = lo | hi;
            }
        }
        out
    }

    /// Clears any packed bits beyond the table length.
    fn mask_tail(&mut self, len: usize) {
        if len % 64 != 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << (len % 64)) - 1;
        }
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable(n={}, {})", self.n, self.to_hex())
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for TruthTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for TruthTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        let bit_len = text.len() * 4;
        if !bit_len.is_power_of_two() || bit_len < 4 {
            return Err(D::Error::custom("hex truth table must encode 2^n bits"));
        }
        let n = bit_len.trailing_zeros();
        TruthTable::from_hex(n, &text).map_err(D::Error::custom)
    }
}
