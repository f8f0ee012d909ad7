//! Fixed bijections and finite representations of points of Cantor space.
//!
//! Everything downstream (flat Borel codes, halting-answer strings, structure
//! encodings) depends on these bit-exactly:
//!
//! * [`pair`] / [`unpair`] is the Cantor pairing `(m+n)(m+n+1)/2 + n`.
//! * [`str_index`] enumerates `2^{<ω}` length-lexicographically, starting with
//!   the empty string: `ε, 0, 1, 00, 01, 10, 11, 000, …`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Cantor pairing.
pub fn pair(m: u64, n: u64) -> u64 {
    let s = m + n;
    s * (s + 1) / 2 + n
}

/// Inverse of [`pair`].
pub fn unpair(k: u64) -> (u64, u64) {
    // largest s with s(s+1)/2 <= k
    let mut s = (((8.0 * k as f64 + 1.0).sqrt() - 1.0) / 2.0) as u64;
    while s * (s + 1) / 2 > k {
        s -= 1;
    }
    while (s + 1) * (s + 2) / 2 <= k {
        s += 1;
    }
    let n = k - s * (s + 1) / 2;
    (s - n, n)
}

/// A finite binary string.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    pub fn from_bits(bits: impl IntoIterator<Item = bool>) -> Self {
        BitString(bits.into_iter().collect())
    }

    /// The `len` low bits of `value`, most significant first.
    pub fn from_value(value: u64, len: usize) -> Self {
        BitString((0..len).rev().map(|i| (value >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn with(&self, bit: bool) -> Self {
        let mut out = self.clone();
        out.push(bit);
        out
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len() <= other.len() && self.0[..] == other.0[..self.len()]
    }

    /// Inverse of [`str_index`].
    pub fn index(&self) -> u64 {
        let mut value = 0u64;
        for &b in &self.0 {
            value = (value << 1) | b as u64;
        }
        (1u64 << self.len()) - 1 + value
    }

    /// All strings of exactly `len` bits, in lexicographic order.
    pub fn all_of_len(len: usize) -> impl Iterator<Item = BitString> {
        (0..1u64 << len).map(move |v| BitString::from_value(v, len))
    }

    /// All strings of length at most `len`, in length-lexicographic order.
    pub fn all_up_to(len: usize) -> impl Iterator<Item = BitString> {
        (0..=len).flat_map(BitString::all_of_len)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseBitsError {
    #[error("invalid bit character {0:?}")]
    BadChar(char),
    #[error("malformed sequence {0:?}: expected `prefix|c:b` or `prefix|p:pattern`")]
    BadShape(String),
    #[error("periodic tail pattern must be nonempty")]
    EmptyPeriod,
}

impl FromStr for BitString {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "ε" {
            return Ok(BitString::new());
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ParseBitsError::BadChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitString)
    }
}

/// Position `k` of the length-lexicographic enumeration of `2^{<ω}`.
pub fn str_index(k: u64) -> BitString {
    // strings of length l occupy [2^l - 1, 2^{l+1} - 1)
    let len = (64 - (k + 1).leading_zeros() - 1) as usize;
    BitString::from_value(k + 1 - (1u64 << len), len)
}

/// Anything that can answer bit queries about a point of `2^ω`.
pub trait BitOracle: Sync {
    fn bit(&self, k: u64) -> bool;
}

impl<T: BitOracle + ?Sized> BitOracle for &T {
    fn bit(&self, k: u64) -> bool {
        (**self).bit(k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    Constant(bool),
    Periodic(BitString),
}

/// An eventually periodic point of Cantor space: a finite prefix followed by
/// either a constant or a nonempty repeating pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct InfiniteBitSeq {
    prefix: BitString,
    tail: Tail,
}

impl InfiniteBitSeq {
    pub fn constant(prefix: BitString, bit: bool) -> Self {
        InfiniteBitSeq { prefix, tail: Tail::Constant(bit) }
    }

    pub fn periodic(prefix: BitString, pattern: BitString) -> Result<Self, ParseBitsError> {
        if pattern.is_empty() {
            return Err(ParseBitsError::EmptyPeriod);
        }
        Ok(InfiniteBitSeq { prefix, tail: Tail::Periodic(pattern) })
    }

    pub fn zeros() -> Self {
        Self::constant(BitString::new(), false)
    }

    pub fn prefix(&self) -> &BitString {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn get(&self, k: u64) -> bool {
        seq_get(self, k)
    }

    /// The first `len` bits.
    pub fn take(&self, len: usize) -> BitString {
        BitString::from_bits((0..len as u64).map(|k| self.get(k)))
    }
}

impl BitOracle for InfiniteBitSeq {
    fn bit(&self, k: u64) -> bool {
        seq_get(self, k)
    }
}

pub fn seq_get(s: &InfiniteBitSeq, k: u64) -> bool {
    let plen = s.prefix.len() as u64;
    if k < plen {
        return s.prefix.0[k as usize];
    }
    match &s.tail {
        Tail::Constant(b) => *b,
        Tail::Periodic(p) => p.0[((k - plen) % p.len() as u64) as usize],
    }
}

/// Whether `s` lies in the cylinder of `sigma`.
pub fn extends(s: &InfiniteBitSeq, sigma: &BitString) -> bool {
    extends_oracle(s, sigma)
}

pub fn extends_oracle(s: &impl BitOracle, sigma: &BitString) -> bool {
    sigma.bits().iter().enumerate().all(|(i, &b)| s.bit(i as u64) == b)
}

impl fmt::Display for InfiniteBitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.tail {
            Tail::Constant(b) => write!(f, "{}|c:{}", self.prefix, *b as u8),
            Tail::Periodic(p) => write!(f, "{}|p:{}", self.prefix, p),
        }
    }
}

impl FromStr for InfiniteBitSeq {
    type Err = ParseBitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (prefix, tail) = s.split_once('|').ok_or_else(|| ParseBitsError::BadShape(s.into()))?;
        let prefix: BitString = prefix.parse()?;
        if let Some(b) = tail.strip_prefix("c:") {
            match b {
                "0" => Ok(Self::constant(prefix, false)),
                "1" => Ok(Self::constant(prefix, true)),
                _ => Err(ParseBitsError::BadShape(s.into())),
            }
        } else if let Some(p) = tail.strip_prefix("p:") {
            Self::periodic(prefix, p.parse()?)
        } else {
            Err(ParseBitsError::BadShape(s.into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> InfiniteBitSeq {
        s.parse().unwrap()
    }

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    // Walk the diagonals m+n = 0, 1, 2, … assigning consecutive codes.
    fn diagonal_table(limit: u64) -> Vec<(u64, u64)> {
        let mut out = Vec::new();
        let mut s = 0;
        while (out.len() as u64) < limit {
            for n in 0..=s {
                out.push((s - n, n));
            }
            s += 1;
        }
        out.truncate(limit as usize);
        out
    }

    #[test]
    fn pairing_matches_diagonal_enumeration() {
        let table = diagonal_table(10_000);
        for (k, &(m, n)) in table.iter().enumerate() {
            assert_eq!(pair(m, n), k as u64);
            assert_eq!(unpair(k as u64), (m, n));
        }
        assert_eq!(pair(0, 0), 0);
        assert_eq!(pair(1, 2), 8);
        assert_eq!(unpair(8), (1, 2));
        assert_eq!(unpair(2), (0, 1));
        assert_eq!(unpair(1), (1, 0));
    }

    #[test]
    fn pair_round_trip_small() {
        for m in 0..50 {
            for n in 0..50 {
                assert_eq!(unpair(pair(m, n)), (m, n));
            }
        }
    }

    #[test]
    fn pair_monotone_along_diagonals() {
        for a in 0..30u64 {
            for b in 0..30u64 {
                for c in 0..30u64 {
                    for d in 0..30u64 {
                        if a + b < c + d {
                            assert!(pair(a, b) < pair(c, d));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn unpair_large_values() {
        for &(m, n) in &[(0, 1 << 30), (1 << 30, 0), (123_456, 789_012)] {
            assert_eq!(unpair(pair(m, n)), (m, n));
        }
    }

    #[test]
    fn str_index_enumeration() {
        let expected = ["", "0", "1", "00", "01", "10", "11", "000"];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(str_index(k as u64).to_string(), *e);
        }
        for k in 0..10_000 {
            assert_eq!(str_index(k).index(), k);
        }
        let listed: Vec<_> = BitString::all_up_to(3).collect();
        for (k, s) in listed.iter().enumerate() {
            assert_eq!(s.index(), k as u64);
        }
    }

    #[test]
    fn seq_get_examples() {
        assert!(seq_get(&seq("10|c:0"), 0));
        assert!(!seq_get(&seq("10|c:0"), 7));
        assert!(seq_get(&seq("|p:01"), 5));
    }

    #[test]
    fn extends_examples() {
        assert!(extends(&seq("10|c:0"), &BitString::new()));
        assert!(extends(&seq("|p:01"), &BitString::new()));
        assert!(!extends(&seq("10|c:0"), &bits("101")));
        assert!(extends(&seq("|p:01"), &bits("0101")));
    }

    #[test]
    fn extends_closed_under_prefixes() {
        let s = seq("110|p:011");
        let sigma = s.take(12);
        for l in 0..=12 {
            let sub = BitString::from_bits(sigma.bits()[..l].iter().copied());
            assert!(extends(&s, &sub));
        }
    }

    #[test]
    fn text_form_round_trip() {
        for t in ["10|c:0", "|p:01", "|c:1", "0110|p:1"] {
            assert_eq!(seq(t).to_string(), t);
        }
        assert!("10|p:".parse::<InfiniteBitSeq>().is_err());
        assert!("10".parse::<InfiniteBitSeq>().is_err());
        assert!("12|c:0".parse::<InfiniteBitSeq>().is_err());
    }
}
