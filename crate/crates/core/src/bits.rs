//! Bit sequences in the signed {-1,+1} convention.
//!
//! A conventional `1` is stored as `+1` and a `0` as `-1`. Index 0 is the most
//! significant bit of the integer and hex renderings, so lane `j` of width `w`
//! covers indices `j*w .. (j+1)*w` with its MSB first.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ensure_len, Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVec(Vec<i8>);

impl BitVec {
    /// Builds from signed values, rejecting anything other than -1 or +1.
    pub fn from_signs(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::domain("bit vector must be non-empty"));
        }
        if let Some(pos) = signs.iter().position(|&b| b != 1 && b != -1) {
            return Err(Error::domain(format!(
                "bit {pos} has value {}, expected -1 or +1",
                signs[pos]
            )));
        }
        Ok(BitVec(signs))
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        assert!(!bits.is_empty(), "bit vector must be non-empty");
        BitVec(bits.iter().map(|&b| if b { 1 } else { -1 }).collect())
    }

    /// Builds from conventional 0/1 values.
    pub fn from_bits01(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::domain("bit vector must be non-empty"));
        }
        bits.iter()
            .map(|&b| match b {
                0 => Ok(-1),
                1 => Ok(1),
                other => Err(Error::domain(format!("bit value {other} is not 0 or 1"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitVec)
    }

    /// `len` low bits of `value`, MSB first.
    pub fn from_uint(value: u64, len: usize) -> Result<Self> {
        if len == 0 || len > 64 {
            return Err(Error::domain(format!("integer width {len} not in 1..=64")));
        }
        if len < 64 && value >> len != 0 {
            return Err(Error::domain(format!("{value:#x} does not fit in {len} bits")));
        }
        Ok(BitVec(
            (0..len)
                .map(|i| if (value >> (len - 1 - i)) & 1 == 1 { 1 } else { -1 })
                .collect(),
        ))
    }

    /// Concatenation of `lanes` values of `width` bits each.
    pub fn from_lanes(lanes: &[u8], width: usize) -> Self {
        let mut bits = Vec::with_capacity(lanes.len() * width);
        for &lane in lanes {
            for i in (0..width).rev() {
                bits.push(if (lane >> i) & 1 == 1 { 1 } else { -1 });
            }
        }
        BitVec(bits)
    }

    /// Parses a hex string of exactly `len / 4` digits.
    pub fn from_hex(hex_str: &str, len: usize) -> Result<Self> {
        if len == 0 || !len.is_multiple_of(4) {
            return Err(Error::domain(format!("hex bit length {len} must be a positive multiple of 4")));
        }
        let s = hex_str.trim();
        ensure_len("hex digits", s.len(), len / 4)?;
        let mut bits = Vec::with_capacity(len);
        for c in s.chars() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::domain(format!("invalid hex digit {c:?}")))?;
            for i in (0..4).rev() {
                bits.push(if (nibble >> i) & 1 == 1 { 1 } else { -1 });
            }
        }
        Ok(BitVec(bits))
    }

    pub fn to_hex(&self) -> String {
        assert!(self.len().is_multiple_of(4), "hex rendering needs a multiple of 4 bits");
        self.0
            .chunks(4)
            .map(|c| {
                let v = c.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b > 0));
                char::from_digit(v, 16).unwrap()
            })
            .collect()
    }

    /// Hex for multiples of 4 bits, `bin:` followed by the bits otherwise.
    pub fn to_text(&self) -> String {
        if self.len().is_multiple_of(4) && !self.is_empty() {
            self.to_hex()
        } else {
            let bin: String = self.0.iter().map(|&b| if b > 0 { '1' } else { '0' }).collect();
            format!("bin:{bin}")
        }
    }

    /// Inverse of [`BitVec::to_text`]; the length follows from the digits.
    pub fn parse_text(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(bin) = s.strip_prefix("bin:") {
            let bits: Vec<u8> = bin
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::domain(format!("invalid binary digit {c:?}"))),
                })
                .collect::<Result<_>>()?;
            BitVec::from_bits01(&bits)
        } else {
            BitVec::from_hex(s, s.len() * 4)
        }
    }

    pub fn to_uint(&self) -> u64 {
        assert!(self.len() <= 64, "BitVec of {} bits does not fit a u64", self.len());
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b > 0))
    }

    /// Value of lane `j` when the vector is split into `width`-bit lanes.
    #[inline]
    pub fn lane(&self, j: usize, width: usize) -> u8 {
        self.0[j * width..(j + 1) * width]
            .iter()
            .fold(0u8, |acc, &b| (acc << 1) | u8::from(b > 0))
    }

    pub fn lanes(&self, width: usize) -> Vec<u8> {
        (0..self.len() / width).map(|j| self.lane(j, width)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn as_signs(&self) -> &[i8] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = i8> + '_ {
        self.0.iter().copied()
    }

    pub fn bits01(&self) -> Vec<u8> {
        self.0.iter().map(|&b| u8::from(b > 0)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b > 0).count()
    }

    /// XOR in the 0/1 representation, which is sign multiplication negated:
    /// equal bits give -1, differing bits +1.
    pub fn xor(&self, other: &BitVec) -> Result<BitVec> {
        ensure_len("xor operand", other.len(), self.len())?;
        Ok(BitVec(
            self.0.iter().zip(&other.0).map(|(&a, &b)| -(a * b)).collect(),
        ))
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn complement(&self) -> BitVec {
        BitVec(self.0.iter().map(|&b| -b).collect())
    }

    pub fn concat(parts: &[&BitVec]) -> BitVec {
        BitVec(parts.iter().flat_map(|p| p.0.iter().copied()).collect())
    }

    pub fn slice(&self, start: usize, len: usize) -> BitVec {
        BitVec(self.0[start..start + len].to_vec())
    }

    pub(crate) fn from_signs_unchecked(signs: Vec<i8>) -> Self {
        debug_assert!(signs.iter().all(|&b| b == 1 || b == -1));
        BitVec(signs)
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len().is_multiple_of(4) {
            write!(f, "BitVec({})", self.to_hex())
        } else {
            let s: String = self.0.iter().map(|&b| if b > 0 { '1' } else { '0' }).collect();
            write!(f, "BitVec(0b{s})")
        }
    }
}

impl Serialize for BitVec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for BitVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BitVec::parse_text(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_sign_values() {
        assert!(BitVec::from_signs(vec![1, 0, -1]).is_err());
        assert!(BitVec::from_signs(vec![]).is_err());
        assert!(BitVec::from_bits01(&[0, 2]).is_err());
    }

    #[test]
    fn zero_maps_to_minus_one() {
        let v = BitVec::from_bits01(&[0, 1, 1, 0]).unwrap();
        assert_eq!(v.as_signs(), &[-1, 1, 1, -1]);
        assert_eq!(v.to_uint(), 0b0110);
        assert_eq!(v.to_hex(), "6");
    }

    #[test]
    fn lanes_are_msb_first() {
        let v = BitVec::from_hex("a53c", 16).unwrap();
        assert_eq!(v.lanes(8), vec![0xa5, 0x3c]);
        assert_eq!(v.lanes(4), vec![0xa, 0x5, 0x3, 0xc]);
        assert_eq!(BitVec::from_lanes(&[0xa5, 0x3c], 8), v);
    }

    #[test]
    fn xor_matches_integer_xor() {
        let a = BitVec::from_uint(0b1100, 4).unwrap();
        let b = BitVec::from_uint(0b1010, 4).unwrap();
        assert_eq!(a.xor(&b).unwrap().to_uint(), 0b0110);
        assert!(a.xor(&BitVec::from_uint(1, 3).unwrap()).is_err());
    }

    #[test]
    fn serde_forms() {
        let v = BitVec::from_hex("0f", 8).unwrap();
        assert_eq!(serde_json::to_string(&v).unwrap(), "\"0f\"");
        let odd = BitVec::from_bits01(&[1, 0, 1]).unwrap();
        let json = serde_json::to_string(&odd).unwrap();
        assert_eq!(json, "\"bin:101\"");
        assert_eq!(serde_json::from_str::<BitVec>(&json).unwrap(), odd);
        // Hex that happens to start with "0b" stays hex.
        let v = BitVec::parse_text("0b6f").unwrap();
        assert_eq!(v.len(), 16);
        assert_eq!(v.to_uint(), 0x0b6f);
    }

    proptest! {
        #[test]
        fn text_roundtrip(bits in proptest::collection::vec(0u8..2, 1..80)) {
            let v = BitVec::from_bits01(&bits).unwrap();
            prop_assert_eq!(BitVec::parse_text(&v.to_text()).unwrap(), v);
        }

        #[test]
        fn bits01_roundtrip(bits in proptest::collection::vec(0u8..2, 1..80)) {
            let v = BitVec::from_bits01(&bits).unwrap();
            prop_assert!(v.iter().all(|b| b == 1 || b == -1));
            prop_assert_eq!(v.bits01(), bits);
        }

        #[test]
        fn hex_roundtrip(value in any::<u64>()) {
            let v = BitVec::from_uint(value, 64).unwrap();
            prop_assert_eq!(v.to_uint(), value);
            prop_assert_eq!(BitVec::from_hex(&v.to_hex(), 64).unwrap(), v);
        }
    }
}
