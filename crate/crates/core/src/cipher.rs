//! A parameterizable substitution-permutation network with independent round
//! keys.
//!
//! One round maps `state -> P(S(state ^ k_r))`, where `S` applies the S-box to
//! every `sbox_width`-bit lane and `P` moves bit `i` to position `perm[i]`.
//! There is no key schedule: the expanded key is the free concatenation of
//! `R` round keys.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitVec;
use crate::error::{ensure_len, Error, Result};
use crate::rng::{self, Domain, SplitMix64};

/// Seed of the SplitMix64 stream that generates the default bit permutation.
pub const PERMUTATION_SEED: u64 = 0x243f_6a88_85a3_08d3;

pub const AES_SBOX: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
];

/// The PRESENT nibble S-box.
pub const PRESENT_SBOX: [u8; 16] = [
    0xc, 0x5, 0x6, 0xb, 0x9, 0x0, 0xa, 0xd, 0x3, 0xe, 0xf, 0x8, 0x4, 0x7, 0x1, 0x2,
];

/// A bijective lookup table on `width`-bit values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SBox {
    width: usize,
    forward: Vec<u8>,
    inverse: Vec<u8>,
}

impl SBox {
    pub fn aes() -> Self {
        Self::from_table(8, AES_SBOX.to_vec()).expect("AES S-box is a bijection")
    }

    pub fn present() -> Self {
        Self::from_table(4, PRESENT_SBOX.to_vec()).expect("PRESENT S-box is a bijection")
    }

    /// The identity map, for selection functions of other widths (a 1-bit
    /// selection is plain `d ^ k`).
    pub fn identity(width: usize) -> Result<Self> {
        if !(1..=8).contains(&width) {
            return Err(Error::domain(format!("S-box width {width} not in 1..=8")));
        }
        Self::from_table(width, (0..1u16 << width).map(|x| x as u8).collect())
    }

    /// The cipher S-box for a lane width: PRESENT for 4 bits, AES for 8.
    pub fn for_width(width: usize) -> Result<Self> {
        match width {
            4 => Ok(Self::present()),
            8 => Ok(Self::aes()),
            other => Err(Error::config(format!("S-box width must be 4 or 8, got {other}"))),
        }
    }

    pub fn from_table(width: usize, forward: Vec<u8>) -> Result<Self> {
        if !(1..=8).contains(&width) {
            return Err(Error::domain(format!("S-box width {width} not in 1..=8")));
        }
        let size = 1usize << width;
        ensure_len("S-box table", forward.len(), size)?;
        let mut inverse = vec![0u8; size];
        let mut seen = vec![false; size];
        for (x, &y) in forward.iter().enumerate() {
            let y = y as usize;
            if y >= size || std::mem::replace(&mut seen[y], true) {
                return Err(Error::domain(format!("S-box table is not a bijection (entry {x})")));
            }
            inverse[y] = x as u8;
        }
        Ok(SBox {
            width,
            forward,
            inverse,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn size(&self) -> usize {
        self.forward.len()
    }

    pub fn table(&self) -> &[u8] {
        &self.forward
    }

    pub fn inverse_table(&self) -> &[u8] {
        &self.inverse
    }

    pub fn lookup(&self, x: u32) -> Result<u8> {
        self.forward
            .get(x as usize)
            .copied()
            .ok_or_else(|| Error::domain(format!("S-box input {x:#x} exceeds {} bits", self.width)))
    }

    #[inline]
    pub(crate) fn apply(&self, x: u8) -> u8 {
        self.forward[x as usize]
    }

    #[inline]
    pub(crate) fn invert(&self, y: u8) -> u8 {
        self.inverse[y as usize]
    }
}

/// A round key of `block_bits` bits.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoundKey(BitVec);

impl RoundKey {
    pub fn new(bits: BitVec) -> Self {
        RoundKey(bits)
    }

    pub fn from_hex(s: &str, block_bits: usize) -> Result<Self> {
        BitVec::from_hex(s, block_bits).map(RoundKey)
    }

    pub fn bits(&self) -> &BitVec {
        &self.0
    }

    pub fn into_bits(self) -> BitVec {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_hex(&self) -> String {
        self.0.to_hex()
    }

    /// The subkey feeding S-box lane `j`.
    pub fn subkey(&self, j: usize, width: usize) -> Subkey {
        Subkey(self.0.slice(j * width, width))
    }
}

/// The key bits entering one selection function.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subkey(BitVec);

impl Subkey {
    pub fn new(bits: BitVec) -> Self {
        Subkey(bits)
    }

    pub fn from_value(value: u8, width: usize) -> Result<Self> {
        BitVec::from_uint(u64::from(value), width).map(Subkey)
    }

    pub fn bits(&self) -> &BitVec {
        &self.0
    }

    pub fn value(&self) -> u8 {
        self.0.to_uint() as u8
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The full key `(k_1 .. k_R)`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExpandedKey(Vec<RoundKey>);

impl ExpandedKey {
    pub fn new(rounds: Vec<RoundKey>) -> Self {
        ExpandedKey(rounds)
    }

    pub fn rounds(&self) -> &[RoundKey] {
        &self.0
    }

    pub fn round(&self, r: usize) -> &RoundKey {
        &self.0[r - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn validate(&self, spec: &CipherSpec) -> Result<()> {
        ensure_len("expanded key rounds", self.0.len(), spec.rounds())?;
        for (r, k) in self.0.iter().enumerate() {
            ensure_len(&format!("round key {}", r + 1), k.len(), spec.block_bits())?;
        }
        Ok(())
    }
}

/// Cipher geometry: block size, round count, S-box and bit permutation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CipherSpecRepr", into = "CipherSpecRepr")]
pub struct CipherSpec {
    block_bits: usize,
    rounds: usize,
    sbox: SBox,
    permutation: Vec<usize>,
    inverse_permutation: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CipherSpecRepr {
    block_bits: usize,
    rounds: usize,
    sbox_width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    permutation: Option<Vec<usize>>,
}

impl TryFrom<CipherSpecRepr> for CipherSpec {
    type Error = Error;

    fn try_from(r: CipherSpecRepr) -> Result<Self> {
        let spec = CipherSpec::new(r.block_bits, r.rounds, r.sbox_width)?;
        match r.permutation {
            Some(p) => spec.with_permutation(p),
            None => Ok(spec),
        }
    }
}

impl From<CipherSpec> for CipherSpecRepr {
    fn from(s: CipherSpec) -> Self {
        CipherSpecRepr {
            block_bits: s.block_bits,
            rounds: s.rounds,
            sbox_width: s.sbox.width,
            permutation: Some(s.permutation),
        }
    }
}

impl CipherSpec {
    /// Geometry with the cipher S-box for `sbox_width` and the default
    /// permutation.
    pub fn new(block_bits: usize, rounds: usize, sbox_width: usize) -> Result<Self> {
        let sbox = SBox::for_width(sbox_width)?;
        Self::with_sbox(block_bits, rounds, sbox)
    }

    pub fn with_sbox(block_bits: usize, rounds: usize, sbox: SBox) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::config("round count must be at least 1"));
        }
        if block_bits == 0 || !block_bits.is_multiple_of(sbox.width()) {
            return Err(Error::config(format!(
                "block size {block_bits} is not a positive multiple of the S-box width {}",
                sbox.width()
            )));
        }
        let permutation = default_permutation(block_bits);
        let inverse_permutation = invert_permutation(&permutation);
        Ok(CipherSpec {
            block_bits,
            rounds,
            sbox,
            permutation,
            inverse_permutation,
        })
    }

    /// The 128-bit, 10-round, AES S-box profile.
    pub fn full_scale() -> Self {
        Self::new(128, 10, 8).unwrap()
    }

    /// A desk-scale profile with nibble S-boxes.
    pub fn desk(block_bits: usize, rounds: usize) -> Result<Self> {
        Self::new(block_bits, rounds, 4)
    }

    pub fn with_permutation(mut self, permutation: Vec<usize>) -> Result<Self> {
        ensure_len("permutation", permutation.len(), self.block_bits)?;
        let mut seen = vec![false; self.block_bits];
        for &p in &permutation {
            if p >= self.block_bits || seen[p] {
                return Err(Error::config(format!(
                    "permutation is not a bijection on 0..{} (entry {p})",
                    self.block_bits
                )));
            }
            seen[p] = true;
        }
        self.inverse_permutation = invert_permutation(&permutation);
        self.permutation = permutation;
        Ok(self)
    }

    pub fn with_identity_permutation(self) -> Self {
        let n = self.block_bits;
        self.with_permutation((0..n).collect()).unwrap()
    }

    pub fn with_rounds(mut self, rounds: usize) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::config("round count must be at least 1"));
        }
        self.rounds = rounds;
        Ok(self)
    }

    pub fn block_bits(&self) -> usize {
        self.block_bits
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn sbox(&self) -> &SBox {
        &self.sbox
    }

    pub fn sbox_width(&self) -> usize {
        self.sbox.width
    }

    pub fn lanes(&self) -> usize {
        self.block_bits / self.sbox.width
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn inverse_permutation(&self) -> &[usize] {
        &self.inverse_permutation
    }

    /// The S-box outputs of every lane for `state ^ rk`, before permutation.
    pub(crate) fn sbox_outputs(&self, state: &BitVec, rk: &RoundKey) -> Vec<u8> {
        let w = self.sbox.width;
        let key = rk.bits();
        (0..self.lanes())
            .map(|j| self.sbox.apply(state.lane(j, w) ^ key.lane(j, w)))
            .collect()
    }

    fn permute_lanes(&self, lanes: &[u8]) -> BitVec {
        let substituted = BitVec::from_lanes(lanes, self.sbox.width);
        let mut out = vec![0i8; self.block_bits];
        for (i, &p) in self.permutation.iter().enumerate() {
            out[p] = substituted.get(i);
        }
        BitVec::from_signs_unchecked(out)
    }
}

/// `perm[i]` is the destination of bit `i`; drawn by Fisher-Yates from
/// SplitMix64 seeded with [`PERMUTATION_SEED`]: for `i` from `n-1` down to 1,
/// swap `i` with `next() % (i + 1)`.
pub fn default_permutation(n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut g = SplitMix64(PERMUTATION_SEED);
    for i in (1..n).rev() {
        let j = (g.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }
    perm
}

fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

pub fn sbox_lookup(x: u32, spec: &CipherSpec) -> Result<u8> {
    spec.sbox.lookup(x)
}

/// The selection function `v = S(d ^ k_S)`.
pub fn select(d_sub: &BitVec, k: &Subkey, sbox: &SBox) -> Result<BitVec> {
    ensure_len("selection data", d_sub.len(), sbox.width())?;
    ensure_len("subkey", k.len(), sbox.width())?;
    let x = (d_sub.to_uint() ^ k.bits().to_uint()) as u8;
    BitVec::from_uint(u64::from(sbox.apply(x)), sbox.width())
}

pub fn round_encrypt(state: &BitVec, rk: &RoundKey, spec: &CipherSpec) -> Result<BitVec> {
    ensure_len("state", state.len(), spec.block_bits)?;
    ensure_len("round key", rk.len(), spec.block_bits)?;
    Ok(spec.permute_lanes(&spec.sbox_outputs(state, rk)))
}

pub fn round_decrypt(out: &BitVec, rk: &RoundKey, spec: &CipherSpec) -> Result<BitVec> {
    ensure_len("state", out.len(), spec.block_bits)?;
    ensure_len("round key", rk.len(), spec.block_bits)?;
    let mut substituted = vec![0i8; spec.block_bits];
    for (i, &p) in spec.permutation.iter().enumerate() {
        substituted[i] = out.get(p);
    }
    let substituted = BitVec::from_signs_unchecked(substituted);
    let w = spec.sbox.width;
    let lanes: Vec<u8> = (0..spec.lanes())
        .map(|j| spec.sbox.invert(substituted.lane(j, w)) ^ rk.bits().lane(j, w))
        .collect();
    Ok(BitVec::from_lanes(&lanes, w))
}

/// The cipher state entering round `prefix.len() + 1` for every plaintext.
pub fn derive_round_data(
    plaintexts: &[BitVec],
    prefix: &[RoundKey],
    spec: &CipherSpec,
) -> Result<Vec<BitVec>> {
    if prefix.len() >= spec.rounds {
        return Err(Error::domain(format!(
            "key prefix of {} rounds leaves no round to attack (R = {})",
            prefix.len(),
            spec.rounds
        )));
    }
    let mut states = plaintexts.to_vec();
    for rk in prefix {
        states = advance_round(&states, rk, spec)?;
    }
    Ok(states)
}

/// One round of encryption applied to every state.
pub fn advance_round(states: &[BitVec], rk: &RoundKey, spec: &CipherSpec) -> Result<Vec<BitVec>> {
    states.iter().map(|s| round_encrypt(s, rk, spec)).collect()
}

pub fn random_expanded_key(spec: &CipherSpec, seed: u64) -> ExpandedKey {
    let mut rng = rng::stream(seed, Domain::Key, 0);
    ExpandedKey(
        (0..spec.rounds)
            .map(|_| RoundKey(random_bits(&mut rng, spec.block_bits)))
            .collect(),
    )
}

pub fn random_bits<R: Rng>(rng: &mut R, n: usize) -> BitVec {
    BitVec::from_signs_unchecked((0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
}

/// S-box tables and permutation as a JSON document for cross-checking other
/// implementations.
pub fn tables_json(spec: &CipherSpec) -> serde_json::Value {
    serde_json::json!({
        "block_bits": spec.block_bits,
        "rounds": spec.rounds,
        "sbox_width": spec.sbox.width,
        "sbox": spec.sbox.forward,
        "sbox_inverse": spec.sbox.inverse,
        "permutation_seed": format!("{PERMUTATION_SEED:#018x}"),
        "permutation": spec.permutation,
        "bit_order": "index 0 is the most significant bit of lane 0; perm[i] is the destination of bit i",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_lane(width: usize) -> CipherSpec {
        CipherSpec::new(width, 1, width).unwrap().with_identity_permutation()
    }

    #[test]
    fn aes_table_values() {
        // FIPS-197 Figure 7.
        let spec = CipherSpec::full_scale();
        assert_eq!(sbox_lookup(0x00, &spec).unwrap(), 0x63);
        assert_eq!(sbox_lookup(0x53, &spec).unwrap(), 0xed);
        assert_eq!(sbox_lookup(0xff, &spec).unwrap(), 0x16);
        assert!(sbox_lookup(0x100, &spec).is_err());
    }

    #[test]
    fn sboxes_are_bijections() {
        for sbox in [SBox::aes(), SBox::present(), SBox::identity(1).unwrap()] {
            let mut seen = vec![false; sbox.size()];
            for x in 0..sbox.size() as u32 {
                let y = sbox.lookup(x).unwrap() as usize;
                assert!(!seen[y]);
                seen[y] = true;
                assert_eq!(sbox.invert(y as u8) as u32, x);
            }
        }
    }

    #[test]
    fn rejects_non_bijective_table() {
        assert!(SBox::from_table(2, vec![0, 1, 1, 3]).is_err());
        let mut t = AES_SBOX.to_vec();
        t[5] = t[6];
        assert!(SBox::from_table(8, t).is_err());
    }

    #[test]
    fn select_examples() {
        let sbox = SBox::aes();
        let zero = BitVec::from_uint(0, 8).unwrap();
        let k = Subkey::from_value(0, 8).unwrap();
        assert_eq!(select(&zero, &k, &sbox).unwrap().to_uint(), 0x63);
        for d in 0..=255u8 {
            let dv = BitVec::from_uint(d.into(), 8).unwrap();
            for kv in [0u8, 1, 0x5a, 0xff] {
                let k = Subkey::from_value(kv, 8).unwrap();
                let swapped = select(k.bits(), &Subkey::new(dv.clone()), &sbox).unwrap();
                assert_eq!(select(&dv, &k, &sbox).unwrap(), swapped);
            }
        }
        assert!(select(&BitVec::from_uint(0, 4).unwrap(), &k, &sbox).is_err());
    }

    #[test]
    fn select_is_bijective_in_key() {
        let sbox = SBox::present();
        let d = BitVec::from_uint(0x9, 4).unwrap();
        let mut outs: Vec<u64> = (0..16u8)
            .map(|k| select(&d, &Subkey::from_value(k, 4).unwrap(), &sbox).unwrap().to_uint())
            .collect();
        outs.sort_unstable();
        assert_eq!(outs, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn single_lane_round_is_selection() {
        for width in [4, 8] {
            let spec = single_lane(width);
            for d in 0..(1u64 << width) {
                let state = BitVec::from_uint(d, width).unwrap();
                let rk = RoundKey::new(BitVec::from_uint(0x3 & d, width).unwrap());
                let via_select = select(&state, &rk.subkey(0, width), spec.sbox()).unwrap();
                assert_eq!(round_encrypt(&state, &rk, &spec).unwrap(), via_select);
            }
        }
    }

    #[test]
    fn round_encrypt_rejects_bad_lengths() {
        let spec = CipherSpec::desk(16, 2).unwrap();
        let rk = RoundKey::new(BitVec::from_uint(0, 16).unwrap());
        assert!(round_encrypt(&BitVec::from_uint(0, 8).unwrap(), &rk, &spec).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(CipherSpec::new(12, 2, 8).is_err());
        assert!(CipherSpec::new(16, 0, 4).is_err());
        assert!(CipherSpec::new(16, 2, 5).is_err());
        let spec = CipherSpec::desk(8, 2).unwrap();
        assert!(spec.clone().with_permutation(vec![0, 1, 2, 3, 4, 5, 6, 6]).is_err());
        assert!(spec.with_permutation(vec![0, 1, 2]).is_err());
    }

    #[test]
    fn default_permutation_is_fixed_bijection() {
        let p = default_permutation(128);
        assert_eq!(p, default_permutation(128));
        let mut sorted = p.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..128).collect::<Vec<_>>());
        assert_ne!(p, sorted);
    }

    #[test]
    fn exhaustive_bijection_small_block() {
        let spec = CipherSpec::desk(12, 1).unwrap();
        let rk = RoundKey::new(BitVec::from_uint(0xa5c, 12).unwrap());
        let mut seen = vec![false; 1 << 12];
        for x in 0..1u64 << 12 {
            let s = BitVec::from_uint(x, 12).unwrap();
            let y = round_encrypt(&s, &rk, &spec).unwrap();
            assert!(!std::mem::replace(&mut seen[y.to_uint() as usize], true));
            assert_eq!(round_decrypt(&y, &rk, &spec).unwrap(), s);
        }
    }

    #[test]
    fn empty_prefix_is_identity() {
        let spec = CipherSpec::desk(16, 3).unwrap();
        let pts = vec![BitVec::from_uint(0xbeef, 16).unwrap()];
        assert_eq!(derive_round_data(&pts, &[], &spec).unwrap(), pts);
        let key = random_expanded_key(&spec, 1);
        assert!(derive_round_data(&pts, key.rounds(), &spec).is_err());
    }

    #[test]
    fn tables_json_lists_everything() {
        let v = tables_json(&CipherSpec::desk(16, 2).unwrap());
        assert_eq!(v["sbox"].as_array().unwrap().len(), 16);
        assert_eq!(v["permutation"].as_array().unwrap().len(), 16);
    }

    #[test]
    fn spec_serde_keeps_permutation() {
        let spec = CipherSpec::desk(16, 3).unwrap().with_identity_permutation();
        let json = serde_json::to_string(&spec).unwrap();
        let back: CipherSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let short: CipherSpec =
            serde_json::from_str(r#"{"block_bits":16,"rounds":3,"sbox_width":4}"#).unwrap();
        assert_eq!(short.permutation(), default_permutation(16).as_slice());
    }
}
