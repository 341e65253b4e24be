use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SpaceError;

/// Default width of generated fingerprints, in bits.
pub const DEFAULT_WIDTH: usize = 2048;

/// Fixed-width bitvector standing in for a molecular fingerprint.
///
/// The hex form lists nibbles from bit 0 upwards, most significant bit of
/// each nibble first: `"c"` is the 4-bit vector `1100` (bits 0 and 1 set).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    width: usize,
    words: Vec<u64>,
}

impl Fingerprint {
    pub fn zeros(width: usize) -> Self {
        Self {
            width,
            words: vec![0; width.div_ceil(64)],
        }
    }

    /// Builds from an explicit list of set bit positions.
    pub fn from_indices(width: usize, bits: impl IntoIterator<Item = usize>) -> Self {
        let mut fp = Self::zeros(width);
        for b in bits {
            fp.set(b);
        }
        fp
    }

    /// Parses a `0`/`1` string, bit 0 first.
    pub fn from_bit_str(s: &str) -> Result<Self, SpaceError> {
        let mut fp = Self::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => fp.set(i),
                '0' => {}
                _ => return Err(SpaceError::Fingerprint(format!("bad bit character {c:?}"))),
            }
        }
        Ok(fp)
    }

    pub fn from_hex(s: &str) -> Result<Self, SpaceError> {
        let s = s.trim();
        if s.is_empty() {
            return Err(SpaceError::Fingerprint("empty hex fingerprint".into()));
        }
        let mut fp = Self::zeros(s.len() * 4);
        for (k, c) in s.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| SpaceError::Fingerprint(format!("bad hex character {c:?}")))?;
            for j in 0..4 {
                if nibble & (8 >> j) != 0 {
                    fp.set(4 * k + j);
                }
            }
        }
        Ok(fp)
    }

    /// Hex encoding; the width must be a multiple of 4.
    pub fn to_hex(&self) -> String {
        debug_assert_eq!(self.width % 4, 0);
        (0..self.width / 4)
            .map(|k| {
                let nibble = (0..4).fold(0u32, |acc, j| {
                    acc | if self.get(4 * k + j) { 8 >> j } else { 0 }
                });
                char::from_digit(nibble, 16).unwrap()
            })
            .collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, bit: usize) -> bool {
        bit < self.width && self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    /// Panics when `bit` is outside the width.
    pub fn set(&mut self, bit: usize) {
        assert!(bit < self.width, "bit {bit} outside width {}", self.width);
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Number of set bits in `[start, end)`.
    pub fn count_ones_in(&self, start: usize, end: usize) -> u32 {
        (start..end.min(self.width))
            .filter(|&b| self.get(b))
            .count() as u32
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn check_width(&self, other: &Self) -> Result<(), SpaceError> {
        if self.width != other.width {
            return Err(SpaceError::WidthMismatch {
                expected: self.width,
                got: other.width,
            });
        }
        Ok(())
    }

    pub fn union(&self, other: &Self) -> Result<Self, SpaceError> {
        self.check_width(other)?;
        Ok(Self {
            width: self.width,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        })
    }

    /// Tanimoto similarity `|a & b| / |a | b|`; two empty fingerprints score 1.
    pub fn tanimoto(&self, other: &Self) -> Result<f64, SpaceError> {
        self.check_width(other)?;
        let (mut inter, mut union) = (0u32, 0u32);
        for (a, b) in self.words.iter().zip(&other.words) {
            inter += (a & b).count_ones();
            union += (a | b).count_ones();
        }
        if union == 0 {
            return Ok(1.0);
        }
        Ok(f64::from(inter) / f64::from(union))
    }
}

/// Free-function form of [`Fingerprint::tanimoto`].
pub fn tanimoto(a: &Fingerprint, b: &Fingerprint) -> Result<f64, SpaceError> {
    a.tanimoto(b)
}

impl fmt::Debug for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width.is_multiple_of(4) {
            write!(f, "Fingerprint({})", self.to_hex())
        } else {
            let bits: String = (0..self.width)
                .map(|b| if self.get(b) { '1' } else { '0' })
                .collect();
            write!(f, "Fingerprint(0b{bits})")
        }
    }
}

impl Serialize for Fingerprint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Fingerprint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Fingerprint::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tanimoto_examples() {
        let a = Fingerprint::from_bit_str("1100").unwrap();
        assert_eq!(a.tanimoto(&a).unwrap(), 1.0);
        let b = Fingerprint::from_bit_str("0011").unwrap();
        assert_eq!(a.tanimoto(&b).unwrap(), 0.0);
        let c = Fingerprint::from_bit_str("1010").unwrap();
        assert_eq!(a.tanimoto(&c).unwrap(), 1.0 / 3.0);
        let z = Fingerprint::zeros(8);
        assert_eq!(z.tanimoto(&z).unwrap(), 1.0);
        assert!(matches!(
            a.tanimoto(&z),
            Err(SpaceError::WidthMismatch {
                expected: 4,
                got: 8
            })
        ));
    }

    #[test]
    fn hex_layout() {
        let fp = Fingerprint::from_hex("c").unwrap();
        assert_eq!(fp, Fingerprint::from_bit_str("1100").unwrap());
        let or = fp.union(&Fingerprint::from_hex("3").unwrap()).unwrap();
        assert_eq!(or.to_hex(), "f");
        assert_eq!(Fingerprint::from_hex("0180").unwrap().count_ones(), 2);
        assert!(Fingerprint::from_hex("zz").is_err());
        assert!(Fingerprint::from_hex("").is_err());
    }

    fn arb_fp(width: usize) -> impl Strategy<Value = Fingerprint> {
        proptest::collection::vec(any::<bool>(), width).prop_map(move |bits| {
            Fingerprint::from_indices(
                width,
                bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i),
            )
        })
    }

    proptest! {
        #[test]
        fn hex_roundtrip(fp in arb_fp(128)) {
            prop_assert_eq!(Fingerprint::from_hex(&fp.to_hex()).unwrap(), fp);
        }

        #[test]
        fn tanimoto_symmetric_bounded(a in arb_fp(96), b in arb_fp(96)) {
            let s = a.tanimoto(&b).unwrap();
            prop_assert_eq!(s, b.tanimoto(&a).unwrap());
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(a.tanimoto(&a).unwrap(), 1.0);
        }

        #[test]
        fn shared_bit_never_lowers_similarity(a in arb_fp(64), b in arb_fp(64), bit in 0usize..64) {
            let before = a.tanimoto(&b).unwrap();
            let (mut a2, mut b2) = (a.clone(), b.clone());
            a2.set(bit);
            b2.set(bit);
            prop_assert!(a2.tanimoto(&b2).unwrap() >= before);
        }
    }
}
