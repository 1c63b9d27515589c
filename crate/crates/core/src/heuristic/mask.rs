use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fixed-length bit vector: bit `j` set means feature `j` is selected.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct FeatureMask {
    words: Vec<u64>,
    len: usize,
}

impl FeatureMask {
    pub fn zeros(len: usize) -> Self {
        FeatureMask { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn ones(len: usize) -> Self {
        let mut m = Self::zeros(len);
        for j in 0..len {
            m.set(j, true);
        }
        m
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut m = Self::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            m.set(j, b);
        }
        m
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut m = Self::zeros(len);
        for j in indices {
            if j >= len {
                return Err(Error::PositionOutOfRange { position: j, len });
            }
            m.set(j, true);
        }
        Ok(m)
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse_bits(s: &str) -> Result<Self> {
        let mut m = Self::zeros(s.len());
        for (j, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => m.set(j, true),
                _ => {
                    return Err(Error::Format {
                        what: "mask",
                        reason: format!("unexpected character {:?} at {j}", c as char),
                    })
                }
            }
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        self.words[j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, value: bool) {
        debug_assert!(j < self.len);
        let bit = 1u64 << (j % 64);
        if value {
            self.words[j / 64] |= bit;
        } else {
            self.words[j / 64] &= !bit;
        }
    }

    /// Number of selected features.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&j| self.get(j))
    }

    pub fn indices(&self) -> Vec<usize> {
        self.ones_iter().collect()
    }

    pub fn hamming(&self, other: &FeatureMask) -> usize {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum()
    }

    pub fn is_subset_of(&self, other: &FeatureMask) -> bool {
        self.len == other.len && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Raw words; the memo table keys on these.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Expands a mask over a reduced universe back to the full universe, where
    /// reduced position `i` corresponds to full position `columns[i]`.
    pub fn expand(&self, columns: &[usize], full_len: usize) -> Result<FeatureMask> {
        if columns.len() != self.len {
            return Err(Error::MaskLength { mask: self.len, features: columns.len() });
        }
        FeatureMask::from_indices(full_len, self.ones_iter().map(|i| columns[i]))
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|j| if self.get(j) { '1' } else { '0' }).collect()
    }
}

impl fmt::Debug for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            write!(f, "FeatureMask({})", self.to_bit_string())
        } else {
            write!(f, "FeatureMask(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

impl From<FeatureMask> for String {
    fn from(m: FeatureMask) -> String {
        m.to_bit_string()
    }
}

impl TryFrom<String> for FeatureMask {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        FeatureMask::parse_bits(&s)
    }
}

/// Returns a copy of `mask` with bit `position` inverted.
pub fn flip(mask: &FeatureMask, position: usize) -> Result<FeatureMask> {
    if position >= mask.len() {
        return Err(Error::PositionOutOfRange { position, len: mask.len() });
    }
    let mut out = mask.clone();
    out.set(position, !mask.get(position));
    Ok(out)
}

/// Flips every listed position once.
pub fn flip_positions(mask: &FeatureMask, positions: &[usize]) -> Result<FeatureMask> {
    let mut out = mask.clone();
    for &p in positions {
        if p >= mask.len() {
            return Err(Error::PositionOutOfRange { position: p, len: mask.len() });
        }
        out.set(p, !out.get(p));
    }
    Ok(out)
}

const NEIGHBOR_REDRAWS: usize = 16;

/// Flips `change` distinct uniformly chosen positions. Draws that would empty
/// the mask are repeated, up to 16 attempts in total.
pub fn generate_neighbor<R: Rng + ?Sized>(
    mask: &FeatureMask,
    change: usize,
    rng: &mut R,
) -> Result<FeatureMask> {
    let m = mask.len();
    if change == 0 || change > m {
        return Err(Error::config(format!("change {change} outside 1..={m}")));
    }
    for _ in 0..NEIGHBOR_REDRAWS {
        let positions = rand::seq::index::sample(rng, m, change).into_vec();
        let candidate = flip_positions(mask, &positions)?;
        if candidate.count_ones() > 0 {
            return Ok(candidate);
        }
    }
    Err(Error::DegenerateNeighbor { change })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table1() -> FeatureMask {
        FeatureMask::parse_bits("1100100110").unwrap()
    }

    #[test]
    fn table_one_to_table_three() {
        let m = flip(&flip(&table1(), 0).unwrap(), 9).unwrap();
        assert_eq!(m.to_bit_string(), "0100100111");
        assert_eq!(flip_positions(&table1(), &[0, 9]).unwrap(), m);
        assert_eq!(table1().indices(), [0, 1, 4, 7, 8]);
    }

    #[test]
    fn flip_single_bit_and_bounds() {
        let m = flip(&FeatureMask::zeros(10), 3).unwrap();
        assert_eq!(m.count_ones(), 1);
        assert!(m.get(3));
        assert!(matches!(flip(&m, 10), Err(Error::PositionOutOfRange { .. })));
    }

    #[test]
    fn full_complement_is_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = generate_neighbor(&FeatureMask::ones(8), 8, &mut rng);
        assert!(matches!(err, Err(Error::DegenerateNeighbor { change: 8 })));
    }

    #[test]
    fn expand_maps_back() {
        let reduced = FeatureMask::parse_bits("101").unwrap();
        let full = reduced.expand(&[2, 5, 7], 9).unwrap();
        assert_eq!(full.indices(), [2, 7]);
    }

    #[test]
    fn serde_as_bit_string() {
        let json = serde_json::to_string(&table1()).unwrap();
        assert_eq!(json, "\"1100100110\"");
        let back: FeatureMask = serde_json::from_str(&json).unwrap();
        assert_eq!(back, table1());
    }

    proptest! {
        #[test]
        fn flip_is_an_involution(bits in prop::collection::vec(any::<bool>(), 1..200), p in 0usize..200) {
            let m = FeatureMask::from_bools(&bits);
            let p = p % m.len();
            prop_assert_eq!(flip(&flip(&m, p).unwrap(), p).unwrap(), m);
        }

        #[test]
        fn neighbor_hamming_equals_change(
            bits in prop::collection::vec(any::<bool>(), 2..150),
            change in 1usize..20,
            seed in any::<u64>(),
        ) {
            let m = FeatureMask::from_bools(&bits);
            let change = 1 + change % (m.len() - 1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = generate_neighbor(&m, change, &mut rng).unwrap();
            prop_assert!(n.count_ones() > 0);
            prop_assert_eq!(n.hamming(&m), change);
        }
    }
}
