//! Leaf indexing shared by every subsystem.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Number of leaves on the hat.
pub const NUM_LEAVES: usize = 3;

/// Per-leaf array, indexed by leaf number.
pub type PerLeaf<T> = [T; NUM_LEAVES];

/// A subset of `{0, 1, 2}` stored as a three-bit mask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LeafSet(u8);

impl LeafSet {
    pub const EMPTY: LeafSet = LeafSet(0);
    pub const ALL: LeafSet = LeafSet(0b111);

    /// Builds a set from a wire mask. Bits above leaf 2 are rejected.
    pub fn from_mask(mask: u8) -> Option<LeafSet> {
        (mask & !0b111 == 0).then_some(LeafSet(mask))
    }

    pub fn single(leaf: usize) -> LeafSet {
        assert!(leaf < NUM_LEAVES, "leaf index {leaf} out of range");
        LeafSet(1 << leaf)
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn contains(self, leaf: usize) -> bool {
        leaf < NUM_LEAVES && self.0 & (1 << leaf) != 0
    }

    pub fn insert(&mut self, leaf: usize) {
        assert!(leaf < NUM_LEAVES, "leaf index {leaf} out of range");
        self.0 |= 1 << leaf;
    }

    pub fn remove(&mut self, leaf: usize) {
        self.0 &= !(1 << leaf);
    }

    pub fn difference(self, other: LeafSet) -> LeafSet {
        LeafSet(self.0 & !other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn complement(self) -> LeafSet {
        LeafSet(!self.0 & 0b111)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..NUM_LEAVES).filter(move |&i| self.contains(i))
    }
}

impl FromIterator<usize> for LeafSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = LeafSet::EMPTY;
        for leaf in iter {
            set.insert(leaf);
        }
        set
    }
}

/// Formats as `0|2`; the empty set is the empty string.
impl fmt::Display for LeafSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for leaf in self.iter() {
            if !first {
                f.write_str("|")?;
            }
            write!(f, "{leaf}")?;
            first = false;
        }
        Ok(())
    }
}

/// Inverse of `Display`: `""`, `"1"`, `"0|2"`.
impl std::str::FromStr for LeafSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = LeafSet::EMPTY;
        if s.is_empty() {
            return Ok(set);
        }
        for part in s.split('|') {
            match part.parse::<usize>() {
                Ok(leaf) if leaf < NUM_LEAVES => set.insert(leaf),
                _ => return Err(format!("bad leaf `{part}` in `{s}`")),
            }
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_round_trip_and_display() {
        let s: LeafSet = [0, 2].into_iter().collect();
        assert_eq!(s.mask(), 0b101);
        assert_eq!(s.to_string(), "0|2");
        assert_eq!(s.complement(), LeafSet::single(1));
        assert_eq!(LeafSet::EMPTY.to_string(), "");
        assert_eq!(LeafSet::from_mask(0b1000), None);
        assert_eq!(LeafSet::ALL.len(), 3);
    }
}
