//! Fixed-universe bitsets used for world sets, epistemic states and property
//! subsets.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    universe: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(universe: usize) -> Self {
        BitSet {
            universe,
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::new(universe);
        for i in 0..universe {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::new(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    /// The subset of `0..universe` whose membership is given by the bits of
    /// `mask` (bit `i` set means `i` is a member). Requires `universe <= 64`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= 64);
        let mut s = Self::new(universe);
        if universe > 0 {
            let keep = if universe == 64 { u64::MAX } else { (1u64 << universe) - 1 };
            s.words[0] = mask & keep;
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.universe, "index {i} outside universe {}", self.universe);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.universe, "index {i} outside universe {}", self.universe);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.universe).filter(move |i| self.contains(*i))
    }

    /// Panics on universe mismatch; callers validate first.
    pub fn union(&self, other: &BitSet) -> BitSet {
        assert_eq!(self.universe, other.universe);
        BitSet {
            universe: self.universe,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        assert_eq!(self.universe, other.universe);
        BitSet {
            universe: self.universe,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn complement(&self) -> BitSet {
        let mut out = BitSet::new(self.universe);
        for i in 0..self.universe {
            if !self.contains(i) {
                out.insert(i);
            }
        }
        out
    }

    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.universe == other.universe
            && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Every subset of `0..universe`, in mask order. Requires `universe < 64`.
pub fn all_subsets(universe: usize) -> impl Iterator<Item = BitSet> {
    assert!(universe < 64);
    (0..1u64 << universe).map(move |m| BitSet::from_mask(universe, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = BitSet::from_indices(70, [0, 2, 65]);
        let b = BitSet::from_indices(70, [2, 69]);
        assert_eq!(a.union(&b).iter().collect::<Vec<_>>(), vec![0, 2, 65, 69]);
        assert_eq!(a.intersection(&b).iter().collect::<Vec<_>>(), vec![2]);
        assert_eq!(a.complement().len(), 67);
        assert!(BitSet::from_indices(70, [2]).is_subset(&a));
        assert!(!b.is_subset(&a));
        assert!(!a.contains(200));
    }

    #[test]
    fn subsets_enumeration() {
        let all: Vec<_> = all_subsets(3).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[5].iter().collect::<Vec<_>>(), vec![0, 2]);
        assert!(all_subsets(0).next().unwrap().is_empty());
    }
}
