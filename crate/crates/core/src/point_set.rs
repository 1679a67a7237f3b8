//! Dynamic-width bitmasks over a fixed ground set.
//!
//! All set machinery in this crate runs on [`PointSet`]: a subset of
//! `{0, .., universe-1}` stored as packed 64-bit words. Ground sets up to 64
//! points fit in a single word; larger ones (the arc fixtures go past 90
//! points) spill into further words transparently.

use std::cmp::Ordering;
use std::fmt;

const WORD_BITS: usize = 64;

fn words_for(universe: usize) -> usize {
    universe.div_ceil(WORD_BITS)
}

/// A subset of a ground set, stored as a bitmask with an attached universe
/// size.
///
/// Carrying the universe keeps `complement` total and lets us catch
/// cross-ground mixups early. `Ord` compares the numeric value of the
/// bitmask (bit `i` = point `i`); this is the order used everywhere a
/// canonical representative or deterministic tie-break is needed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    universe: usize,
    words: Vec<u64>,
}

impl PointSet {
    /// The empty subset of a ground set with `universe` points.
    pub fn empty(universe: usize) -> Self {
        PointSet {
            universe,
            words: vec![0; words_for(universe)],
        }
    }

    /// The full ground set.
    pub fn full(universe: usize) -> Self {
        let mut s = Self::empty(universe);
        for w in &mut s.words {
            *w = u64::MAX;
        }
        s.clear_tail();
        s
    }

    /// Builds a set from point indices. Indices must be below `universe`.
    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Self {
        let mut s = Self::empty(universe);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn singleton(universe: usize, index: usize) -> Self {
        Self::from_indices(universe, [index])
    }

    /// Number of points in the ground set (not the subset).
    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < self.universe, "point {index} outside ground set");
        self.words[index / WORD_BITS] |= 1 << (index % WORD_BITS);
    }

    pub fn remove(&mut self, index: usize) {
        assert!(index < self.universe, "point {index} outside ground set");
        self.words[index / WORD_BITS] &= !(1 << (index % WORD_BITS));
    }

    pub fn contains(&self, index: usize) -> bool {
        index < self.universe && self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    /// Cardinality of the subset.
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.universe
    }

    fn check_same_ground(&self, other: &Self) -> crate::Result<()> {
        if self.universe == other.universe {
            Ok(())
        } else {
            Err(crate::Error::GroundMismatch {
                left: self.universe,
                right: other.universe,
            })
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        debug_assert_eq!(self.universe, other.universe);
        PointSet {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        debug_assert_eq!(self.universe, other.universe);
        PointSet {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        debug_assert_eq!(self.universe, other.universe);
        PointSet {
            universe: self.universe,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn complement(&self) -> Self {
        let mut s = PointSet {
            universe: self.universe,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.clear_tail();
        s
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        debug_assert_eq!(self.universe, other.universe);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        debug_assert_eq!(self.universe, other.universe);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    /// Same-ground check with a typed error, for public entry points.
    pub fn same_ground(&self, other: &Self) -> crate::Result<()> {
        self.check_same_ground(other)
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(wi * WORD_BITS + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * WORD_BITS + b)
                }
            })
        })
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn clear_tail(&mut self) {
        let used = self.universe % WORD_BITS;
        if used != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1 << used) - 1;
            }
        }
        // universe 0 never occurs (ground sets have >= 1 point)
    }
}

impl PartialOrd for PointSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PointSet {
    /// Numeric bitmask order: compares as the integer `sum 2^i` over members.
    fn cmp(&self, other: &Self) -> Ordering {
        debug_assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter().rev().zip(other.words.iter().rev()) {
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_involutive() {
        let s = PointSet::from_indices(70, [0, 3, 65, 69]);
        assert_eq!(s.complement().complement(), s);
        assert_eq!(s.complement().len(), 70 - 4);
    }

    #[test]
    fn full_set_tail_bits_are_clear() {
        let f = PointSet::full(70);
        assert_eq!(f.len(), 70);
        assert!(f.is_full());
        assert!(f.complement().is_empty());
    }

    #[test]
    fn iter_ascending() {
        let s = PointSet::from_indices(130, [128, 5, 64, 0]);
        assert_eq!(s.indices(), vec![0, 5, 64, 128]);
        assert_eq!(s.first(), Some(0));
    }

    #[test]
    fn numeric_order() {
        let a = PointSet::from_indices(4, [0, 1, 2]); // 7
        let b = PointSet::from_indices(4, [3]); // 8
        assert!(a < b);
        let c = PointSet::from_indices(130, [129]);
        let d = PointSet::from_indices(130, (0..129).collect::<Vec<_>>());
        assert!(d < c);
    }

    #[test]
    fn set_algebra() {
        let a = PointSet::from_indices(4, [0, 1]);
        let b = PointSet::from_indices(4, [1, 2]);
        assert_eq!(a.intersection(&b).indices(), vec![1]);
        assert_eq!(a.union(&b).indices(), vec![0, 1, 2]);
        assert_eq!(a.difference(&b).indices(), vec![0]);
        assert!(a.intersection(&b).is_subset_of(&a));
        assert!(!a.is_disjoint(&b));
    }
}
