//! Subsets of the factor index set as 64-bit masks.

use core::fmt;

/// A subset `J` of the index set `I`, stored as a bitmask over factor ids.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexSubset(u64);

impl IndexSubset {
    pub const EMPTY: IndexSubset = IndexSubset(0);

    pub const fn from_bits(bits: u64) -> Self {
        IndexSubset(bits)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `{0, .., n-1}`.
    pub const fn full(n: usize) -> Self {
        if n >= 64 {
            IndexSubset(u64::MAX)
        } else {
            IndexSubset((1u64 << n) - 1)
        }
    }

    pub const fn singleton(i: usize) -> Self {
        IndexSubset(1u64 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        it.into_iter().fold(Self::EMPTY, |s, i| s.with(i))
    }

    pub const fn contains(self, i: usize) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub const fn with(self, i: usize) -> Self {
        IndexSubset(self.0 | 1u64 << i)
    }

    pub const fn without(self, i: usize) -> Self {
        IndexSubset(self.0 & !(1u64 << i))
    }

    pub const fn union(self, other: Self) -> Self {
        IndexSubset(self.0 | other.0)
    }

    pub const fn intersection(self, other: Self) -> Self {
        IndexSubset(self.0 & other.0)
    }

    pub const fn difference(self, other: Self) -> Self {
        IndexSubset(self.0 & !other.0)
    }

    /// `{0..n} \ self`.
    pub const fn complement(self, n: usize) -> Self {
        Self::full(n).difference(self)
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub const fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn is_strict_subset(self, other: Self) -> bool {
        self.is_subset(other) && self.0 != other.0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Indices in increasing order.
    pub fn iter(self) -> Indices {
        Indices(self.0)
    }

    /// All subsets of `{0..n}`, in increasing mask order.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = IndexSubset> {
        (0..=Self::full(n).0).map(IndexSubset)
    }
}

impl fmt::Debug for IndexSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<usize> for IndexSubset {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        Self::from_indices(iter)
    }
}

pub struct Indices(u64);

impl Iterator for Indices {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Indices {}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn set_algebra() {
        let a = IndexSubset::from_indices([0, 2]);
        let b = IndexSubset::from_indices([2, 3]);
        assert_eq!(a.union(b), IndexSubset::from_indices([0, 2, 3]));
        assert_eq!(a.intersection(b), IndexSubset::singleton(2));
        assert_eq!(a.complement(4), IndexSubset::from_indices([1, 3]));
        assert!(IndexSubset::singleton(2).is_strict_subset(a));
        assert!(!a.is_strict_subset(a));
        assert_eq!(a.iter().collect::<Vec<_>>(), [0, 2]);
        assert_eq!(IndexSubset::all_subsets(3).count(), 8);
        assert_eq!(IndexSubset::full(64).len(), 64);
    }
}
