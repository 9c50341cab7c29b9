//! Multi-indices of ℕ³, level enumeration and additive splits.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Add;

/// A point `(k1, k2, k3)` of ℕ³ labelling one basis mode.
///
/// Ordering is by level `|k|` first, then lexicographic; iterating a sorted
/// collection of indices therefore visits them level by level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct MultiIndex(pub [u32; 3]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0, 0, 0]);

    pub const fn new(k1: u32, k2: u32, k3: u32) -> Self {
        MultiIndex([k1, k2, k3])
    }

    /// `|k| = k1 + k2 + k3`.
    pub fn level(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// Component `i` for `i ∈ {0, 1, 2}`.
    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    /// `k1² + k2² + k3²`.
    pub fn norm_sq(&self) -> u64 {
        self.0.iter().map(|&c| (c as u64) * (c as u64)).sum()
    }

    /// Componentwise `self ≤ other`.
    pub fn le_componentwise(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }

    /// `self − other` if componentwise nonnegative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        Some(MultiIndex([
            self.0[0].checked_sub(other.0[0])?,
            self.0[1].checked_sub(other.0[1])?,
            self.0[2].checked_sub(other.0[2])?,
        ]))
    }

    /// Components sorted in decreasing order.
    pub fn sorted_desc(&self) -> [u32; 3] {
        let mut c = self.0;
        c.sort_unstable_by(|a, b| b.cmp(a));
        c
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level()
            .cmp(&other.level())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: MultiIndex) -> MultiIndex {
        MultiIndex([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
        ])
    }
}

impl From<[u32; 3]> for MultiIndex {
    fn from(k: [u32; 3]) -> Self {
        MultiIndex(k)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// All `k` with `|k| = level`, lexicographically ascending.
pub fn level_modes(level: u32) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(((level + 1) * (level + 2) / 2) as usize);
    for k1 in 0..=level {
        for k2 in 0..=level - k1 {
            out.push(MultiIndex([k1, k2, level - k1 - k2]));
        }
    }
    out
}

/// All modes with `|k| ≤ max_level`, in level-then-lexicographic order.
pub fn modes_up_to(max_level: u32) -> Vec<MultiIndex> {
    (0..=max_level).flat_map(level_modes).collect()
}

/// Ordered pairs `(k′, k″)` with `k′ + k″ = k` and both parts nonzero.
///
/// There are `(k1+1)(k2+1)(k3+1) − 2` of them; the list is symmetric under
/// swapping the pair.
pub fn splits(k: &MultiIndex) -> Vec<(MultiIndex, MultiIndex)> {
    let [a, b, c] = k.0;
    let mut out = Vec::new();
    for i in 0..=a {
        for j in 0..=b {
            for l in 0..=c {
                let first = MultiIndex([i, j, l]);
                if first.is_zero() || first == *k {
                    continue;
                }
                out.push((first, MultiIndex([a - i, b - j, c - l])));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_enumeration() {
        assert_eq!(level_modes(0), [MultiIndex::ZERO]);
        assert_eq!(
            level_modes(1),
            [
                MultiIndex::new(0, 0, 1),
                MultiIndex::new(0, 1, 0),
                MultiIndex::new(1, 0, 0)
            ]
        );
        for l in 0..10u32 {
            // brute force over the cube
            let mut count = 0;
            for a in 0..=l {
                for b in 0..=l {
                    for c in 0..=l {
                        if a + b + c == l {
                            count += 1;
                        }
                    }
                }
            }
            assert_eq!(level_modes(l).len(), count);
            assert_eq!(count as u32, (l + 1) * (l + 2) / 2);
        }
        assert_eq!(level_modes(2).len(), 6);
    }

    #[test]
    fn split_examples() {
        assert!(splits(&MultiIndex::new(1, 0, 0)).is_empty());
        assert_eq!(
            splits(&MultiIndex::new(1, 1, 0)),
            [
                (MultiIndex::new(0, 1, 0), MultiIndex::new(1, 0, 0)),
                (MultiIndex::new(1, 0, 0), MultiIndex::new(0, 1, 0)),
            ]
        );
        assert_eq!(
            splits(&MultiIndex::new(2, 0, 0)),
            [(MultiIndex::new(1, 0, 0), MultiIndex::new(1, 0, 0))]
        );
    }

    #[test]
    fn split_invariants_up_to_level_8() {
        for k in modes_up_to(8).into_iter().filter(|k| !k.is_zero()) {
            let s = splits(&k);
            let [a, b, c] = k.0;
            assert_eq!(s.len() as u32, (a + 1) * (b + 1) * (c + 1) - 2);
            for (p, q) in &s {
                assert_eq!(*p + *q, k);
                assert!(!p.is_zero() && !q.is_zero());
                assert!(s.contains(&(*q, *p)));
            }
        }
    }

    #[test]
    fn ordering_is_level_first() {
        let mut v = alloc::vec![
            MultiIndex::new(2, 0, 0),
            MultiIndex::new(0, 0, 1),
            MultiIndex::new(0, 3, 0),
            MultiIndex::ZERO,
        ];
        v.sort();
        assert_eq!(
            v,
            [
                MultiIndex::ZERO,
                MultiIndex::new(0, 0, 1),
                MultiIndex::new(2, 0, 0),
                MultiIndex::new(0, 3, 0)
            ]
        );
    }
}
