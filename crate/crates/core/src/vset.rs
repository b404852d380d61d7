//! Sorted, duplicate-free vertex sets.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A set of vertex ids, stored as a sorted duplicate-free list.
///
/// Vertices are `u32` indices into `0..n` of the ambient hypergraph. The
/// sorted representation makes subset tests and set algebra cheap and gives
/// every set a unique canonical form, which downstream serialization and
/// tie-breaking rely on.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<u32>);

impl VertexSet {
    pub fn new() -> Self {
        VertexSet(Vec::new())
    }

    /// Wraps a vector that is already sorted and duplicate-free.
    pub fn from_sorted(v: Vec<u32>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        VertexSet(v)
    }

    pub fn singleton(v: u32) -> Self {
        VertexSet(vec![v])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn insert(&mut self, v: u32) {
        if let Err(pos) = self.0.binary_search(&v) {
            self.0.insert(pos, v);
        }
    }

    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for &x in &self.0 {
            for &y in it.by_ref() {
                match y.cmp(&x) {
                    std::cmp::Ordering::Less => continue,
                    std::cmp::Ordering::Equal => continue 'outer,
                    std::cmp::Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        VertexSet(out)
    }

    /// Set difference `self - other`.
    pub fn minus(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| !other.contains(v)).collect())
    }

    pub fn intersect(&self, other: &VertexSet) -> VertexSet {
        VertexSet(self.0.iter().copied().filter(|&v| other.contains(v)).collect())
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        let (a, b) = if self.0.len() <= other.0.len() { (self, other) } else { (other, self) };
        a.0.iter().any(|&v| b.contains(v))
    }

    /// Bitmask over the low 64 vertex ids; callers must ensure all ids < 64.
    pub fn mask64(&self) -> u64 {
        let mut m = 0u64;
        for &v in &self.0 {
            debug_assert!(v < 64);
            m |= 1u64 << v;
        }
        m
    }

    /// All subsets of the set, in (size, lex) order. Exponential; callers
    /// keep `len()` at rank scale.
    pub fn subsets(&self) -> Vec<VertexSet> {
        let k = self.0.len();
        let mut out: Vec<VertexSet> = (0u32..(1 << k))
            .map(|mask| {
                VertexSet(
                    (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| self.0[i]).collect(),
                )
            })
            .collect();
        out.sort_unstable_by(|a, b| (a.len(), &a.0).cmp(&(b.len(), &b.0)));
        out
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl From<Vec<u32>> for VertexSet {
    fn from(v: Vec<u32>) -> Self {
        v.into_iter().collect()
    }
}

impl FromIterator<u32> for VertexSet {
    /// Builds a set from arbitrary ids, sorting and deduplicating.
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut v: Vec<u32> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }
}

#[macro_export]
macro_rules! vset {
    ($($v:expr),* $(,)?) => {
        $crate::vset::VertexSet::from_iter([$($v as u32),*])
    };
}
