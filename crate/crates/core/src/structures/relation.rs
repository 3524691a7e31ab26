use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Upper bound on the tuple index space of a single relation or team.
const MAX_INDEX_SPACE: usize = 1 << 26;

/// A set of `arity`-tuples over the universe `0..universe`, stored as a bitset
/// over the mixed-radix tuple index (first component most significant).
///
/// Arity 0 is permitted: the index space is then a single point, which is how
/// teams over the empty domain are represented.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    universe: usize,
    arity: usize,
    bits: FixedBitSet,
}

pub(crate) fn index_space(universe: usize, arity: usize) -> Result<usize> {
    u32::try_from(arity)
        .ok()
        .and_then(|a| universe.checked_pow(a))
        .filter(|&size| size <= MAX_INDEX_SPACE)
        .ok_or(Error::ResourceExhausted {
            budget: MAX_INDEX_SPACE as u64,
        })
}

impl Relation {
    pub fn empty(universe: usize, arity: usize) -> Result<Self> {
        let size = index_space(universe, arity)?;
        Ok(Relation {
            universe,
            arity,
            bits: FixedBitSet::with_capacity(size),
        })
    }

    pub fn full(universe: usize, arity: usize) -> Result<Self> {
        let mut rel = Relation::empty(universe, arity)?;
        rel.bits.insert_range(..);
        Ok(rel)
    }

    pub fn from_tuples<I, T>(universe: usize, arity: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: AsRef<[usize]>,
    {
        let mut rel = Relation::empty(universe, arity)?;
        for tuple in tuples {
            let tuple = tuple.as_ref();
            if tuple.len() != arity {
                return Err(Error::Arity {
                    name: "tuple".into(),
                    expected: arity,
                    found: tuple.len(),
                });
            }
            if let Some(&element) = tuple.iter().find(|&&e| e >= universe) {
                return Err(Error::ElementRange {
                    element,
                    size: universe,
                });
            }
            rel.insert(tuple);
        }
        Ok(rel)
    }

    /// Builds the relation whose characteristic bit pattern is `mask`
    /// (bit `i` set iff the tuple with index `i` belongs to the relation).
    pub fn from_mask(universe: usize, arity: usize, mask: u64) -> Result<Self> {
        let mut rel = Relation::empty(universe, arity)?;
        let size = rel.index_space();
        if size < 64 && mask >> size != 0 {
            return Err(Error::Precondition(format!(
                "mask {mask:#x} exceeds index space {size}"
            )));
        }
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            rel.bits.insert(i);
            m &= m - 1;
        }
        Ok(rel)
    }

    /// The characteristic bit pattern, when the index space fits in 64 bits.
    pub fn to_mask(&self) -> Option<u64> {
        if self.index_space() > 64 {
            return None;
        }
        Some(self.bits.ones().fold(0u64, |acc, i| acc | (1 << i)))
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn index_space(&self) -> usize {
        self.bits.len()
    }

    /// Number of tuples.
    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.bits.is_full()
    }

    pub fn encode(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.arity);
        tuple.iter().fold(0, |acc, &e| acc * self.universe + e)
    }

    pub fn decode(&self, mut index: usize, out: &mut [usize]) {
        debug_assert_eq!(out.len(), self.arity);
        for slot in out.iter_mut().rev() {
            *slot = index % self.universe;
            index /= self.universe;
        }
    }

    pub fn tuple_at(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.arity];
        self.decode(index, &mut out);
        out
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        tuple.len() == self.arity
            && tuple.iter().all(|&e| e < self.universe)
            && self.bits.contains(self.encode(tuple))
    }

    pub fn contains_index(&self, index: usize) -> bool {
        self.bits.contains(index)
    }

    /// Inserts a tuple; panics if it lies outside the universe.
    pub fn insert(&mut self, tuple: &[usize]) {
        assert!(
            tuple.len() == self.arity && tuple.iter().all(|&e| e < self.universe),
            "tuple {tuple:?} outside {}^{}",
            self.universe,
            self.arity
        );
        let index = self.encode(tuple);
        self.bits.insert(index);
    }

    pub fn insert_index(&mut self, index: usize) {
        self.bits.insert(index);
    }

    pub fn remove_index(&mut self, index: usize) {
        self.bits.set(index, false);
    }

    /// Tuple indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    /// Tuples in lexicographic order.
    pub fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.bits.ones().map(|i| self.tuple_at(i))
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.same_space(other) && self.bits.is_subset(&other.bits)
    }

    pub fn union(&self, other: &Relation) -> Relation {
        assert!(self.same_space(other), "union of incompatible relations");
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Relation { bits, ..*self }
    }

    pub fn difference(&self, other: &Relation) -> Relation {
        assert!(self.same_space(other), "difference of incompatible relations");
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        Relation { bits, ..*self }
    }

    pub fn complement(&self) -> Relation {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        Relation { bits, ..*self }
    }

    fn same_space(&self, other: &Relation) -> bool {
        self.universe == other.universe && self.arity == other.arity
    }

    /// `{(t[p₁], …, t[p_m]) : t ∈ self}`; positions may repeat or reorder.
    pub fn select(&self, positions: &[usize]) -> Relation {
        let mut out = Relation::empty(self.universe, positions.len())
            .expect("selection of a relation fits its index space");
        let mut tuple = vec![0; self.arity];
        let mut image = vec![0; positions.len()];
        for i in self.bits.ones() {
            self.decode(i, &mut tuple);
            for (slot, &p) in image.iter_mut().zip(positions) {
                *slot = tuple[p];
            }
            let j = out.encode(&image);
            out.bits.insert(j);
        }
        out
    }

    /// Applies `map` to every element, landing in a universe of size
    /// `universe`. Used for permutations and for renumbering a sub-universe.
    pub fn map_elements(&self, map: &[usize], universe: usize) -> Result<Relation> {
        let mut out = Relation::empty(universe, self.arity)?;
        let mut tuple = vec![0; self.arity];
        for i in self.bits.ones() {
            self.decode(i, &mut tuple);
            for e in tuple.iter_mut() {
                *e = map[*e];
                if *e >= universe {
                    return Err(Error::ElementRange {
                        element: *e,
                        size: universe,
                    });
                }
            }
            let j = out.encode(&tuple);
            out.bits.insert(j);
        }
        Ok(out)
    }

    /// Set of elements occurring in some tuple.
    pub fn support(&self) -> Vec<bool> {
        let mut seen = vec![false; self.universe];
        for t in self.tuples() {
            for e in t {
                seen[e] = true;
            }
        }
        seen
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relation[{}^{}]{}", self.universe, self.arity, self)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, t) in self.tuples().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            if self.arity == 1 {
                write!(f, "{}", t[0])?;
            } else {
                write!(f, "(")?;
                for (k, e) in t.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")?;
            }
        }
        f.write_str("}")
    }
}

/// Every relation of the given arity over `0..universe`, in increasing order
/// of the characteristic bit pattern.
#[derive(Debug, Clone)]
pub struct RelationIter {
    universe: usize,
    arity: usize,
    next: u64,
    end: u64,
}

impl Iterator for RelationIter {
    type Item = Relation;

    fn next(&mut self) -> Option<Relation> {
        if self.next >= self.end {
            return None;
        }
        let mask = self.next;
        self.next += 1;
        Some(Relation::from_mask(self.universe, self.arity, mask).expect("mask within index space"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for RelationIter {}

/// Number of relations `2^(universe^arity)`, or `None` when that does not fit
/// in a `u64`.
pub fn relation_count(universe: usize, arity: usize) -> Option<u64> {
    let size = universe.checked_pow(u32::try_from(arity).ok()?)?;
    (size < 64).then(|| 1u64 << size)
}

/// Streams every subset of `universe^arity` exactly once.
///
/// Fails with `ResourceExhausted` when the number of relations exceeds
/// `budget`.
pub fn enumerate_relations(
    universe: usize,
    arity: usize,
    include_empty: bool,
    budget: u64,
) -> Result<RelationIter> {
    if universe == 0 || arity == 0 {
        return Err(Error::Precondition(
            "relation enumeration needs a non-empty universe and arity >= 1".into(),
        ));
    }
    let total = relation_count(universe, arity).ok_or(Error::ResourceExhausted { budget })?;
    let start = u64::from(!include_empty);
    if total - start > budget {
        return Err(Error::ResourceExhausted { budget });
    }
    Ok(RelationIter {
        universe,
        arity,
        next: start,
        end: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unary_relations_over_two_elements() {
        let rels: Vec<_> = enumerate_relations(2, 1, true, 1 << 20).unwrap().collect();
        assert_eq!(rels.len(), 4);
        let shown: Vec<_> = rels.iter().map(|r| r.to_string()).collect();
        assert_eq!(shown, ["{}", "{0}", "{1}", "{0, 1}"]);
    }

    #[test]
    fn binary_relations_over_two_elements() {
        assert_eq!(enumerate_relations(2, 2, true, 1 << 20).unwrap().count(), 16);
        assert_eq!(enumerate_relations(2, 2, false, 1 << 20).unwrap().count(), 15);
    }

    #[test]
    fn ternary_over_three_is_budget_gated() {
        assert_eq!(relation_count(3, 3), Some(1 << 27));
        let err = enumerate_relations(3, 3, true, 1_000_000).unwrap_err();
        assert!(err.is_exhausted());
        assert_eq!(enumerate_relations(3, 3, true, 1 << 27).unwrap().len(), 1 << 27);
    }

    #[test]
    fn exact_counts_up_to_sixteen_tuples() {
        for (n, k) in [(1, 1), (2, 1), (3, 1), (4, 1), (2, 2), (2, 3), (2, 4), (4, 2), (3, 2)] {
            let size = usize::pow(n, k as u32);
            assert!(size <= 16);
            let rels: std::collections::BTreeSet<_> =
                enumerate_relations(n, k, true, 1 << 17).unwrap().collect();
            assert_eq!(rels.len(), 1 << size, "n={n} k={k}");
        }
    }

    #[test]
    fn select_handles_repetition() {
        let r = Relation::from_tuples(2, 2, [[0, 0], [0, 1]]).unwrap();
        assert_eq!(r.select(&[0, 0]).to_string(), "{(0,0)}");
        assert_eq!(r.select(&[1]).to_string(), "{0, 1}");
        assert_eq!(r.select(&[1, 0]).to_string(), "{(0,0), (1,0)}");
    }

    #[test]
    fn mask_round_trip() {
        let r = Relation::from_tuples(3, 1, [[0], [2]]).unwrap();
        assert_eq!(r.to_mask(), Some(0b101));
        assert_eq!(Relation::from_mask(3, 1, 0b101).unwrap(), r);
        assert!(Relation::from_mask(2, 1, 0b100).is_err());
    }

    #[test]
    fn out_of_range_tuple_rejected() {
        let err = Relation::from_tuples(2, 2, [[0, 5]]).unwrap_err();
        assert_eq!(err, Error::ElementRange { element: 5, size: 2 });
    }

    #[test]
    fn arity_zero_has_one_point() {
        let mut r = Relation::empty(3, 0).unwrap();
        assert_eq!(r.index_space(), 1);
        r.insert(&[]);
        assert_eq!(r.len(), 1);
        let empty_universe = Relation::full(0, 2).unwrap();
        assert!(empty_universe.is_empty());
    }
}
