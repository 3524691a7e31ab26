//! Semantics of the built-in dependencies.

use itertools::Itertools;

use super::ClosureFlags;
use crate::error::{Error, Result};
use crate::structures::Relation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// At most one tuple.
    Const,
    /// At least two tuples.
    NonConst,
    /// The first `x` columns functionally determine the remaining `y`.
    Dep { x: usize, y: usize },
    /// Conditional independence `x̄ ⊥_ȳ z̄`, columns laid out as `x̄ ȳ z̄`.
    Indep { x: usize, y: usize, z: usize },
    /// The first half of the columns is included in the second half.
    Inc { k: usize },
    /// Negation of `Inc`.
    NonInc { k: usize },
    NonEmpty,
    All,
    /// Empty or full.
    U,
    /// Any size except exactly one tuple.
    NotOne,
    /// `LO2(x,y,z)`; `strict` reads the order as `<` instead of `≤`.
    Lo2 { strict: bool },
    Lo3 { strict: bool },
}

pub const BUILTIN_NAMES: &[&str] = &[
    "const", "nonconst", "dep", "indep", "inc", "ninc", "ne", "all", "u", "neq1", "lo2", "lo3",
];

fn shape_error(name: &str, shape: &[usize], wanted: &str) -> Error {
    Error::UnsupportedShape(format!(
        "`{name}` takes {wanted}, got groups of sizes {shape:?}"
    ))
}

impl Builtin {
    pub fn from_shape(name: &str, shape: &[usize], strict_orders: bool) -> Result<Builtin> {
        let single = |wanted: &str| -> Result<usize> {
            match shape {
                [k] if *k >= 1 => Ok(*k),
                _ => Err(shape_error(name, shape, wanted)),
            }
        };
        Ok(match name {
            "const" => single("one non-empty tuple").map(|_| Builtin::Const)?,
            "nonconst" => single("one non-empty tuple").map(|_| Builtin::NonConst)?,
            "ne" => single("one non-empty tuple").map(|_| Builtin::NonEmpty)?,
            "all" => single("one non-empty tuple").map(|_| Builtin::All)?,
            "u" => single("one non-empty tuple").map(|_| Builtin::U)?,
            "neq1" => single("one non-empty tuple").map(|_| Builtin::NotOne)?,
            "dep" => match shape {
                [x, y] if *y >= 1 => Builtin::Dep { x: *x, y: *y },
                _ => return Err(shape_error(name, shape, "`x̄ ; ȳ` with ȳ non-empty")),
            },
            "indep" => match shape {
                [x, y, z] if *x >= 1 && *z >= 1 => Builtin::Indep {
                    x: *x,
                    y: *y,
                    z: *z,
                },
                _ => return Err(shape_error(name, shape, "`x̄ ; ȳ ; z̄` with x̄, z̄ non-empty")),
            },
            "inc" | "ninc" => match shape {
                [a, b] if a == b && *a >= 1 => {
                    if name == "inc" {
                        Builtin::Inc { k: *a }
                    } else {
                        Builtin::NonInc { k: *a }
                    }
                }
                _ => return Err(shape_error(name, shape, "two tuples of equal non-zero length")),
            },
            "lo2" | "lo3" => match shape {
                [3] if name == "lo2" => Builtin::Lo2 {
                    strict: strict_orders,
                },
                [3] => Builtin::Lo3 {
                    strict: strict_orders,
                },
                _ => return Err(Error::Arity {
                    name: name.to_string(),
                    expected: 3,
                    found: shape.iter().sum(),
                }),
            },
            _ => return Err(Error::UnknownDependency(name.to_string())),
        })
    }

    /// Declared closure flags; the test suite checks them against
    /// exhaustive classification.
    pub fn flags(self) -> ClosureFlags {
        let f = |empty_team, downwards, union, upwards| ClosureFlags {
            empty_team,
            downwards,
            union,
            upwards,
        };
        match self {
            Builtin::Const | Builtin::Dep { .. } => f(true, true, false, false),
            Builtin::NonConst | Builtin::NonEmpty | Builtin::All => f(false, false, true, true),
            Builtin::Indep { .. } => f(true, false, false, false),
            Builtin::Inc { .. } | Builtin::U | Builtin::NotOne => f(true, false, true, false),
            Builtin::NonInc { .. } | Builtin::Lo2 { .. } | Builtin::Lo3 { .. } => {
                f(false, false, false, false)
            }
        }
    }

    pub fn holds(self, r: &Relation) -> bool {
        match self {
            Builtin::Const => r.len() <= 1,
            Builtin::NonConst => r.len() >= 2,
            Builtin::NonEmpty => !r.is_empty(),
            Builtin::All => r.is_full(),
            Builtin::U => r.is_empty() || r.is_full(),
            Builtin::NotOne => r.len() != 1,
            Builtin::Dep { x, .. } => functional(r, x),
            Builtin::Indep { x, y, .. } => independent(r, x, y),
            Builtin::Inc { k } => included(r, k),
            Builtin::NonInc { k } => !included(r, k),
            Builtin::Lo2 { strict } => linear_order_pattern(r, 2, strict).is_some(),
            Builtin::Lo3 { strict } => linear_order_pattern(r, 3, strict).is_some(),
        }
    }

    /// A member over a universe of size `n` (non-empty if requested), or
    /// `None` when there is none. Each answer is re-checked with `holds`.
    pub fn witness(self, n: usize, arity: usize, require_nonempty: bool) -> Result<Option<Relation>> {
        let empty = Relation::empty(n, arity)?;
        let full = Relation::full(n, arity)?;
        let point = |t: Vec<usize>| Relation::from_tuples(n, arity, [t]);
        let candidate = match self {
            Builtin::Lo2 { strict } => return order_witness(n, 2, strict),
            Builtin::Lo3 { strict } => return order_witness(n, 3, strict),
            _ if !require_nonempty && self.holds(&empty) => Some(empty),
            _ if n == 0 => None,
            Builtin::Const | Builtin::Dep { .. } | Builtin::Indep { .. } | Builtin::Inc { .. } => {
                Some(point(vec![0; arity])?)
            }
            Builtin::NonEmpty | Builtin::All | Builtin::U => Some(full),
            Builtin::NotOne | Builtin::NonConst => (full.len() >= 2).then_some(full),
            Builtin::NonInc { k } => {
                if n >= 2 {
                    let t = std::iter::repeat(0).take(k).chain(std::iter::repeat(1).take(k));
                    Some(point(t.collect())?)
                } else {
                    None
                }
            }
        };
        debug_assert!(candidate.as_ref().map_or(true, |r| self.holds(r)));
        Ok(candidate)
    }

    /// For the order atoms, every member over `n` elements; other built-ins
    /// have no specialised enumerator.
    pub fn members(self, n: usize, budget: u64) -> Option<Result<Vec<Relation>>> {
        match self {
            Builtin::Lo2 { strict } => Some(order_members(n, 2, strict, budget)),
            Builtin::Lo3 { strict } => Some(order_members(n, 3, strict, budget)),
            _ => None,
        }
    }
}

fn functional(r: &Relation, x: usize) -> bool {
    let mut seen = std::collections::HashMap::new();
    r.tuples().all(|t| {
        let (key, value) = t.split_at(x);
        match seen.entry(key.to_vec()) {
            std::collections::hash_map::Entry::Occupied(e) => e.get() == &value.to_vec(),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(value.to_vec());
                true
            }
        }
    })
}

/// `(x̄,ȳ,z̄), (x̄',ȳ,z̄') ∈ R ⇒ (x̄,ȳ,z̄') ∈ R`.
fn independent(r: &Relation, x: usize, y: usize) -> bool {
    let tuples: Vec<Vec<usize>> = r.tuples().collect();
    tuples.iter().all(|a| {
        tuples.iter().all(|b| {
            a[x..x + y] != b[x..x + y] || {
                let mut t = a[..x + y].to_vec();
                t.extend_from_slice(&b[x + y..]);
                r.contains(&t)
            }
        })
    })
}

fn included(r: &Relation, k: usize) -> bool {
    let left: Vec<usize> = (0..k).collect();
    let right: Vec<usize> = (k..2 * k).collect();
    r.select(&left).is_subset(&r.select(&right))
}

/// If `R(xy)` is a total order on all of `M` (reflexive, or strict when
/// asked), the elements listed from first to last.
fn order_sequence(pairs: &Relation, strict: bool) -> Option<Vec<usize>> {
    let n = pairs.universe();
    for a in 0..n {
        if pairs.contains(&[a, a]) == strict {
            return None;
        }
        for b in 0..n {
            if a != b && pairs.contains(&[a, b]) == pairs.contains(&[b, a]) {
                return None;
            }
        }
    }
    // Totality and antisymmetry hold; count predecessors and check
    // transitivity through the induced ranking.
    let rank: Vec<usize> = (0..n)
        .map(|b| (0..n).filter(|&a| a != b && pairs.contains(&[a, b])).count())
        .collect();
    let mut seq = vec![usize::MAX; n];
    for (e, &r) in rank.iter().enumerate() {
        if seq[r] != usize::MAX {
            return None;
        }
        seq[r] = e;
    }
    for a in 0..n {
        for b in 0..n {
            if a != b && pairs.contains(&[a, b]) != (rank[a] < rank[b]) {
                return None;
            }
        }
    }
    Some(seq)
}

/// Checks the order-atom condition with period `p` (2 for LO2, 3 for LO3)
/// and returns the order sequence on success.
///
/// `z` must avoid the first `p - 1` elements, contain the `p`-th and the
/// last, and each member's next `p - 1` successors are excluded while the
/// `p`-th successor is included, as far as those successors exist.
fn linear_order_pattern(r: &Relation, p: usize, strict: bool) -> Option<Vec<usize>> {
    if r.arity() != 3 {
        return None;
    }
    let seq = order_sequence(&r.select(&[0, 1]), strict)?;
    let z = r.select(&[2]);
    z_pattern_holds(&seq, |e| z.contains(&[e]), p).then_some(seq)
}

fn z_pattern_holds(seq: &[usize], in_z: impl Fn(usize) -> bool, p: usize) -> bool {
    let n = seq.len();
    if n < p {
        return false;
    }
    if seq[..p - 1].iter().any(|&e| in_z(e)) || !in_z(seq[p - 1]) || !in_z(seq[n - 1]) {
        return false;
    }
    (0..n).filter(|&i| in_z(seq[i])).all(|i| {
        (1..p).all(|d| i + d >= n || !in_z(seq[i + d])) && (i + p >= n || in_z(seq[i + p]))
    })
}

fn order_relation(seq: &[usize], strict: bool) -> Relation {
    let n = seq.len();
    let mut r = Relation::empty(n, 2).expect("small");
    for i in 0..n {
        for j in i..n {
            if !(strict && i == j) {
                r.insert(&[seq[i], seq[j]]);
            }
        }
    }
    r
}

fn product_with(order: &Relation, z: &[usize]) -> Relation {
    let n = order.universe();
    let mut r = Relation::empty(n, 3).expect("small");
    for t in order.tuples() {
        for &c in z {
            r.insert(&[t[0], t[1], c]);
        }
    }
    r
}

/// Valid z-sets for the given order sequence: all subsets passing the
/// pattern check (at most one).
fn z_sets(seq: &[usize], p: usize) -> Vec<Vec<usize>> {
    let n = seq.len();
    (0..1u64 << n)
        .map(|mask| (0..n).filter(|&e| mask >> e & 1 == 1).collect::<Vec<_>>())
        .filter(|z| z_pattern_holds(seq, |e| z.contains(&e), p))
        .collect()
}

/// Order-enumeration witness search: every linear order of `M` and every
/// subset of `M` as the z-set, returning `order × z` for the first pair that
/// satisfies the atom.
pub(crate) fn order_witness(n: usize, p: usize, strict: bool) -> Result<Option<Relation>> {
    if n > 10 {
        return Err(Error::ResourceExhausted {
            budget: (1..=10u64).product(),
        });
    }
    for seq in (0..n).permutations(n) {
        let order = order_relation(&seq, strict);
        for z in z_sets(&seq, p) {
            let r = product_with(&order, &z);
            if linear_order_pattern(&r, p, strict).is_some() {
                return Ok(Some(r));
            }
        }
    }
    Ok(None)
}

fn order_members(n: usize, p: usize, strict: bool, budget: u64) -> Result<Vec<Relation>> {
    let mut out = Vec::new();
    let mut spent = 0u64;
    if n > 8 {
        return Err(Error::ResourceExhausted { budget });
    }
    for seq in (0..n).permutations(n) {
        let order = order_relation(&seq, strict);
        for z in z_sets(&seq, p) {
            // Every R ⊆ order × z whose two projections are exactly the
            // order and z.
            let cells = product_with(&order, &z);
            let idx: Vec<usize> = cells.indices().collect();
            if idx.len() >= 63 {
                return Err(Error::ResourceExhausted { budget });
            }
            spent = spent.saturating_add(1 << idx.len());
            if spent > budget {
                return Err(Error::ResourceExhausted { budget });
            }
            for mask in 1..1u64 << idx.len() {
                let mut r = Relation::empty(n, 3)?;
                for (b, &i) in idx.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        r.insert_index(i);
                    }
                }
                if linear_order_pattern(&r, p, strict).is_some() {
                    out.push(r);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lo2() -> Builtin {
        Builtin::Lo2 { strict: false }
    }

    #[test]
    fn constancy_and_emptiness() {
        let r0 = Relation::from_tuples(2, 1, [[0]]).unwrap();
        let r01 = Relation::from_tuples(2, 1, [[0], [1]]).unwrap();
        assert!(Builtin::Const.holds(&r0));
        assert!(!Builtin::Const.holds(&r01));
        assert!(!Builtin::NonEmpty.holds(&Relation::empty(3, 1).unwrap()));
        assert!(Builtin::U.holds(&r01) && !Builtin::U.holds(&r0));
        assert!(Builtin::NotOne.holds(&Relation::empty(2, 1).unwrap()) && !Builtin::NotOne.holds(&r0));
    }

    #[test]
    fn lo2_on_two_elements() {
        let r = Relation::from_tuples(2, 3, [[0, 0, 1], [0, 1, 1], [1, 1, 1]]).unwrap();
        assert!(lo2().holds(&r));
        // Wrong z-set.
        let r = Relation::from_tuples(2, 3, [[0, 0, 0], [0, 1, 0], [1, 1, 0]]).unwrap();
        assert!(!lo2().holds(&r));
        // Not reflexive.
        let r = Relation::from_tuples(2, 3, [[0, 1, 1]]).unwrap();
        assert!(!lo2().holds(&r));
        assert!(Builtin::Lo2 { strict: true }.holds(&r));
    }

    #[test]
    fn lo_divisibility() {
        for n in 1..=7 {
            let two = order_witness(n, 2, false).unwrap().is_some();
            let three = order_witness(n, 3, false).unwrap().is_some();
            assert_eq!(two, n % 2 == 0, "lo2 n={n}");
            assert_eq!(three, n % 3 == 0, "lo3 n={n}");
        }
        assert!(order_witness(0, 2, false).unwrap().is_none());
    }

    #[test]
    fn lo2_members_on_three_elements_empty() {
        assert!(lo2().members(3, 1 << 20).unwrap().unwrap().is_empty());
        assert_eq!(lo2().members(2, 1 << 20).unwrap().unwrap().len(), 2);
    }

    #[test]
    fn dependence_and_independence() {
        let d = Builtin::Dep { x: 1, y: 1 };
        assert!(d.holds(&Relation::from_tuples(2, 2, [[0, 0], [1, 0]]).unwrap()));
        assert!(!d.holds(&Relation::from_tuples(2, 2, [[0, 0], [0, 1]]).unwrap()));
        let i = Builtin::Indep { x: 1, y: 0, z: 1 };
        assert!(i.holds(&Relation::full(2, 2).unwrap()));
        assert!(!i.holds(&Relation::from_tuples(2, 2, [[0, 0], [1, 1]]).unwrap()));
        let inc = Builtin::Inc { k: 1 };
        assert!(inc.holds(&Relation::from_tuples(2, 2, [[0, 1], [1, 0]]).unwrap()));
        assert!(!inc.holds(&Relation::from_tuples(2, 2, [[0, 1]]).unwrap()));
    }

    #[test]
    fn witnesses_are_members() {
        for name in BUILTIN_NAMES {
            let shape: &[usize] = match *name {
                "dep" | "inc" | "ninc" => &[1, 1],
                "indep" => &[1, 0, 1],
                "lo2" | "lo3" => &[3],
                _ => &[1],
            };
            let b = Builtin::from_shape(name, shape, false).unwrap();
            let k: usize = shape.iter().sum();
            for n in 0..=3 {
                for ne in [false, true] {
                    let w = b.witness(n, k, ne).unwrap();
                    let brute = (n > 0 && n.pow(k as u32) <= 9).then(|| {
                        crate::structures::enumerate_relations(n, k, !ne, 1 << 10)
                            .unwrap()
                            .any(|r| b.holds(&r))
                    });
                    if let Some(r) = &w {
                        assert!(b.holds(r), "{name} n={n}");
                        assert!(!ne || !r.is_empty());
                    }
                    if let Some(expected) = brute {
                        assert_eq!(w.is_some(), expected, "{name} n={n} nonempty={ne}");
                    }
                }
            }
        }
    }
}
