//! Exhaustive classification: closure properties, maximal members,
//! non-jumping, witness search.

use std::fmt;

use super::{ClosureFlags, Dependency, Kind};
use crate::error::{Budget, Error, Result};
use crate::structures::{enumerate_relations, relation_count, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClosureProperty {
    EmptyTeam,
    Downwards,
    Union,
    Upwards,
}

impl ClosureProperty {
    pub const ALL: [ClosureProperty; 4] = [
        ClosureProperty::EmptyTeam,
        ClosureProperty::Downwards,
        ClosureProperty::Union,
        ClosureProperty::Upwards,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClosureProperty::EmptyTeam => "empty-team",
            ClosureProperty::Downwards => "downwards",
            ClosureProperty::Union => "union",
            ClosureProperty::Upwards => "upwards",
        }
    }
}

impl fmt::Display for ClosureProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A counterexample to a closure property over a universe of `universe`
/// elements:
///
/// - empty-team: `[∅]`
/// - downwards: `[R, R']` with `R ∈ D`, `R' ⊆ R`, `R' ∉ D`
/// - union: `[R₁, R₂]` with both in `D` and `R₁ ∪ R₂ ∉ D`
/// - upwards: `[R, R']` with `R ∈ D`, `R' ⊇ R`, `R' ∉ D`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureWitness {
    pub universe: usize,
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyVerdict {
    pub property: ClosureProperty,
    pub witness: Option<ClosureWitness>,
}

impl PropertyVerdict {
    pub fn holds(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureReport {
    pub dependency: String,
    /// Largest universe size swept.
    pub bound: usize,
    pub verdicts: Vec<PropertyVerdict>,
}

impl ClosureReport {
    pub fn verdict(&self, property: ClosureProperty) -> &PropertyVerdict {
        self.verdicts
            .iter()
            .find(|v| v.property == property)
            .expect("all properties reported")
    }

    pub fn flags(&self) -> ClosureFlags {
        ClosureFlags {
            empty_team: self.verdict(ClosureProperty::EmptyTeam).holds(),
            downwards: self.verdict(ClosureProperty::Downwards).holds(),
            union: self.verdict(ClosureProperty::Union).holds(),
            upwards: self.verdict(ClosureProperty::Upwards).holds(),
        }
    }

    /// Re-checks every witness against `dep`.
    pub fn witnesses_valid(&self, dep: &Dependency) -> bool {
        self.verdicts.iter().all(|v| {
            let Some(w) = &v.witness else { return true };
            let r = &w.relations;
            match v.property {
                ClosureProperty::EmptyTeam => r.len() == 1 && r[0].is_empty() && !dep.holds(&r[0]),
                ClosureProperty::Downwards => {
                    r.len() == 2 && dep.holds(&r[0]) && r[1].is_subset(&r[0]) && !dep.holds(&r[1])
                }
                ClosureProperty::Union => {
                    r.len() == 2
                        && dep.holds(&r[0])
                        && dep.holds(&r[1])
                        && !dep.holds(&r[0].union(&r[1]))
                }
                ClosureProperty::Upwards => {
                    r.len() == 2 && dep.holds(&r[0]) && r[0].is_subset(&r[1]) && !dep.holds(&r[1])
                }
            }
        })
    }
}

/// Every member of `dep` over a universe of size `n`, in increasing order.
pub fn members(dep: &Dependency, n: usize, budget: &mut Budget) -> Result<Vec<Relation>> {
    if let Kind::Builtin(b) = &dep.kind {
        let limit = budget.limit().saturating_sub(budget.used());
        if let Some(found) = b.members(n, limit) {
            let found = found?;
            budget.spend(found.len() as u64)?;
            return Ok(found);
        }
    }
    let k = dep.arity();
    if n == 0 {
        let empty = Relation::empty(0, k)?;
        return Ok(if dep.holds(&empty) { vec![empty] } else { vec![] });
    }
    let total = relation_count(n, k).ok_or(Error::ResourceExhausted {
        budget: budget.limit(),
    })?;
    budget.reserve(u128::from(total))?;
    budget.spend(total)?;
    Ok(enumerate_relations(n, k, true, u64::MAX)?
        .filter(|r| dep.holds(r))
        .collect())
}

/// Exhaustive closure classification over universes `0..=max_universe`.
///
/// Downwards and upwards closure are checked one tuple at a time, which is
/// complete: any violating pair of members is joined by a chain of
/// single-tuple steps, one of which leaves `D`. Union closure is checked on
/// all pairs of members.
pub fn classify_closure(dep: &Dependency, max_universe: usize, budget: &mut Budget) -> Result<ClosureReport> {
    let k = dep.arity();
    let mut found: [Option<ClosureWitness>; 4] = Default::default();
    for n in 0..=max_universe {
        if found.iter().all(Option::is_some) {
            break;
        }
        let empty = Relation::empty(n, k)?;
        if found[0].is_none() && !dep.holds(&empty) {
            found[0] = Some(ClosureWitness {
                universe: n,
                relations: vec![empty],
            });
        }
        if found[1..].iter().all(Option::is_some) {
            continue;
        }
        let ms = members(dep, n, budget)?;
        let space = crate::structures::index_space(n, k)?;
        for r in &ms {
            if found[1].is_some() && found[3].is_some() {
                break;
            }
            budget.spend(space as u64)?;
            for i in 0..space {
                let mut s = r.clone();
                if r.contains_index(i) {
                    if found[1].is_none() {
                        s.remove_index(i);
                        if !dep.holds(&s) {
                            found[1] = Some(ClosureWitness {
                                universe: n,
                                relations: vec![r.clone(), s],
                            });
                        }
                    }
                } else if found[3].is_none() {
                    s.insert_index(i);
                    if !dep.holds(&s) {
                        found[3] = Some(ClosureWitness {
                            universe: n,
                            relations: vec![r.clone(), s],
                        });
                    }
                }
            }
        }
        if found[2].is_none() {
            'pairs: for (i, a) in ms.iter().enumerate() {
                budget.spend((ms.len() - i) as u64)?;
                for b in &ms[i + 1..] {
                    if !dep.holds(&a.union(b)) {
                        found[2] = Some(ClosureWitness {
                            universe: n,
                            relations: vec![a.clone(), b.clone()],
                        });
                        break 'pairs;
                    }
                }
            }
        }
    }
    let verdicts = ClosureProperty::ALL
        .iter()
        .zip(found)
        .map(|(&property, witness)| PropertyVerdict { property, witness })
        .collect();
    Ok(ClosureReport {
        dependency: dep.name().to_string(),
        bound: max_universe,
        verdicts,
    })
}

/// `(M, R) ∈ D_max`: a member with no proper superset in `D`.
pub fn in_dmax(dep: &Dependency, relation: &Relation, budget: &mut Budget) -> Result<bool> {
    if !dep.holds(relation) {
        return Ok(false);
    }
    if let Kind::Builtin(b) = &dep.kind {
        let limit = budget.limit().saturating_sub(budget.used());
        if let Some(found) = b.members(relation.universe(), limit) {
            return Ok(!found?
                .iter()
                .any(|s| s != relation && relation.is_subset(s)));
        }
    }
    let free: Vec<usize> = (0..relation.index_space())
        .filter(|&i| !relation.contains_index(i))
        .collect();
    if free.len() >= 64 {
        return Err(Error::ResourceExhausted {
            budget: budget.limit(),
        });
    }
    budget.reserve(1u128 << free.len())?;
    for mask in 1..1u64 << free.len() {
        budget.spend(1)?;
        let mut s = relation.clone();
        for (b, &i) in free.iter().enumerate() {
            if mask >> b & 1 == 1 {
                s.insert_index(i);
            }
        }
        if dep.holds(&s) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonJumpingReport {
    pub dependency: String,
    pub bound: usize,
    /// First member (smallest universe, then smallest bit pattern) that no
    /// maximal member reaches through an interval inside `D`.
    pub witness: Option<(usize, Relation)>,
}

impl NonJumpingReport {
    pub fn nonjumping(&self) -> bool {
        self.witness.is_none()
    }
}

/// Largest tuple index space handled by the non-jumping sweep.
const NONJUMPING_MAX_CELLS: usize = 20;

/// For every member `R` over universes `1..=max_universe`, searches for
/// `R' ⊇ R` in `D_max` with every `S` between `R` and `R'` in `D`.
pub fn nonjumping_check(dep: &Dependency, max_universe: usize, budget: &mut Budget) -> Result<NonJumpingReport> {
    let k = dep.arity();
    for n in 1..=max_universe {
        let cells = crate::structures::index_space(n, k)?;
        if cells > NONJUMPING_MAX_CELLS {
            return Err(Error::ResourceExhausted {
                budget: budget.limit(),
            });
        }
        let states = 1usize << cells;
        let mut member = vec![false; states];
        for r in members(dep, n, budget)? {
            member[r.to_mask().expect("small") as usize] = true;
        }
        // above[S]: some member strictly contains S.
        let mut reach = member.clone();
        let mut above = vec![false; states];
        for s in (0..states).rev() {
            for t in 0..cells {
                if s >> t & 1 == 0 && reach[s | 1 << t] {
                    above[s] = true;
                    reach[s] = true;
                    break;
                }
            }
        }
        let maximal = |s: usize| member[s] && !above[s];
        let mut good = vec![false; states];
        for r in 0..states {
            if !member[r] {
                continue;
            }
            let free: Vec<usize> = (0..cells).filter(|&t| r >> t & 1 == 0).collect();
            budget.spend(1u64 << free.len())?;
            let mut ok = false;
            // Supersets of r in increasing order, so S∖{t} precedes S.
            for sub in 0..1usize << free.len() {
                let s = free
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| sub >> b & 1 == 1)
                    .fold(r, |acc, (_, &t)| acc | 1 << t);
                good[s] = member[s]
                    && free
                        .iter()
                        .filter(|&&t| s >> t & 1 == 1)
                        .all(|&t| good[s & !(1 << t)]);
                if good[s] && maximal(s) {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Ok(NonJumpingReport {
                    dependency: dep.name().to_string(),
                    bound: max_universe,
                    witness: Some((n, Relation::from_mask(n, k, r as u64)?)),
                });
            }
        }
    }
    Ok(NonJumpingReport {
        dependency: dep.name().to_string(),
        bound: max_universe,
        witness: None,
    })
}

/// Some `R` with `(M, R) ∈ D` over a universe of `universe` elements
/// (non-empty if requested). Built-ins answer directly, the order atoms by
/// enumerating the linear orders of `M`; custom dependencies fall back to
/// enumerating all `2^(n^k)` relations.
pub fn exists_relation(
    dep: &Dependency,
    universe: usize,
    require_nonempty: bool,
    budget: &mut Budget,
) -> Result<Option<Relation>> {
    let k = dep.arity();
    if let Kind::Builtin(b) = &dep.kind {
        budget.spend(1)?;
        return b.witness(universe, k, require_nonempty);
    }
    if universe == 0 {
        let empty = Relation::empty(0, k)?;
        return Ok((!require_nonempty && dep.holds(&empty)).then_some(empty));
    }
    let total = relation_count(universe, k).ok_or(Error::ResourceExhausted {
        budget: budget.limit(),
    })?;
    budget.reserve(u128::from(total))?;
    for r in enumerate_relations(universe, k, !require_nonempty, u64::MAX)? {
        budget.spend(1)?;
        if dep.holds(&r) {
            return Ok(Some(r));
        }
    }
    Ok(None)
}
