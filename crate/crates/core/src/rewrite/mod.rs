//! Formula transformations: pulling `⊔` to the top, encoding `⊔` with
//! constancy atoms, the `E` and definability constructions, relativization.

mod definability;

use crate::dependencies::{default_shape, Dependency, Registry, BUILTIN_NAMES};
use crate::error::{Error, Result};
use crate::structures::Relation;
use crate::syntax::{DependencyAtom, Formula, Var};

pub use definability::{
    all_form, build_definability_formula, const_form, load_definability_form, Definability,
    DefinabilityForm,
};

/// `ψ₁ ⊔ … ⊔ ψ_m` with every `ψ_i` free of `⊔`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisjunctList(Vec<Formula>);

impl DisjunctList {
    pub fn new(disjuncts: Vec<Formula>) -> Result<Self> {
        if disjuncts.is_empty() {
            return Err(Error::Precondition("a disjunct list is never empty".into()));
        }
        if let Some(d) = disjuncts.iter().find(|d| d.has_global_or()) {
            return Err(Error::Precondition(format!("disjunct `{d}` contains ⊔")));
        }
        Ok(DisjunctList(disjuncts))
    }

    pub fn disjuncts(&self) -> &[Formula] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The disjuncts joined by `⊔` (right-nested).
    pub fn to_formula(&self) -> Formula {
        let mut iter = self.0.iter().rev().cloned();
        let last = iter.next().expect("non-empty");
        iter.fold(last, |acc, d| Formula::global_or(d, acc))
    }
}

impl IntoIterator for DisjunctList {
    type Item = Formula;
    type IntoIter = std::vec::IntoIter<Formula>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

fn possibly_above_global_or(f: &Formula) -> bool {
    let mut found = false;
    f.walk(&mut |g| {
        if let Formula::Possibly(b) = g {
            found |= b.has_global_or();
        }
    });
    found
}

/// Polynomial interpretation that strictly decreases with every pull-out
/// step: leaves count 2, `⊔` adds its operands plus one, `∧` and `∨`
/// multiply, quantifiers and `◇` double.
pub fn pull_measure(f: &Formula) -> u128 {
    match f {
        Formula::GlobalOr(a, b) => pull_measure(a)
            .saturating_add(pull_measure(b))
            .saturating_add(1),
        Formula::And(a, b) | Formula::Or(a, b) => pull_measure(a).saturating_mul(pull_measure(b)),
        Formula::Exists(_, b) | Formula::Forall(_, b) | Formula::Possibly(b) => {
            pull_measure(b).saturating_mul(2)
        }
        _ => 2,
    }
}

/// One leftmost-outermost pull-out step, if any rule applies.
pub fn pull_step(f: &Formula) -> Option<Formula> {
    use Formula::*;
    let split = |g: &Formula| match g {
        GlobalOr(a, b) => Some(((**a).clone(), (**b).clone())),
        _ => None,
    };
    match f {
        And(l, r) | Or(l, r) => {
            let join = |x: Formula, y: Formula| match f {
                And(..) => Formula::and(x, y),
                _ => Formula::or(x, y),
            };
            if let Some((a, b)) = split(l) {
                return Some(Formula::global_or(join(a, (**r).clone()), join(b, (**r).clone())));
            }
            if let Some((a, b)) = split(r) {
                return Some(Formula::global_or(join((**l).clone(), a), join((**l).clone(), b)));
            }
            if let Some(l2) = pull_step(l) {
                return Some(join(l2, (**r).clone()));
            }
            pull_step(r).map(|r2| join((**l).clone(), r2))
        }
        Exists(v, body) | Forall(v, body) => {
            let bind = |x: Formula| match f {
                Exists(..) => Formula::exists(v.clone(), x),
                _ => Formula::forall(v.clone(), x),
            };
            if let Some((a, b)) = split(body) {
                return Some(Formula::global_or(bind(a), bind(b)));
            }
            pull_step(body).map(bind)
        }
        GlobalOr(l, r) => {
            if let Some(l2) = pull_step(l) {
                return Some(Formula::global_or(l2, (**r).clone()));
            }
            pull_step(r).map(|r2| Formula::global_or((**l).clone(), r2))
        }
        Possibly(body) => pull_step(body).map(Formula::possibly),
        _ => None,
    }
}

fn flatten_global_or(f: Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::GlobalOr(a, b) => {
            flatten_global_or(*a, out);
            flatten_global_or(*b, out);
        }
        other => out.push(other),
    }
}

/// Rewrites `φ` to `ψ₁ ⊔ … ⊔ ψ_m` with the four pull-out rules for
/// `∨`, `∧`, `∃`, `∀`, applied leftmost-outermost until none applies.
pub fn pull_global_disjunction(formula: &Formula) -> Result<DisjunctList> {
    if possibly_above_global_or(formula) {
        return Err(Error::UnsupportedShape("◇ above ⊔".into()));
    }
    let mut current = formula.clone();
    while let Some(next) = pull_step(&current) {
        debug_assert!(pull_measure(&next) < pull_measure(&current));
        current = next;
    }
    let mut out = Vec::new();
    flatten_global_or(current, &mut out);
    DisjunctList::new(out)
}

/// Replaces every `φ ⊔ ψ` (innermost first) by
/// `∃p∃q(=(p) ∧ =(q) ∧ ((p = q ∧ φ) ∨ (p ≠ q ∧ ψ)))` with fresh `p`, `q`.
pub fn encode_global_disjunction(formula: &Formula) -> Formula {
    let mut counter = 0;
    encode(formula, &mut counter)
}

fn encode(f: &Formula, counter: &mut usize) -> Formula {
    use Formula::*;
    match f {
        GlobalOr(a, b) => {
            let (a, b) = (encode(a, counter), encode(b, counter));
            let p = Var::new(format!("_p{counter}"));
            let q = Var::new(format!("_q{counter}"));
            *counter += 1;
            let choice = Formula::or(
                Formula::and(Formula::eq(p.clone(), q.clone()), a),
                Formula::and(Formula::neq(p.clone(), q.clone()), b),
            );
            let body = Formula::conjunction([
                Formula::atom("const", [p.clone()]),
                Formula::atom("const", [q.clone()]),
                choice,
            ]);
            Formula::exists(p, Formula::exists(q, body))
        }
        And(a, b) => Formula::and(encode(a, counter), encode(b, counter)),
        Or(a, b) => Formula::or(encode(a, counter), encode(b, counter)),
        Exists(v, b) => Formula::exists(v.clone(), encode(b, counter)),
        Forall(v, b) => Formula::forall(v.clone(), encode(b, counter)),
        Possibly(b) => Formula::possibly(encode(b, counter)),
        other => other.clone(),
    }
}

/// `x` for arity 1, otherwise `x1, …, xk`.
pub fn argument_vars(prefix: &str, k: usize) -> Vec<Var> {
    if k == 1 {
        vec![Var::new(prefix)]
    } else {
        (1..=k).map(|i| Var::new(format!("{prefix}{i}"))).collect()
    }
}

/// An atom for `dep` over `vars`, grouped by the dependency's default shape.
pub fn atom_for(name: &str, dep: &Dependency, vars: &[Var]) -> Formula {
    let shape: Vec<usize> = if name.starts_with("fo:") {
        vec![dep.arity()]
    } else {
        default_shape(name).to_vec()
    };
    let mut rest = vars;
    let groups = shape
        .iter()
        .map(|&len| {
            let (head, tail) = rest.split_at(len);
            rest = tail;
            head.to_vec()
        })
        .collect();
    Formula::Atom(DependencyAtom::new(name, groups))
}

/// `⊥ ⊔ ∀p∀q∃ȳ((p ≠ q ∨ ȳ = x̄) ∧ D ȳ)` over free variables `x̄` (named as
/// by [`argument_vars`]).
pub fn build_e_formula(dep_name: &str, registry: &Registry) -> Result<Formula> {
    let dep = registry.resolve_default(dep_name)?;
    let name = if BUILTIN_NAMES.contains(&dep_name) || dep_name.starts_with("fo:") {
        dep_name.to_string()
    } else {
        format!("fo:{dep_name}")
    };
    let k = dep.arity();
    let xs = argument_vars("x", k);
    let ys: Vec<Var> = (0..k).map(|i| Var::new(format!("_y{i}"))).collect();
    let (p, q) = (Var::new("_p0"), Var::new("_q0"));
    let same = Formula::conjunction(
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| Formula::eq(y.clone(), x.clone())),
    );
    let mut body = Formula::and(
        Formula::or(Formula::neq(p.clone(), q.clone()), same),
        atom_for(&name, &dep, &ys),
    );
    for y in ys.iter().rev() {
        body = Formula::exists(y.clone(), body);
    }
    let right = Formula::forall(p, Formula::forall(q, body));
    Ok(Formula::global_or(Formula::Bottom, right))
}

/// The dependency `{(M, R) : R = ∅ or some S ⊇ R has (M, S) ∈ D}`.
pub fn e_dependency(dep: &Dependency) -> Result<Dependency> {
    let inner = dep.clone();
    Dependency::custom(format!("E_{}", dep.name()), dep.arity(), move |r: &Relation| {
        r.is_empty() || has_member_above(&inner, r)
    })
}

fn has_member_above(dep: &Dependency, r: &Relation) -> bool {
    if dep.holds(r) {
        return true;
    }
    let free: Vec<usize> = (0..r.index_space()).filter(|&i| !r.contains_index(i)).collect();
    let Some(masks) = 1u64.checked_shl(free.len() as u32) else {
        return false;
    };
    (1..masks).any(|mask| {
        let mut s = r.clone();
        for (bit, &i) in free.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                s.insert_index(i);
            }
        }
        dep.holds(&s)
    })
}

/// Bounds every quantifier of a first-order formula to `predicate`.
pub fn relativize_fo(formula: &Formula, predicate: &str) -> Result<Formula> {
    if !formula.is_first_order() {
        return Err(Error::NotFlat(formula.to_string()));
    }
    Ok(relativize(formula, predicate))
}

fn relativize(f: &Formula, p: &str) -> Formula {
    use Formula::*;
    match f {
        Exists(v, b) => Formula::exists(
            v.clone(),
            Formula::and(Formula::rel(p, [v.clone()]), relativize(b, p)),
        ),
        Forall(v, b) => Formula::forall(
            v.clone(),
            Formula::or(Formula::not_rel(p, [v.clone()]), relativize(b, p)),
        ),
        And(a, b) => Formula::and(relativize(a, p), relativize(b, p)),
        Or(a, b) => Formula::or(relativize(a, p), relativize(b, p)),
        other => other.clone(),
    }
}

/// `U v ≡ ⊥ ⊔ All(v)`.
pub fn u_definition() -> Formula {
    Formula::global_or(Formula::Bottom, Formula::atom("all", ["v"]))
}

#[cfg(test)]
mod tests;
