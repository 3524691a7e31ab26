//! Formula syntax: tree, parser, printer and syntactic analyses.

mod ast;
mod parser;
mod printer;

use std::collections::BTreeSet;

pub use ast::{DependencyAtom, Formula, Var};
pub use parser::{negate, parse, parse_with, ParseOptions};

use crate::dependencies::Registry;
use crate::error::Result;

/// Free variables of a formula.
pub fn free_variables(formula: &Formula) -> BTreeSet<Var> {
    match formula {
        Formula::Top | Formula::Bottom => BTreeSet::new(),
        Formula::Rel { args, .. } => args.iter().cloned().collect(),
        Formula::Eq { left, right, .. } => [left.clone(), right.clone()].into(),
        Formula::Atom(a) => a.args().cloned().collect(),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::GlobalOr(a, b) => {
            let mut out = free_variables(a);
            out.extend(free_variables(b));
            out
        }
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            let mut out = free_variables(b);
            out.remove(v);
            out
        }
        Formula::Possibly(b) => free_variables(b),
    }
}

pub fn is_sentence(formula: &Formula) -> bool {
    free_variables(formula).is_empty()
}

/// Syntactic summary used to decide which closure results apply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntacticFlags {
    /// No dependency atom, no `⊔`, no `◇`.
    pub is_flat: bool,
    pub atoms_downwards_closed: bool,
    pub atoms_union_closed: bool,
    pub atoms_empty_team: bool,
    pub occurring_dependencies: BTreeSet<String>,
}

/// Flags of `formula`; atom flags are the verified flags of the registry's
/// dependencies.
pub fn flags(formula: &Formula, registry: &Registry) -> Result<SyntacticFlags> {
    let mut out = SyntacticFlags {
        is_flat: formula.is_first_order(),
        atoms_downwards_closed: true,
        atoms_union_closed: true,
        atoms_empty_team: true,
        occurring_dependencies: BTreeSet::new(),
    };
    for atom in formula.atoms() {
        let dep = registry.resolve(&atom.name, &atom.shape())?;
        let f = dep.flags();
        out.atoms_downwards_closed &= f.downwards;
        out.atoms_union_closed &= f.union;
        out.atoms_empty_team &= f.empty_team;
        out.occurring_dependencies.insert(atom.name.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_variables_respect_binding() {
        let f = parse("E x (x = y)").unwrap();
        assert_eq!(free_variables(&f), [Var::from("y")].into());
        let f = parse("E x (x = y) & dep(x ; z)").unwrap();
        assert_eq!(
            free_variables(&f),
            ["x", "y", "z"].into_iter().map(Var::from).collect()
        );
        assert!(is_sentence(&parse("A x E y (x != y)").unwrap()));
    }

    #[test]
    fn flags_follow_the_registry() {
        let reg = Registry::standard();
        let f = flags(&parse("x = y | inc(x ; y)").unwrap(), &reg).unwrap();
        assert!(!f.is_flat);
        assert!(f.atoms_union_closed);
        assert!(!f.atoms_downwards_closed);
        assert!(f.atoms_empty_team);
        assert_eq!(f.occurring_dependencies, ["inc".to_string()].into());

        let f = flags(&parse("E v (v = w)").unwrap(), &reg).unwrap();
        assert!(f.is_flat && f.atoms_downwards_closed && f.atoms_union_closed && f.atoms_empty_team);

        let f = flags(&parse("P(x) <|> P(y)").unwrap(), &reg).unwrap();
        assert!(!f.is_flat);
        let f = flags(&parse("<> P(x)").unwrap(), &reg).unwrap();
        assert!(!f.is_flat);

        assert!(flags(&parse("fo:unknown(x)").unwrap(), &reg).is_err());
    }
}
