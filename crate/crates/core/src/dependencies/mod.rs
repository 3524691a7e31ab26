//! Generalized dependencies: isomorphism-closed classes of `(M, R)` pairs.

mod builtin;
mod closure;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use builtin::{Builtin, BUILTIN_NAMES};
pub use closure::{
    classify_closure, exists_relation, in_dmax, members, nonjumping_check, ClosureProperty,
    ClosureReport, ClosureWitness, NonJumpingReport, PropertyVerdict,
};

use crate::error::{Error, Result};
use crate::structures::{tarski_eval, Assignment, Relation, Structure};
use crate::syntax::Formula;

/// Closure properties of a dependency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ClosureFlags {
    /// `(M, ∅) ∈ D` for every `M`.
    pub empty_team: bool,
    pub downwards: bool,
    /// Closed under unions of two members (the empty family is covered by
    /// `empty_team`).
    pub union: bool,
    pub upwards: bool,
}

/// Largest universe explored when classifying a custom dependency at
/// construction time, subject to `n^k <= CUSTOM_CLASSIFY_CELLS`.
pub const CUSTOM_CLASSIFY_UNIVERSE: usize = 3;
pub const CUSTOM_CLASSIFY_CELLS: usize = 9;

type Test = Arc<dyn Fn(&Relation) -> bool + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Builtin(Builtin),
    Custom(Test),
}

/// A dependency of fixed arity with verified closure flags.
#[derive(Clone)]
pub struct Dependency {
    name: String,
    arity: usize,
    kind: Kind,
    flags: ClosureFlags,
}

impl fmt::Debug for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dependency")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("flags", &self.flags)
            .finish()
    }
}

impl Dependency {
    pub fn builtin(name: &str, shape: &[usize]) -> Result<Dependency> {
        Dependency::builtin_with(name, shape, false)
    }

    fn builtin_with(name: &str, shape: &[usize], strict_orders: bool) -> Result<Dependency> {
        let b = Builtin::from_shape(name, shape, strict_orders)?;
        Ok(Dependency {
            name: name.to_string(),
            arity: shape.iter().sum(),
            kind: Kind::Builtin(b),
            flags: b.flags(),
        })
    }

    /// A dependency given by a membership test. Closure flags are computed
    /// by exhaustive classification over universes `0..=3` while
    /// `n^arity <= 9`, and so are only as good as that bound.
    pub fn custom(
        name: impl Into<String>,
        arity: usize,
        test: impl Fn(&Relation) -> bool + Send + Sync + 'static,
    ) -> Result<Dependency> {
        if arity == 0 {
            return Err(Error::Precondition("dependencies of arity 0 are not supported".into()));
        }
        let mut dep = Dependency {
            name: name.into(),
            arity,
            kind: Kind::Custom(Arc::new(test)),
            flags: ClosureFlags::default(),
        };
        let max_n = (1..=CUSTOM_CLASSIFY_UNIVERSE)
            .take_while(|n| n.pow(arity as u32) <= CUSTOM_CLASSIFY_CELLS)
            .last()
            .unwrap_or(1);
        dep.flags = classify_closure(&dep, max_n, &mut crate::error::Budget::new(u64::MAX))?.flags();
        Ok(dep)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn flags(&self) -> ClosureFlags {
        self.flags
    }

    pub fn as_builtin(&self) -> Option<Builtin> {
        match self.kind {
            Kind::Builtin(b) => Some(b),
            Kind::Custom(_) => None,
        }
    }

    /// `(M, R) ∈ D`, where `M` is the universe carried by `relation`.
    pub fn holds(&self, relation: &Relation) -> bool {
        debug_assert_eq!(relation.arity(), self.arity);
        match &self.kind {
            Kind::Builtin(b) => b.holds(relation),
            Kind::Custom(test) => test(relation),
        }
    }

    /// `(P, R) ∈ D` where `predicate` is a unary relation `P ⊆ M`: false
    /// unless every component of `R` lies in `P`, otherwise tested over the
    /// universe `P` (renumbered in increasing order).
    pub fn holds_relativized(&self, relation: &Relation, predicate: &Relation) -> bool {
        let n = relation.universe();
        let mut map = vec![usize::MAX; n];
        let mut size = 0;
        for e in 0..n {
            if predicate.contains(&[e]) {
                map[e] = size;
                size += 1;
            }
        }
        match relation.map_elements(&map, size) {
            Ok(r) => self.holds(&r),
            Err(_) => false,
        }
    }
}

/// `(M, R) ∈ D` with arity and universe checks.
pub fn membership(dep: &Dependency, structure: &Structure, relation: &Relation) -> Result<bool> {
    if relation.arity() != dep.arity() {
        return Err(Error::Arity {
            name: dep.name().to_string(),
            expected: dep.arity(),
            found: relation.arity(),
        });
    }
    if relation.universe() != structure.size() {
        return Err(Error::Precondition(format!(
            "relation over {} elements, structure has {}",
            relation.universe(),
            structure.size()
        )));
    }
    Ok(dep.holds(relation))
}

/// Checks the name and group shape of a built-in atom.
pub fn check_builtin_shape(name: &str, shape: &[usize]) -> Result<()> {
    Builtin::from_shape(name, shape, false).map(drop)
}

/// The first-order dependency defined by `sentence` over the single symbol
/// `carrier/arity`.
pub fn register_fo_dependency(
    name: &str,
    sentence: &Formula,
    carrier: &str,
    arity: usize,
) -> Result<Dependency> {
    if !sentence.is_first_order() {
        return Err(Error::NotFlat(sentence.to_string()));
    }
    if !crate::syntax::is_sentence(sentence) {
        return Err(Error::Precondition(format!(
            "`{sentence}` has free variables"
        )));
    }
    for (symbol, used) in sentence.relation_symbols() {
        if symbol != carrier {
            return Err(Error::Signature(format!(
                "symbol `{symbol}` outside the signature {{{carrier}/{arity}}}"
            )));
        }
        if used != arity {
            return Err(Error::Arity {
                name: symbol,
                expected: arity,
                found: used,
            });
        }
    }
    let sentence = sentence.clone();
    let carrier = carrier.to_string();
    Dependency::custom(name, arity, move |r: &Relation| {
        let m = Structure::unchecked(r.universe())
            .with_relation(carrier.clone(), r.clone())
            .expect("carrier relation fits");
        tarski_eval(&m, &Assignment::new(), &sentence).expect("checked first-order sentence")
    })
}

/// Parses a dependency file: `carrier R/<arity>` then the sentence.
pub fn load_fo_dependency(name: &str, text: &str) -> Result<Dependency> {
    let mut lines = text
        .lines()
        .map(|l| l.split_once('#').map_or(l, |(a, _)| a).trim())
        .enumerate()
        .filter(|(_, l)| !l.is_empty());
    let (_, head) = lines
        .next()
        .ok_or_else(|| Error::syntax("line 1", "missing `carrier` line"))?;
    let decl = head
        .strip_prefix("carrier")
        .ok_or_else(|| Error::syntax("line 1", "expected `carrier R/<arity>`"))?
        .trim();
    let (carrier, arity) = decl
        .split_once('/')
        .ok_or_else(|| Error::syntax("line 1", "expected `R/<arity>`"))?;
    let arity: usize = arity
        .trim()
        .parse()
        .map_err(|_| Error::syntax("line 1", "arity must be a number"))?;
    let (lineno, body) = lines
        .next()
        .ok_or_else(|| Error::syntax("end of input", "missing sentence"))?;
    let sentence = crate::syntax::parse(body).map_err(|e| match e {
        Error::Syntax { location, message } => {
            Error::syntax(format!("line {}, {location}", lineno + 1), message)
        }
        other => other,
    })?;
    register_fo_dependency(name, &sentence, carrier.trim(), arity)
}

/// Dependencies available to formulas: the built-ins plus custom entries
/// referenced as `fo:<name>`.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    custom: BTreeMap<String, Dependency>,
    strict_orders: bool,
}

impl Registry {
    pub fn standard() -> Registry {
        Registry::default()
    }

    /// Reads the order atoms with a strict order instead of `≤`.
    pub fn with_strict_orders(mut self, strict: bool) -> Registry {
        self.strict_orders = strict;
        self
    }

    /// Adds `dep` under `fo:<name>`; replaces any previous entry.
    pub fn register(&mut self, dep: Dependency) -> String {
        let key = format!("fo:{}", dep.name());
        self.custom.insert(key.clone(), dep);
        key
    }

    pub fn custom(&self) -> impl Iterator<Item = (&str, &Dependency)> {
        self.custom.iter().map(|(k, d)| (k.as_str(), d))
    }

    /// Resolves an atom name with its argument group sizes.
    pub fn resolve(&self, name: &str, shape: &[usize]) -> Result<Dependency> {
        if name.starts_with("fo:") {
            let dep = self
                .custom
                .get(name)
                .ok_or_else(|| Error::UnknownDependency(name.to_string()))?;
            let found: usize = shape.iter().sum();
            if found != dep.arity() {
                return Err(Error::Arity {
                    name: name.to_string(),
                    expected: dep.arity(),
                    found,
                });
            }
            return Ok(dep.clone());
        }
        Dependency::builtin_with(name, shape, self.strict_orders)
    }

    /// Resolves a bare name with its default shape (`dep`, `inc`, `ninc`:
    /// `x ; y`; `indep`: `x ; ; z`; order atoms: three variables; everything
    /// else unary).
    pub fn resolve_default(&self, name: &str) -> Result<Dependency> {
        let key = if BUILTIN_NAMES.contains(&name) || name.starts_with("fo:") {
            name.to_string()
        } else if self.custom.contains_key(&format!("fo:{name}")) {
            format!("fo:{name}")
        } else {
            return Err(Error::UnknownDependency(name.to_string()));
        };
        if let Some(dep) = self.custom.get(&key) {
            return Ok(dep.clone());
        }
        self.resolve(&key, default_shape(&key))
    }
}

pub fn default_shape(name: &str) -> &'static [usize] {
    match name {
        "dep" | "inc" | "ninc" => &[1, 1],
        "indep" => &[1, 0, 1],
        "lo2" | "lo3" => &[3],
        _ => &[1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn unary(n: usize, elems: &[usize]) -> Relation {
        Relation::from_tuples(n, 1, elems.iter().map(|&e| [e])).unwrap()
    }

    #[test]
    fn fo_dependencies_match_builtins() {
        let all = register_fo_dependency("all", &parse("A x R(x)").unwrap(), "R", 1).unwrap();
        let ne = register_fo_dependency("ne", &parse("E x R(x)").unwrap(), "R", 1).unwrap();
        let c = register_fo_dependency(
            "c",
            &parse("A x A y (~R(x) | ~R(y) | x = y)").unwrap(),
            "R",
            1,
        )
        .unwrap();
        for n in 1..=3 {
            for r in crate::structures::enumerate_relations(n, 1, true, 64).unwrap() {
                assert_eq!(all.holds(&r), Builtin::All.holds(&r));
                assert_eq!(ne.holds(&r), Builtin::NonEmpty.holds(&r));
                assert_eq!(c.holds(&r), Builtin::Const.holds(&r));
            }
        }
        assert_eq!(all.flags(), Builtin::All.flags());
        assert_eq!(ne.flags(), Builtin::NonEmpty.flags());
        assert_eq!(c.flags(), Builtin::Const.flags());
    }

    #[test]
    fn fo_registration_errors() {
        assert!(register_fo_dependency("x", &parse("const(x)").unwrap(), "R", 1).is_err());
        assert!(register_fo_dependency("x", &parse("A x Q(x)").unwrap(), "R", 1).is_err());
        assert!(register_fo_dependency("x", &parse("A x R(x,x)").unwrap(), "R", 1).is_err());
        assert!(register_fo_dependency("x", &parse("R(x)").unwrap(), "R", 1).is_err());
    }

    #[test]
    fn dependency_file() {
        let d = load_fo_dependency("all1", "carrier R/1\nA x R(x)\n").unwrap();
        assert!(d.holds(&unary(2, &[0, 1])));
        assert!(load_fo_dependency("bad", "carrier R\nA x R(x)").is_err());
        assert!(load_fo_dependency("bad", "carrier R/1\n").is_err());
    }

    #[test]
    fn membership_checks_arity() {
        let m = Structure::new(2).unwrap();
        let c = Dependency::builtin("const", &[1]).unwrap();
        assert!(membership(&c, &m, &unary(2, &[0])).unwrap());
        assert!(!membership(&c, &m, &unary(2, &[0, 1])).unwrap());
        assert!(membership(&c, &m, &Relation::empty(2, 2).unwrap()).is_err());
        let ne = Dependency::builtin("ne", &[1]).unwrap();
        assert!(!membership(&ne, &m, &unary(2, &[])).unwrap());
    }

    #[test]
    fn relativized_membership() {
        let all = Dependency::builtin("all", &[1]).unwrap();
        let p = unary(3, &[0, 2]);
        assert!(all.holds_relativized(&unary(3, &[0, 2]), &p));
        assert!(!all.holds_relativized(&unary(3, &[0]), &p));
        assert!(!all.holds_relativized(&unary(3, &[0, 1, 2]), &p));
        // Empty relativizer: only the empty relation is tested, over ∅.
        let empty = unary(3, &[]);
        assert!(all.holds_relativized(&unary(3, &[]), &empty));
        let ne = Dependency::builtin("ne", &[1]).unwrap();
        assert!(!ne.holds_relativized(&unary(3, &[]), &empty));
    }

    #[test]
    fn registry_resolution() {
        let mut reg = Registry::standard();
        assert!(reg.resolve("dep", &[1, 1]).is_ok());
        assert!(reg.resolve("dep", &[1]).is_err());
        assert!(matches!(reg.resolve("nope", &[1]), Err(Error::UnknownDependency(_))));
        let d = Dependency::custom("mine", 2, |r| r.len() % 2 == 0).unwrap();
        assert_eq!(reg.register(d), "fo:mine");
        assert!(reg.resolve("fo:mine", &[2]).is_ok());
        assert!(reg.resolve("fo:mine", &[1, 1]).is_ok());
        assert!(reg.resolve("fo:mine", &[1]).is_err());
        assert_eq!(reg.resolve_default("mine").unwrap().arity(), 2);
        assert_eq!(reg.resolve_default("indep").unwrap().arity(), 2);
    }
}
