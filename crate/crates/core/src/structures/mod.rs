//! Finite relational structures, assignments, and classical evaluation.

mod model_file;
mod relation;
mod tarski;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::syntax::Var;

pub use model_file::{load_structure, load_structure_with, print_structure};
pub use relation::{enumerate_relations, relation_count, Relation, RelationIter};
pub use tarski::tarski_eval;

pub(crate) use model_file::parse_element;
pub(crate) use relation::index_space;

/// An element of a universe, canonically `0..n`.
pub type Element = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelSymbol {
    pub name: String,
    pub arity: usize,
}

impl RelSymbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        RelSymbol {
            name: name.into(),
            arity,
        }
    }
}

impl fmt::Display for RelSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A purely relational signature; equality is built in.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<RelSymbol>,
}

impl Signature {
    pub fn new(symbols: impl IntoIterator<Item = RelSymbol>) -> Result<Self> {
        let mut symbols: Vec<RelSymbol> = symbols.into_iter().collect();
        symbols.sort();
        symbols.dedup();
        for pair in symbols.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(Error::Signature(format!(
                    "symbol `{}` declared with arities {} and {}",
                    pair[0].name, pair[0].arity, pair[1].arity
                )));
            }
        }
        if let Some(s) = symbols.iter().find(|s| s.arity == 0) {
            return Err(Error::Signature(format!("0-ary relation `{}`", s.name)));
        }
        Ok(Signature { symbols })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn symbols(&self) -> &[RelSymbol] {
        &self.symbols
    }

    pub fn arity_of(&self, name: &str) -> Option<usize> {
        self.symbols.iter().find(|s| s.name == name).map(|s| s.arity)
    }

    pub fn union(&self, other: &Signature) -> Result<Signature> {
        Signature::new(self.symbols.iter().chain(&other.symbols).cloned())
    }
}

/// A finite structure: universe `0..size` plus named relations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Structure {
    size: usize,
    labels: Option<Vec<String>>,
    relations: BTreeMap<String, Relation>,
}

impl Structure {
    /// A structure over `0..size` with no relations. Universes with fewer
    /// than two elements need [`Structure::with_small_universe`].
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::SmallUniverse(size));
        }
        Ok(Structure::unchecked(size))
    }

    /// Small-model override: accepts any non-empty universe.
    pub fn with_small_universe(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Precondition("universe must be non-empty".into()));
        }
        Ok(Structure::unchecked(size))
    }

    /// No size check at all; relativized membership tests may land on an
    /// empty universe.
    pub(crate) fn unchecked(size: usize) -> Self {
        Structure {
            size,
            labels: None,
            relations: BTreeMap::new(),
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.size {
            return Err(Error::Precondition(format!(
                "{} labels for a universe of size {}",
                labels.len(),
                self.size
            )));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::Precondition("duplicate element labels".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_relation(mut self, name: impl Into<String>, relation: Relation) -> Result<Self> {
        self.insert_relation(name, relation)?;
        Ok(self)
    }

    pub fn insert_relation(&mut self, name: impl Into<String>, relation: Relation) -> Result<()> {
        let name = name.into();
        if relation.universe() != self.size {
            return Err(Error::Precondition(format!(
                "relation `{name}` is over a universe of size {}, structure has {}",
                relation.universe(),
                self.size
            )));
        }
        if relation.arity() == 0 {
            return Err(Error::Signature(format!("0-ary relation `{name}`")));
        }
        self.relations.insert(name, relation);
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, element: Element) -> String {
        match &self.labels {
            Some(labels) => labels[element].clone(),
            None => element.to_string(),
        }
    }

    pub fn element(&self, label: &str) -> Option<Element> {
        match &self.labels {
            Some(labels) => labels.iter().position(|l| l == label),
            None => label.parse().ok().filter(|&e: &usize| e < self.size),
        }
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.get(name)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &Relation)> {
        self.relations.iter().map(|(n, r)| (n.as_str(), r))
    }

    pub fn signature(&self) -> Signature {
        Signature::new(
            self.relations
                .iter()
                .map(|(n, r)| RelSymbol::new(n.clone(), r.arity())),
        )
        .expect("structure relations form a valid signature")
    }
}

/// Number of structures of a given size over `signature`, if it fits a `u64`.
pub fn structure_count(signature: &Signature, size: usize) -> Option<u64> {
    signature.symbols().iter().try_fold(1u64, |acc, s| {
        let bits = size.checked_pow(u32::try_from(s.arity).ok()?)?;
        if bits >= 64 {
            return None;
        }
        acc.checked_mul(1u64 << bits)
    })
}

/// Every structure with universe `0..size` over `signature`, ordered by the
/// characteristic bit patterns of its relations (last symbol fastest).
pub fn enumerate_structures(
    signature: &Signature,
    size: usize,
    allow_small: bool,
    budget: u64,
) -> Result<impl Iterator<Item = Structure>> {
    let base = if allow_small {
        Structure::with_small_universe(size)?
    } else {
        Structure::new(size)?
    };
    let total = structure_count(signature, size).ok_or(Error::ResourceExhausted { budget })?;
    if total > budget {
        return Err(Error::ResourceExhausted { budget });
    }
    let symbols = signature.symbols().to_vec();
    let widths: Vec<u32> = symbols
        .iter()
        .map(|s| size.pow(s.arity as u32) as u32)
        .collect();
    Ok((0..total).map(move |mut code| {
        let mut s = base.clone();
        for (sym, &w) in symbols.iter().zip(&widths).rev() {
            let mask = code & ((1u64 << w) - 1);
            code >>= w;
            let rel = Relation::from_mask(size, sym.arity, mask).expect("mask fits");
            s.relations.insert(sym.name.clone(), rel);
        }
        s
    }))
}

/// A total map from a finite set of variables to elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(BTreeMap<Var, Element>);

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn get(&self, var: &Var) -> Option<Element> {
        self.0.get(var).copied()
    }

    pub fn set(&mut self, var: Var, value: Element) {
        self.0.insert(var, value);
    }

    pub fn remove(&mut self, var: &Var) {
        self.0.remove(var);
    }

    pub fn with(mut self, var: impl Into<Var>, value: Element) -> Self {
        self.set(var.into(), value);
        self
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, Element)> {
        self.0.iter().map(|(v, &e)| (v, e))
    }
}

impl FromIterator<(Var, Element)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (Var, Element)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}
