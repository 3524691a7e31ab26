use std::fmt;

/// A variable name. Names starting with `_` are reserved for variables the
/// rewriter introduces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(String);

impl Var {
    pub fn new(name: impl Into<String>) -> Self {
        Var(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_reserved(&self) -> bool {
        self.0.starts_with('_')
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Self {
        Var(s.to_string())
    }
}

impl From<String> for Var {
    fn from(s: String) -> Self {
        Var(s)
    }
}

/// A dependency atom `name^P(x̄ ; ȳ ; …)`.
///
/// `groups` keeps the `;`-separated argument tuples; their lengths form the
/// shape under which the registry resolves the name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DependencyAtom {
    pub name: String,
    pub relativizer: Option<String>,
    pub groups: Vec<Vec<Var>>,
}

impl DependencyAtom {
    pub fn new(name: impl Into<String>, groups: Vec<Vec<Var>>) -> Self {
        DependencyAtom {
            name: name.into(),
            relativizer: None,
            groups,
        }
    }

    pub fn relativized(mut self, predicate: impl Into<String>) -> Self {
        self.relativizer = Some(predicate.into());
        self
    }

    pub fn shape(&self) -> Vec<usize> {
        self.groups.iter().map(Vec::len).collect()
    }

    pub fn args(&self) -> impl Iterator<Item = &Var> {
        self.groups.iter().flatten()
    }

    pub fn arity(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }
}

/// A formula in negation normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    /// Satisfied by the empty team only.
    Bottom,
    Rel {
        symbol: String,
        args: Vec<Var>,
        positive: bool,
    },
    Eq {
        left: Var,
        right: Var,
        positive: bool,
    },
    Atom(DependencyAtom),
    And(Box<Formula>, Box<Formula>),
    /// Tensor disjunction: the team splits into two (possibly overlapping)
    /// parts.
    Or(Box<Formula>, Box<Formula>),
    /// Global disjunction: the whole team satisfies one side.
    GlobalOr(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    /// Some non-empty subteam satisfies the operand.
    Possibly(Box<Formula>),
}

impl Formula {
    pub fn rel(symbol: impl Into<String>, args: impl IntoIterator<Item = impl Into<Var>>) -> Self {
        Formula::Rel {
            symbol: symbol.into(),
            args: args.into_iter().map(Into::into).collect(),
            positive: true,
        }
    }

    pub fn not_rel(symbol: impl Into<String>, args: impl IntoIterator<Item = impl Into<Var>>) -> Self {
        Formula::Rel {
            symbol: symbol.into(),
            args: args.into_iter().map(Into::into).collect(),
            positive: false,
        }
    }

    pub fn eq(left: impl Into<Var>, right: impl Into<Var>) -> Self {
        Formula::Eq {
            left: left.into(),
            right: right.into(),
            positive: true,
        }
    }

    pub fn neq(left: impl Into<Var>, right: impl Into<Var>) -> Self {
        Formula::Eq {
            left: left.into(),
            right: right.into(),
            positive: false,
        }
    }

    /// Dependency atom with a single argument group.
    pub fn atom(name: impl Into<String>, args: impl IntoIterator<Item = impl Into<Var>>) -> Self {
        Formula::Atom(DependencyAtom::new(
            name,
            vec![args.into_iter().map(Into::into).collect()],
        ))
    }

    pub fn and(left: Formula, right: Formula) -> Self {
        Formula::And(Box::new(left), Box::new(right))
    }

    pub fn or(left: Formula, right: Formula) -> Self {
        Formula::Or(Box::new(left), Box::new(right))
    }

    pub fn global_or(left: Formula, right: Formula) -> Self {
        Formula::GlobalOr(Box::new(left), Box::new(right))
    }

    pub fn exists(var: impl Into<Var>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn forall(var: impl Into<Var>, body: Formula) -> Self {
        Formula::Forall(var.into(), Box::new(body))
    }

    pub fn possibly(body: Formula) -> Self {
        Formula::Possibly(Box::new(body))
    }

    /// Left-nested conjunction; `Top` for an empty iterator.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Top)
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Top
            | Formula::Bottom
            | Formula::Rel { .. }
            | Formula::Eq { .. }
            | Formula::Atom(_) => vec![],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::GlobalOr(a, b) => vec![a, b],
            Formula::Exists(_, b) | Formula::Forall(_, b) | Formula::Possibly(b) => vec![b],
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(
            self,
            Formula::Top | Formula::Bottom | Formula::Rel { .. } | Formula::Eq { .. }
        )
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        for c in self.children() {
            c.walk(visit);
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    /// Nesting depth of non-literal nodes; literals and atoms have depth 0.
    pub fn depth(&self) -> usize {
        self.children()
            .into_iter()
            .map(|c| c.depth() + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn atoms(&self) -> Vec<&DependencyAtom> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let Formula::Atom(a) = f {
                out.push(a);
            }
        });
        out
    }

    pub fn count_global_or(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |f| n += usize::from(matches!(f, Formula::GlobalOr(..))));
        n
    }

    pub fn has_global_or(&self) -> bool {
        self.count_global_or() > 0
    }

    pub fn has_possibly(&self) -> bool {
        let mut found = false;
        self.walk(&mut |f| found |= matches!(f, Formula::Possibly(_)));
        found
    }

    /// Contains no dependency atom, no `⊔` and no `◇`.
    pub fn is_first_order(&self) -> bool {
        let mut flat = true;
        self.walk(&mut |f| {
            flat &= !matches!(f, Formula::Atom(_) | Formula::GlobalOr(..) | Formula::Possibly(_))
        });
        flat
    }

    /// Every variable occurring anywhere, bound or free.
    pub fn all_vars(&self) -> std::collections::BTreeSet<Var> {
        let mut out = std::collections::BTreeSet::new();
        self.walk(&mut |f| match f {
            Formula::Rel { args, .. } => out.extend(args.iter().cloned()),
            Formula::Eq { left, right, .. } => {
                out.insert(left.clone());
                out.insert(right.clone());
            }
            Formula::Atom(a) => out.extend(a.args().cloned()),
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Relation symbols with the arities they are used at.
    pub fn relation_symbols(&self) -> std::collections::BTreeSet<(String, usize)> {
        let mut out = std::collections::BTreeSet::new();
        self.walk(&mut |f| match f {
            Formula::Rel { symbol, args, .. } => {
                out.insert((symbol.clone(), args.len()));
            }
            Formula::Atom(DependencyAtom {
                relativizer: Some(p),
                ..
            }) => {
                out.insert((p.clone(), 1));
            }
            _ => {}
        });
        out
    }
}
