use std::collections::{BTreeMap, BTreeSet};

use crate::dependencies::{Dependency, Registry};
use crate::error::{Error, Result};
use crate::structures::{tarski_eval, Assignment, Relation, Structure};
use crate::syntax::{free_variables, parse, Formula, Var};

/// Carrier symbol of `ψ⁺`.
pub const CARRIER: &str = "Q";

/// `ψ⁺(Q, z̄)` and `θ(x̄, z̄)` describing a dependency through
/// `(F x̄ ∧ ⊥) ⊔ ∃z̄(=(z̄) ∧ E x̄z̄ ∧ θ)`.
///
/// Variables are `x1..xk` and `z1..zl`; `Q` has arity `k` and occurs only
/// positively in `ψ⁺`; `θ` mentions no relation symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinabilityForm {
    arity: usize,
    params: usize,
    psi_plus: Formula,
    theta: Formula,
}

fn numbered(prefix: &str, count: usize) -> Vec<Var> {
    (1..=count).map(|i| Var::new(format!("{prefix}{i}"))).collect()
}

fn negative_carrier(f: &Formula) -> bool {
    let mut found = false;
    f.walk(&mut |g| {
        if let Formula::Rel {
            symbol,
            positive: false,
            ..
        } = g
        {
            found |= symbol == CARRIER;
        }
    });
    found
}

impl DefinabilityForm {
    pub fn new(arity: usize, params: usize, psi_plus: Formula, theta: Formula) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Precondition("definability forms need arity ≥ 1".into()));
        }
        for (what, f) in [("psi+", &psi_plus), ("theta", &theta)] {
            if !f.is_first_order() {
                return Err(Error::NotFlat(format!("{what}: {f}")));
            }
        }
        if negative_carrier(&psi_plus) {
            return Err(Error::Precondition(format!(
                "carrier `{CARRIER}` occurs negatively in psi+"
            )));
        }
        for (symbol, k) in psi_plus.relation_symbols() {
            if symbol != CARRIER || k != arity {
                return Err(Error::Signature(format!(
                    "psi+ may only use `{CARRIER}/{arity}`, found `{symbol}/{k}`"
                )));
            }
        }
        if let Some((symbol, _)) = theta.relation_symbols().into_iter().next() {
            return Err(Error::Signature(format!("theta mentions `{symbol}`")));
        }
        let zs: BTreeSet<Var> = numbered("z", params).into_iter().collect();
        let mut xzs = zs.clone();
        xzs.extend(numbered("x", arity));
        for (what, f, allowed) in [("psi+", &psi_plus, &zs), ("theta", &theta, &xzs)] {
            if let Some(v) = free_variables(f).difference(allowed).next() {
                return Err(Error::Unbound(Var::new(format!("{v} (in {what})"))));
            }
        }
        Ok(DefinabilityForm {
            arity,
            params,
            psi_plus,
            theta,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn params(&self) -> usize {
        self.params
    }

    pub fn psi_plus(&self) -> &Formula {
        &self.psi_plus
    }

    pub fn theta(&self) -> &Formula {
        &self.theta
    }
}

/// Constancy: `ψ⁺ = ⊤`, `θ = (x1 = z1)`, one parameter.
pub fn const_form() -> DefinabilityForm {
    DefinabilityForm::new(1, 1, Formula::Top, Formula::eq("x1", "z1")).expect("well-typed fixture")
}

/// All: `ψ⁺ = ∀y Q(y)`, `θ = ⊤`, no parameters.
pub fn all_form() -> DefinabilityForm {
    let psi = Formula::forall("y", Formula::rel(CARRIER, ["y"]));
    DefinabilityForm::new(1, 0, psi, Formula::Top).expect("well-typed fixture")
}

/// Reads `arity k`, `params l`, `psi+ <formula>`, `theta <formula>` lines;
/// blank lines and `#` comments are skipped.
pub fn load_definability_form(text: &str) -> Result<DefinabilityForm> {
    let mut fields: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        if !matches!(key, "arity" | "params" | "psi+" | "theta") {
            return Err(Error::syntax(
                format!("line {}", lineno + 1),
                format!("unknown field `{key}`"),
            ));
        }
        if fields.insert(key, (lineno + 1, value.trim())).is_some() {
            return Err(Error::syntax(
                format!("line {}", lineno + 1),
                format!("duplicate field `{key}`"),
            ));
        }
    }
    let get = |key: &str| {
        fields
            .get(key)
            .copied()
            .ok_or_else(|| Error::syntax("end of input", format!("missing field `{key}`")))
    };
    let number = |key: &str| -> Result<usize> {
        let (line, value) = get(key)?;
        value
            .parse()
            .map_err(|_| Error::syntax(format!("line {line}"), format!("`{key}` expects a number")))
    };
    let formula = |key: &str| -> Result<Formula> {
        let (line, value) = get(key)?;
        parse(value).map_err(|e| match e {
            Error::Syntax { location, message } => {
                Error::syntax(format!("line {line}, {location}"), message)
            }
            other => other,
        })
    };
    DefinabilityForm::new(number("arity")?, number("params")?, formula("psi+")?, formula("theta")?)
}

/// The dependencies `E`, `F` of a form and the formula defining the
/// original dependency from them. The formula refers to `fo:E` and `fo:F`.
#[derive(Debug, Clone)]
pub struct Definability {
    pub e: Dependency,
    pub f: Dependency,
    pub formula: Formula,
}

impl Definability {
    /// The standard registry extended with `fo:E` and `fo:F`.
    pub fn registry(&self) -> Registry {
        let mut registry = Registry::standard();
        registry.register(self.e.clone());
        registry.register(self.f.clone());
        registry
    }

    /// Free variables `x1..xk` of the formula.
    pub fn free_vars(&self) -> Vec<Var> {
        numbered("x", self.f.arity())
    }
}

fn carrier_structure(q: Relation) -> Structure {
    let mut m = Structure::unchecked(q.universe());
    m.insert_relation(CARRIER, q).expect("carrier over the structure's universe");
    m
}

fn holds(m: &Structure, zs: &[Var], values: &[usize], psi: &Formula) -> bool {
    let mut s = Assignment::new();
    for (z, &a) in zs.iter().zip(values) {
        s.set(z.clone(), a);
    }
    tarski_eval(m, &s, psi).expect("validated form")
}

pub fn build_definability_formula(form: &DefinabilityForm) -> Result<Definability> {
    let (k, l) = (form.arity, form.params);
    let zs = numbered("z", l);

    let psi = form.psi_plus.clone();
    let e_zs = zs.clone();
    let e = Dependency::custom("E", k + l, move |r: &Relation| {
        if r.is_empty() {
            return false;
        }
        let m = carrier_structure(r.select(&(0..k).collect::<Vec<_>>()));
        let params = r.select(&(k..k + l).collect::<Vec<_>>());
        let found = params.tuples().any(|a| holds(&m, &e_zs, &a, &psi));
        found
    })?;

    let mut closed = form.psi_plus.clone();
    for z in zs.iter().rev() {
        closed = Formula::exists(z.clone(), closed);
    }
    let f = Dependency::custom("F", k, move |r: &Relation| {
        let empty = Relation::empty(r.universe(), k).expect("same index space as r");
        holds(&carrier_structure(empty), &[], &[], &closed)
    })?;

    let xs = numbered("x", k);
    let fresh: Vec<Var> = (0..l).map(|i| Var::new(format!("_z{i}"))).collect();
    let renaming: BTreeMap<Var, Var> = zs.iter().cloned().zip(fresh.iter().cloned()).collect();
    let theta = rename_free(&form.theta, &renaming);
    let left = Formula::and(Formula::atom("fo:F", xs.clone()), Formula::Bottom);
    let e_atom = Formula::atom("fo:E", xs.iter().chain(&fresh).cloned());
    let right = if l == 0 {
        Formula::and(e_atom, theta)
    } else {
        let mut body = Formula::conjunction([Formula::atom("const", fresh.clone()), e_atom, theta]);
        for z in fresh.iter().rev() {
            body = Formula::exists(z.clone(), body);
        }
        body
    };
    Ok(Definability {
        e,
        f,
        formula: Formula::global_or(left, right),
    })
}

/// Renames free occurrences according to `map`.
fn rename_free(f: &Formula, map: &BTreeMap<Var, Var>) -> Formula {
    let get = |v: &Var| map.get(v).cloned().unwrap_or_else(|| v.clone());
    match f {
        Formula::Rel {
            symbol,
            args,
            positive,
        } => Formula::Rel {
            symbol: symbol.clone(),
            args: args.iter().map(get).collect(),
            positive: *positive,
        },
        Formula::Eq {
            left,
            right,
            positive,
        } => Formula::Eq {
            left: get(left),
            right: get(right),
            positive: *positive,
        },
        Formula::Atom(a) => {
            let mut a = a.clone();
            for g in a.groups.iter_mut() {
                for v in g.iter_mut() {
                    *v = get(v);
                }
            }
            Formula::Atom(a)
        }
        Formula::And(a, b) => Formula::and(rename_free(a, map), rename_free(b, map)),
        Formula::Or(a, b) => Formula::or(rename_free(a, map), rename_free(b, map)),
        Formula::GlobalOr(a, b) => Formula::global_or(rename_free(a, map), rename_free(b, map)),
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            let mut inner = map.clone();
            inner.remove(v);
            let body = rename_free(b, &inner);
            match f {
                Formula::Exists(..) => Formula::exists(v.clone(), body),
                _ => Formula::forall(v.clone(), body),
            }
        }
        Formula::Possibly(b) => Formula::possibly(rename_free(b, map)),
        Formula::Top | Formula::Bottom => f.clone(),
    }
}
