use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dependencies::default_shape;
use crate::error::Result;
use crate::structures::{Relation, Signature, Structure};
use crate::syntax::{free_variables, DependencyAtom, Formula, Var};
use crate::teams::Team;

/// Shape of the formulas drawn by [`random_formula`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    /// Maximal connective depth before closing.
    pub depth: usize,
    pub vars: Vec<Var>,
    /// Relation symbols used by literals.
    pub relations: Vec<(String, usize)>,
    /// Atom names with their group shapes.
    pub atoms: Vec<(String, Vec<usize>)>,
    /// Unary symbols that may relativize atoms.
    pub relativizers: Vec<String>,
    pub max_global_or: usize,
    pub possibly: bool,
    /// Close every free variable with a random quantifier.
    pub sentence: bool,
    /// An atom that must occur; conjoined if the draw misses it.
    pub required_atom: Option<String>,
}

impl Default for Profile {
    fn default() -> Self {
        Profile {
            depth: 3,
            vars: vec![Var::new("x"), Var::new("y")],
            relations: vec![("P".into(), 1)],
            atoms: Vec::new(),
            relativizers: Vec::new(),
            max_global_or: 0,
            possibly: false,
            sentence: false,
            required_atom: None,
        }
    }
}

impl Profile {
    /// First-order formulas only.
    pub fn first_order() -> Self {
        Profile::default()
    }

    /// Uses `names` with their default shapes.
    pub fn with_atoms(mut self, names: &[&str]) -> Self {
        self.atoms = names
            .iter()
            .map(|n| (n.to_string(), default_shape(n).to_vec()))
            .collect();
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn with_vars(mut self, vars: &[&str]) -> Self {
        self.vars = vars.iter().map(|v| Var::new(*v)).collect();
        self
    }

    pub fn with_relations(mut self, relations: &[(&str, usize)]) -> Self {
        self.relations = relations.iter().map(|(s, k)| (s.to_string(), *k)).collect();
        self
    }

    pub fn with_global_or(mut self, max: usize) -> Self {
        self.max_global_or = max;
        self
    }

    pub fn with_possibly(mut self, allow: bool) -> Self {
        self.possibly = allow;
        self
    }

    pub fn with_relativizers(mut self, symbols: &[&str]) -> Self {
        self.relativizers = symbols.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn sentences(mut self) -> Self {
        self.sentence = true;
        self
    }

    pub fn requiring(mut self, atom: &str) -> Self {
        self.required_atom = Some(atom.to_string());
        self
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    profile: &'a Profile,
    global_or_left: usize,
}

impl Gen<'_> {
    fn var(&mut self) -> Var {
        self.profile.vars.choose(&mut self.rng).expect("non-empty variable pool").clone()
    }

    fn atom(&mut self, name: &str, shape: &[usize]) -> Formula {
        let groups = shape
            .iter()
            .map(|&len| (0..len).map(|_| self.var()).collect())
            .collect();
        let mut atom = DependencyAtom::new(name, groups);
        if !self.profile.relativizers.is_empty() && self.rng.gen_bool(0.3) {
            let p = self.profile.relativizers.choose(&mut self.rng).expect("non-empty");
            atom = atom.relativized(p.clone());
        }
        Formula::Atom(atom)
    }

    fn leaf(&mut self) -> Formula {
        let p = self.profile;
        let roll = self.rng.gen_range(0..100);
        if roll < 40 && !p.atoms.is_empty() {
            let (name, shape) = p.atoms.choose(&mut self.rng).expect("non-empty").clone();
            return self.atom(&name, &shape);
        }
        if roll < 85 && !p.relations.is_empty() {
            let (symbol, k) = p.relations.choose(&mut self.rng).expect("non-empty").clone();
            let args: Vec<Var> = (0..k).map(|_| self.var()).collect();
            return if self.rng.gen_bool(0.5) {
                Formula::rel(symbol, args)
            } else {
                Formula::not_rel(symbol, args)
            };
        }
        if roll < 95 {
            let (a, b) = (self.var(), self.var());
            return if self.rng.gen_bool(0.5) {
                Formula::eq(a, b)
            } else {
                Formula::neq(a, b)
            };
        }
        if self.rng.gen_bool(0.5) {
            Formula::Top
        } else {
            Formula::Bottom
        }
    }

    fn formula(&mut self, depth: usize) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.2) {
            return self.leaf();
        }
        loop {
            match self.rng.gen_range(0..7) {
                0 => return Formula::and(self.formula(depth - 1), self.formula(depth - 1)),
                1 => return Formula::or(self.formula(depth - 1), self.formula(depth - 1)),
                2 | 3 => {
                    let v = self.var();
                    let body = self.formula(depth - 1);
                    return if self.rng.gen_bool(0.5) {
                        Formula::exists(v, body)
                    } else {
                        Formula::forall(v, body)
                    };
                }
                4 if self.global_or_left > 0 => {
                    self.global_or_left -= 1;
                    return Formula::global_or(self.formula(depth - 1), self.formula(depth - 1));
                }
                5 if self.profile.possibly => return Formula::possibly(self.formula(depth - 1)),
                6 => return Formula::and(self.leaf(), self.formula(depth - 1)),
                _ => {}
            }
        }
    }
}

/// A formula drawn deterministically from `seed`.
pub fn random_formula(seed: u64, profile: &Profile) -> Formula {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        profile,
        global_or_left: profile.max_global_or,
    };
    let mut f = g.formula(profile.depth);
    if let Some(name) = &profile.required_atom {
        if !f.atoms().iter().any(|a| &a.name == name) {
            let shape = profile
                .atoms
                .iter()
                .find(|(n, _)| n == name)
                .map_or_else(|| default_shape(name).to_vec(), |(_, s)| s.clone());
            let atom = g.atom(name, &shape);
            f = if g.rng.gen_bool(0.5) {
                Formula::and(atom, f)
            } else {
                Formula::and(f, atom)
            };
        }
    }
    if profile.sentence {
        for v in free_variables(&f).into_iter().rev() {
            f = if g.rng.gen_bool(0.5) {
                Formula::exists(v, f)
            } else {
                Formula::forall(v, f)
            };
        }
    }
    f
}

/// A structure over `signature` with every relation drawn uniformly.
pub fn random_structure(rng: &mut impl Rng, signature: &Signature, n: usize) -> Result<Structure> {
    let mut s = Structure::new(n)?;
    for sym in signature.symbols() {
        let mut rel = Relation::empty(n, sym.arity)?;
        for i in 0..rel.index_space() {
            if rng.gen_bool(0.5) {
                rel.insert_index(i);
            }
        }
        s.insert_relation(sym.name.clone(), rel)?;
    }
    Ok(s)
}

/// A team over `vars` with a uniformly drawn size in `0..=max_rows` and
/// uniformly drawn distinct rows.
pub fn random_team(rng: &mut impl Rng, vars: &[Var], n: usize, max_rows: usize) -> Result<Team> {
    let mut rel = Relation::empty(n, vars.len())?;
    let cells = rel.index_space();
    let size = rng.gen_range(0..=max_rows.min(cells));
    for i in rand::seq::index::sample(rng, cells, size) {
        rel.insert_index(i);
    }
    Team::from_relation(vars.to_vec(), rel)
}
