use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use super::{EvalConfig, Shortcuts, Strategy};
use crate::dependencies::{exists_relation, Dependency, Registry};
use crate::error::{Budget, Error, Result};
use crate::structures::{Relation, Structure};
use crate::syntax::{free_variables, Formula, Var};
use crate::teams::Team;

type NodeId = usize;
type VarId = usize;

/// Largest row count for which subteams are enumerated as bit masks.
const MAX_MASK_ROWS: usize = 40;
/// Largest reachable cell set searched by the atom-directed block solver.
const MAX_REACH: usize = 24;

enum Op {
    Top,
    Bottom,
    Rel {
        rel: Relation,
        args: Vec<VarId>,
        positive: bool,
    },
    Eq {
        left: VarId,
        right: VarId,
        positive: bool,
    },
    Atom {
        dep: Dependency,
        vars: Vec<VarId>,
        /// Positions of `vars` within the node's free variables.
        positions: Vec<usize>,
        predicate: Option<Relation>,
    },
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    GlobalOr(NodeId, NodeId),
    Exists(VarId, NodeId),
    Forall(VarId, NodeId),
    Possibly(NodeId),
    /// `∃p̄ (=(p̄) ∧ body)`: the block variables are constant on the team.
    Pin { vars: Vec<VarId>, body: NodeId },
    /// `∃v̄ (C₁ ∧ … ∧ C_j)` solved jointly when every conjunct but at most one
    /// atom is flat; `fallback` is the same formula as a plain `∃` chain.
    Block {
        vars: Vec<VarId>,
        flat: Vec<NodeId>,
        atom: Option<NodeId>,
        solvable: bool,
        fallback: NodeId,
    },
}

struct Node {
    op: Op,
    /// Sorted free variables; teams reaching this node have these columns.
    fv: Vec<VarId>,
    flat: bool,
    down: bool,
    /// No team satisfies the node (some atom below has no member at all and
    /// no `⊔` separates it from here).
    dead: bool,
}

struct Compiler<'a> {
    structure: &'a Structure,
    registry: &'a Registry,
    optimized: bool,
    shortcuts: Shortcuts,
    vars: Vec<Var>,
    ids: HashMap<Var, VarId>,
    nodes: Vec<Node>,
}

fn union(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let set: BTreeSet<VarId> = a.iter().chain(b).copied().collect();
    set.into_iter().collect()
}

fn without(a: &[VarId], remove: &[VarId]) -> Vec<VarId> {
    a.iter().copied().filter(|v| !remove.contains(v)).collect()
}

fn conjuncts(f: &Formula) -> Vec<&Formula> {
    match f {
        Formula::And(a, b) => {
            let mut out = conjuncts(a);
            out.extend(conjuncts(b));
            out
        }
        other => vec![other],
    }
}

impl<'a> Compiler<'a> {
    fn var(&mut self, v: &Var) -> VarId {
        if let Some(&id) = self.ids.get(v) {
            return id;
        }
        let id = self.vars.len();
        self.vars.push(v.clone());
        self.ids.insert(v.clone(), id);
        id
    }

    fn push(&mut self, op: Op, fv: Vec<VarId>) -> NodeId {
        let get = |id: NodeId| &self.nodes[id];
        let (flat, down, dead) = match &op {
            Op::Top | Op::Bottom | Op::Rel { .. } | Op::Eq { .. } => (true, true, false),
            Op::Atom {
                dep, predicate, ..
            } => {
                let dead = self.optimized
                    && self.shortcuts.quantifier_block_witness
                    && self.atom_is_dead(dep, predicate.as_ref());
                (false, dep.flags().downwards, dead)
            }
            Op::And(a, b) | Op::Or(a, b) => (
                get(*a).flat && get(*b).flat,
                get(*a).down && get(*b).down,
                get(*a).dead || get(*b).dead,
            ),
            Op::GlobalOr(a, b) => (false, get(*a).down && get(*b).down, get(*a).dead && get(*b).dead),
            Op::Exists(_, b) | Op::Forall(_, b) => (get(*b).flat, get(*b).down, get(*b).dead),
            Op::Possibly(b) => (false, false, get(*b).dead),
            Op::Pin { body, .. } => (false, get(*body).down, get(*body).dead),
            Op::Block { fallback, .. } => (false, get(*fallback).down, get(*fallback).dead),
        };
        self.nodes.push(Node {
            op,
            fv,
            flat,
            down,
            dead,
        });
        self.nodes.len() - 1
    }

    fn atom_is_dead(&self, dep: &Dependency, predicate: Option<&Relation>) -> bool {
        let universe = predicate.map_or(self.structure.size(), Relation::len);
        let mut probe = Budget::new(1 << 16);
        matches!(exists_relation(dep, universe, false, &mut probe), Ok(None))
    }

    fn compile(&mut self, f: &Formula) -> Result<NodeId> {
        Ok(match f {
            Formula::Top => self.push(Op::Top, vec![]),
            Formula::Bottom => self.push(Op::Bottom, vec![]),
            Formula::Rel {
                symbol,
                args,
                positive,
            } => {
                let rel = self
                    .structure
                    .relation(symbol)
                    .ok_or_else(|| Error::UnknownRelation(symbol.clone()))?;
                if rel.arity() != args.len() {
                    return Err(Error::Arity {
                        name: symbol.clone(),
                        expected: rel.arity(),
                        found: args.len(),
                    });
                }
                let rel = rel.clone();
                let args: Vec<VarId> = args.iter().map(|v| self.var(v)).collect();
                let fv = union(&args, &[]);
                self.push(
                    Op::Rel {
                        rel,
                        args,
                        positive: *positive,
                    },
                    fv,
                )
            }
            Formula::Eq {
                left,
                right,
                positive,
            } => {
                let (left, right) = (self.var(left), self.var(right));
                self.push(
                    Op::Eq {
                        left,
                        right,
                        positive: *positive,
                    },
                    union(&[left], &[right]),
                )
            }
            Formula::Atom(a) => {
                let dep = self.registry.resolve(&a.name, &a.shape())?;
                let predicate = match &a.relativizer {
                    None => None,
                    Some(p) => match self.structure.relation(p) {
                        Some(r) if r.arity() == 1 => Some(r.clone()),
                        _ => return Err(Error::Relativizer(p.clone())),
                    },
                };
                let vars: Vec<VarId> = a.args().map(|v| self.var(v)).collect();
                let fv = union(&vars, &[]);
                let positions = vars.iter().map(|v| fv.binary_search(v).unwrap()).collect();
                self.push(
                    Op::Atom {
                        dep,
                        vars,
                        positions,
                        predicate,
                    },
                    fv,
                )
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::GlobalOr(a, b) => {
                let (a_id, b_id) = (self.compile(a)?, self.compile(b)?);
                let fv = union(&self.nodes[a_id].fv, &self.nodes[b_id].fv);
                let op = match f {
                    Formula::And(..) => Op::And(a_id, b_id),
                    Formula::Or(..) => Op::Or(a_id, b_id),
                    _ => Op::GlobalOr(a_id, b_id),
                };
                self.push(op, fv)
            }
            Formula::Exists(v, b) => {
                let pointwise = self.shortcuts.flat_pointwise && f.is_first_order();
                if self.optimized && self.shortcuts.quantifier_block_witness && !pointwise {
                    return self.plan_block(f);
                }
                let body = self.compile(b)?;
                let v = self.var(v);
                let fv = without(&self.nodes[body].fv, &[v]);
                self.push(Op::Exists(v, body), fv)
            }
            Formula::Forall(v, b) => {
                let body = self.compile(b)?;
                let v = self.var(v);
                let fv = without(&self.nodes[body].fv, &[v]);
                self.push(Op::Forall(v, body), fv)
            }
            Formula::Possibly(b) => {
                let body = self.compile(b)?;
                let fv = self.nodes[body].fv.clone();
                self.push(Op::Possibly(body), fv)
            }
        })
    }

    fn and_chain(&mut self, ids: Vec<NodeId>) -> NodeId {
        let mut iter = ids.into_iter();
        let Some(first) = iter.next() else {
            return self.push(Op::Top, vec![]);
        };
        iter.fold(first, |acc, id| {
            let fv = union(&self.nodes[acc].fv, &self.nodes[id].fv);
            self.push(Op::And(acc, id), fv)
        })
    }

    /// Compiles a maximal `∃` chain as a block. Vacuous quantifiers are
    /// dropped, constancy atoms over block variables pin those variables,
    /// and conjuncts free of the remaining block variables move outside.
    fn plan_block(&mut self, f: &Formula) -> Result<NodeId> {
        let mut chain = Vec::new();
        let mut body = f;
        while let Formula::Exists(v, b) = body {
            chain.push(v.clone());
            body = b;
        }
        let mut live = free_variables(body);
        let mut block: Vec<Var> = Vec::new();
        for v in chain.iter().rev() {
            if live.remove(v) {
                block.push(v.clone());
            }
        }
        block.reverse();
        if block.is_empty() {
            return self.compile(body);
        }

        let parts = conjuncts(body);
        let mut pinned: Vec<Var> = Vec::new();
        let mut rest: Vec<&Formula> = Vec::new();
        for part in parts {
            match part {
                Formula::Atom(a)
                    if a.name == "const"
                        && a.relativizer.is_none()
                        && a.arity() > 0
                        && a.args().all(|v| block.contains(v)) =>
                {
                    pinned.extend(a.args().cloned());
                }
                _ => rest.push(part),
            }
        }
        pinned.sort();
        pinned.dedup();
        let free_vars: Vec<Var> = block.iter().filter(|v| !pinned.contains(v)).cloned().collect();
        let inner = self.plan_conjunction(&free_vars, &rest)?;
        if pinned.is_empty() {
            return Ok(inner);
        }
        let mut vars: Vec<VarId> = pinned.iter().map(|v| self.var(v)).collect();
        vars.sort_unstable();
        let fv = without(&self.nodes[inner].fv, &vars);
        Ok(self.push(Op::Pin { vars, body: inner }, fv))
    }

    fn plan_conjunction(&mut self, block: &[Var], parts: &[&Formula]) -> Result<NodeId> {
        let ids = parts
            .iter()
            .map(|p| self.compile(p))
            .collect::<Result<Vec<_>>>()?;
        if block.is_empty() {
            return Ok(self.and_chain(ids));
        }
        let vars: Vec<VarId> = block.iter().map(|v| self.var(v)).collect();
        let (inner, outer): (Vec<NodeId>, Vec<NodeId>) = ids
            .into_iter()
            .partition(|&id| self.nodes[id].fv.iter().any(|v| vars.contains(v)));

        let mut fallback = self.and_chain(inner.clone());
        for &v in vars.iter().rev() {
            let fv = without(&self.nodes[fallback].fv, &[v]);
            fallback = self.push(Op::Exists(v, fallback), fv);
        }
        let (flat, nonflat): (Vec<NodeId>, Vec<NodeId>) =
            inner.into_iter().partition(|&id| self.nodes[id].flat);
        let atom = match nonflat.as_slice() {
            [id] if matches!(self.nodes[*id].op, Op::Atom { .. }) => Some(*id),
            _ => None,
        };
        let solvable = nonflat.is_empty() || atom.is_some();
        let fv = self.nodes[fallback].fv.clone();
        let block_id = self.push(
            Op::Block {
                vars,
                flat,
                atom,
                solvable,
                fallback,
            },
            fv,
        );
        let mut all = outer;
        all.push(block_id);
        Ok(self.and_chain(all))
    }
}

/// A formula compiled against one structure, reusable across teams.
///
/// Results are memoised per (subformula, team restricted to its free
/// variables), so repeated evaluations on related teams share work.
pub struct Evaluator {
    nodes: Arc<Vec<Node>>,
    root: NodeId,
    vars: Vec<Var>,
    n: usize,
    strategy: Strategy,
    shortcuts: Shortcuts,
    limit: u64,
    budget: Budget,
    memo: HashMap<(NodeId, Relation), bool>,
    memo_limit: usize,
}

impl Evaluator {
    pub fn new(
        structure: &Structure,
        formula: &Formula,
        registry: &Registry,
        config: &EvalConfig,
    ) -> Result<Evaluator> {
        if structure.size() < 2 && !config.allow_small {
            return Err(Error::SmallUniverse(structure.size()));
        }
        let mut c = Compiler {
            structure,
            registry,
            optimized: config.strategy == Strategy::Optimized,
            shortcuts: config.shortcuts,
            vars: Vec::new(),
            ids: HashMap::new(),
            nodes: Vec::new(),
        };
        let root = c.compile(formula)?;
        Ok(Evaluator {
            nodes: Arc::new(c.nodes),
            root,
            vars: c.vars,
            n: structure.size(),
            strategy: config.strategy,
            shortcuts: config.shortcuts,
            limit: config.budget,
            budget: Budget::new(config.budget),
            memo: HashMap::new(),
            memo_limit: config.memo_limit,
        })
    }

    /// Free variables of the compiled formula, in their internal order.
    pub fn free_variables(&self) -> Vec<Var> {
        self.nodes[self.root]
            .fv
            .iter()
            .map(|&v| self.vars[v].clone())
            .collect()
    }

    /// Nodes spent by the last call to [`Evaluator::eval`].
    pub fn nodes_used(&self) -> u64 {
        self.budget.used()
    }

    /// `𝔐 ⊨_X φ`. The team's domain must cover the free variables.
    pub fn eval(&mut self, team: &Team) -> Result<bool> {
        if team.universe() != self.n {
            return Err(Error::Team(format!(
                "team over a universe of {} elements, structure has {}",
                team.universe(),
                self.n
            )));
        }
        let positions = self.nodes[self.root]
            .fv
            .iter()
            .map(|&v| {
                let name = &self.vars[v];
                team.domain()
                    .iter()
                    .position(|d| d == name)
                    .ok_or_else(|| Error::Unbound(name.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let x = team.as_relation().select(&positions);
        self.budget = Budget::new(self.limit);
        self.sat(self.root, &x)
    }

    fn optimized(&self) -> bool {
        self.strategy == Strategy::Optimized
    }

    fn sat(&mut self, id: NodeId, x: &Relation) -> Result<bool> {
        let nodes = Arc::clone(&self.nodes);
        let node = &nodes[id];
        if self.optimized() {
            if self.shortcuts.quantifier_block_witness && node.dead {
                self.budget.spend(1)?;
                return Ok(false);
            }
            if self.shortcuts.flat_pointwise && node.flat {
                return self.pointwise(id, x);
            }
        }
        match &node.op {
            Op::Top => return Ok(true),
            Op::Bottom => return Ok(x.is_empty()),
            Op::Rel { .. } | Op::Eq { .. } => return self.pointwise(id, x),
            Op::Atom {
                dep,
                positions,
                predicate,
                ..
            } => {
                self.budget.spend(1)?;
                let rel = x.select(positions);
                return Ok(match predicate {
                    Some(p) => dep.holds_relativized(&rel, p),
                    None => dep.holds(&rel),
                });
            }
            _ => {}
        }
        let key = (id, x.clone());
        if let Some(&hit) = self.memo.get(&key) {
            return Ok(hit);
        }
        self.budget.spend(1)?;
        let result = match &node.op {
            Op::And(a, b) => {
                self.sat(*a, &project(x, &node.fv, &nodes[*a].fv))?
                    && self.sat(*b, &project(x, &node.fv, &nodes[*b].fv))?
            }
            Op::GlobalOr(a, b) => {
                self.sat(*a, &project(x, &node.fv, &nodes[*a].fv))?
                    || self.sat(*b, &project(x, &node.fv, &nodes[*b].fv))?
            }
            Op::Or(a, b) => self.sat_or(id, *a, *b, x)?,
            Op::Exists(v, b) => self.sat_exists(id, *v, *b, x)?,
            Op::Forall(v, b) => {
                let cells = self.extension_cells(&node.fv, &[*v], &nodes[*b].fv, x);
                let mut child = Relation::empty(self.n, nodes[*b].fv.len())?;
                for row in &cells {
                    for &c in row {
                        child.insert_index(c);
                    }
                }
                self.sat(*b, &child)?
            }
            Op::Possibly(b) => self.sat_possibly(*b, x)?,
            Op::Pin { vars, body } => self.sat_pin(id, vars, *body, x)?,
            Op::Block { .. } => self.sat_block(id, x)?,
            Op::Top | Op::Bottom | Op::Rel { .. } | Op::Eq { .. } | Op::Atom { .. } => unreachable!(),
        };
        if self.memo.len() >= self.memo_limit {
            self.memo.clear();
        }
        self.memo.insert(key, result);
        Ok(result)
    }

    /// Every row satisfies the (flat) node under first-order semantics.
    fn pointwise(&mut self, id: NodeId, x: &Relation) -> Result<bool> {
        self.budget.spend(1)?;
        let fv = &self.nodes[id].fv;
        let mut env = vec![0; self.vars.len()];
        let mut row = vec![0; fv.len()];
        for i in x.indices() {
            x.decode(i, &mut row);
            for (&v, &e) in fv.iter().zip(&row) {
                env[v] = e;
            }
            if !self.tarski(id, &mut env) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn tarski(&self, id: NodeId, env: &mut [usize]) -> bool {
        match &self.nodes[id].op {
            Op::Top => true,
            Op::Bottom => false,
            Op::Rel {
                rel,
                args,
                positive,
            } => {
                let tuple: Vec<usize> = args.iter().map(|&v| env[v]).collect();
                rel.contains(&tuple) == *positive
            }
            Op::Eq {
                left,
                right,
                positive,
            } => (env[*left] == env[*right]) == *positive,
            Op::And(a, b) => self.tarski(*a, env) && self.tarski(*b, env),
            Op::Or(a, b) => self.tarski(*a, env) || self.tarski(*b, env),
            Op::Exists(v, b) | Op::Forall(v, b) => {
                let universal = matches!(self.nodes[id].op, Op::Forall(..));
                let saved = env[*v];
                let mut result = universal;
                for e in 0..self.n {
                    env[*v] = e;
                    if self.tarski(*b, env) != universal {
                        result = !universal;
                        break;
                    }
                }
                env[*v] = saved;
                result
            }
            _ => unreachable!("pointwise evaluation of a non-flat node"),
        }
    }

    /// For each row of `x` (over `fv`) and each assignment of values to
    /// `bound`, the cell of the extended row restricted to `child`. Values
    /// run in odometer order, last variable fastest.
    fn extension_cells(&self, fv: &[VarId], bound: &[VarId], child: &[VarId], x: &Relation) -> Vec<Vec<usize>> {
        let n = self.n;
        let combos = n.pow(bound.len() as u32);
        let mut row = vec![0; fv.len()];
        let mut values = vec![0; bound.len()];
        x.indices()
            .map(|i| {
                x.decode(i, &mut row);
                (0..combos)
                    .map(|mut c| {
                        for slot in values.iter_mut().rev() {
                            *slot = c % n;
                            c /= n;
                        }
                        child.iter().fold(0, |acc, v| {
                            let e = match bound.iter().position(|b| b == v) {
                                Some(j) => values[j],
                                None => row[fv.binary_search(v).unwrap()],
                            };
                            acc * n + e
                        })
                    })
                    .collect()
            })
            .collect()
    }

    fn child_team(&self, arity: usize, cells: impl IntoIterator<Item = usize>) -> Result<Relation> {
        let mut out = Relation::empty(self.n, arity)?;
        for c in cells {
            out.insert_index(c);
        }
        Ok(out)
    }

    fn sat_exists(&mut self, id: NodeId, v: VarId, b: NodeId, x: &Relation) -> Result<bool> {
        let nodes = Arc::clone(&self.nodes);
        let (fv, body) = (&nodes[id].fv, &nodes[b]);
        let arity = body.fv.len();
        if x.is_empty() {
            return self.sat(b, &Relation::empty(self.n, arity)?);
        }
        if !body.fv.contains(&v) {
            return self.sat(b, &project(x, fv, &body.fv));
        }
        let cells = self.extension_cells(fv, &[v], &body.fv, x);
        let m = cells.len();
        let n = self.n;
        let singleton =
            self.optimized() && self.shortcuts.downwards_singleton_choice && body.down;
        // Per-row choice: a value (singleton) or a non-empty set mask.
        let (lo, hi) = if singleton { (0, n) } else { (1, 1usize << n) };
        let mut choice = vec![lo; m];
        loop {
            self.budget.spend(1)?;
            let mut child = Relation::empty(n, arity)?;
            for (row, &c) in cells.iter().zip(&choice) {
                if singleton {
                    child.insert_index(row[c]);
                } else {
                    for (e, &cell) in row.iter().enumerate() {
                        if c >> e & 1 == 1 {
                            child.insert_index(cell);
                        }
                    }
                }
            }
            if self.sat(b, &child)? {
                return Ok(true);
            }
            let mut i = 0;
            loop {
                if i == m {
                    return Ok(false);
                }
                choice[i] += 1;
                if choice[i] < hi {
                    break;
                }
                choice[i] = lo;
                i += 1;
            }
        }
    }

    fn sat_possibly(&mut self, b: NodeId, x: &Relation) -> Result<bool> {
        let rows: Vec<usize> = x.indices().collect();
        let singletons = self.optimized()
            && self.shortcuts.downwards_singleton_choice
            && self.nodes[b].down;
        if singletons {
            for &r in &rows {
                self.budget.spend(1)?;
                if self.sat(b, &self.child_team(x.arity(), [r])?)? {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        let m = check_rows(rows.len(), &self.budget)?;
        for mask in 1..(1u64 << m) {
            self.budget.spend(1)?;
            if self.sat(b, &self.child_team(x.arity(), masked(&rows, mask))?)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn sat_or(&mut self, id: NodeId, a: NodeId, b: NodeId, x: &Relation) -> Result<bool> {
        let nodes = Arc::clone(&self.nodes);
        let fv = &nodes[id].fv;
        let rows: Vec<usize> = x.indices().collect();
        let m = check_rows(rows.len(), &self.budget)?;
        let full = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
        let cells_a = project_rows(x, &rows, fv, &nodes[a].fv);
        let cells_b = project_rows(x, &rows, fv, &nodes[b].fv);
        let (arity_a, arity_b) = (nodes[a].fv.len(), nodes[b].fv.len());
        let side = |this: &Self, cells: &[usize], arity: usize, mask: u64| {
            this.child_team(arity, masked(cells, mask))
        };

        if !self.optimized() {
            // Covers (Y₁, Y₂) with Y₁ ∪ Y₂ = X, pruned on Y₁.
            let mut y1 = 0u64;
            loop {
                self.budget.spend(1)?;
                if self.sat(a, &side(self, &cells_a, arity_a, y1)?)? {
                    let rest = full & !y1;
                    let mut s = 0u64;
                    loop {
                        self.budget.spend(1)?;
                        if self.sat(b, &side(self, &cells_b, arity_b, rest | s)?)? {
                            return Ok(true);
                        }
                        if s == y1 {
                            break;
                        }
                        s = (s.wrapping_sub(y1)) & y1;
                    }
                }
                if y1 == full {
                    return Ok(false);
                }
                y1 += 1;
            }
        }

        if self.shortcuts.downwards_partition_cover {
            for (flat_side, other, cells_f, cells_o, arity_o) in [
                (a, b, &cells_a, &cells_b, arity_b),
                (b, a, &cells_b, &cells_a, arity_a),
            ] {
                if !nodes[flat_side].flat {
                    continue;
                }
                // Y ⊨ flat side iff Y ⊆ S; the other side must take X \ S.
                let mut sat_mask = 0u64;
                let fa = &nodes[flat_side].fv;
                let single = Relation::empty(self.n, fa.len())?;
                for (i, &c) in cells_f.iter().enumerate() {
                    let mut one = single.clone();
                    one.insert_index(c);
                    if self.pointwise(flat_side, &one)? {
                        sat_mask |= 1 << i;
                    }
                }
                let forced = full & !sat_mask;
                if nodes[other].down {
                    return self.sat(other, &side(self, cells_o, arity_o, forced)?);
                }
                let mut s = 0u64;
                loop {
                    self.budget.spend(1)?;
                    if self.sat(other, &side(self, cells_o, arity_o, forced | s)?)? {
                        return Ok(true);
                    }
                    if s == sat_mask {
                        return Ok(false);
                    }
                    s = (s.wrapping_sub(sat_mask)) & sat_mask;
                }
            }
            if nodes[a].down && nodes[b].down {
                for y1 in 0..=full {
                    self.budget.spend(1)?;
                    if self.sat(a, &side(self, &cells_a, arity_a, y1)?)?
                        && self.sat(b, &side(self, &cells_b, arity_b, full & !y1)?)?
                    {
                        return Ok(true);
                    }
                }
                return Ok(false);
            }
        }

        // Exact split: X ⊨ a ∨ b iff some Y₁ ⊨ a has a superset of X \ Y₁
        // satisfying b.
        if m > 20 {
            return Err(Error::ResourceExhausted {
                budget: self.budget.limit(),
            });
        }
        self.budget.reserve(2u128 << m)?;
        let size = 1usize << m;
        let mut up = vec![false; size];
        for (mask, slot) in up.iter_mut().enumerate() {
            self.budget.spend(1)?;
            *slot = self.sat(b, &side(self, &cells_b, arity_b, mask as u64)?)?;
        }
        for bit in 0..m {
            for mask in 0..size {
                if mask >> bit & 1 == 0 && up[mask | 1 << bit] {
                    up[mask] = true;
                }
            }
        }
        for y1 in 0..size {
            if up[(full & !(y1 as u64)) as usize] {
                self.budget.spend(1)?;
                if self.sat(a, &side(self, &cells_a, arity_a, y1 as u64)?)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn sat_pin(&mut self, id: NodeId, vars: &[VarId], body: NodeId, x: &Relation) -> Result<bool> {
        let nodes = Arc::clone(&self.nodes);
        let body_fv = &nodes[body].fv;
        if x.is_empty() {
            return self.sat(body, &Relation::empty(self.n, body_fv.len())?);
        }
        let cells = self.extension_cells(&nodes[id].fv, vars, body_fv, x);
        let combos = cells[0].len();
        self.budget.reserve(combos as u128)?;
        for c in 0..combos {
            self.budget.spend(1)?;
            let child = self.child_team(body_fv.len(), cells.iter().map(|row| row[c]))?;
            if self.sat(body, &child)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn sat_block(&mut self, id: NodeId, x: &Relation) -> Result<bool> {
        let nodes = Arc::clone(&self.nodes);
        let node = &nodes[id];
        let Op::Block {
            vars,
            flat,
            atom,
            solvable,
            fallback,
        } = &node.op
        else {
            unreachable!()
        };
        if x.is_empty() || !solvable {
            return self.sat(*fallback, x);
        }
        let n = self.n;
        let k = vars.len();

        if let Some(a) = atom {
            let Op::Atom {
                dep,
                vars: args,
                predicate,
                ..
            } = &nodes[*a].op
            else {
                unreachable!()
            };
            let permutation = args.len() == k && {
                let mut sorted = args.clone();
                sorted.sort_unstable();
                sorted.dedup();
                let mut block = vars.clone();
                block.sort_unstable();
                sorted == block
            };
            if node.fv.is_empty() && flat.is_empty() && permutation {
                // Over {ε} every non-empty relation on the block is reachable.
                let universe = predicate.as_ref().map_or(n, Relation::len);
                return Ok(exists_relation(dep, universe, true, &mut self.budget)?.is_some());
            }
        }

        let combos = n.checked_pow(k as u32).unwrap_or(usize::MAX);
        self.budget.reserve((combos as u128) * (x.len() as u128))?;
        let mut env = vec![0; self.vars.len()];
        let mut row = vec![0; node.fv.len()];
        let mut reach: Vec<usize> = Vec::new();
        let mut row_cells: Vec<Vec<usize>> = Vec::with_capacity(x.len());
        for i in x.indices() {
            x.decode(i, &mut row);
            for (&v, &e) in node.fv.iter().zip(&row) {
                env[v] = e;
            }
            let mut cells = Vec::new();
            let mut any = false;
            for mut c in 0..combos {
                self.budget.spend(1)?;
                for &v in vars.iter().rev() {
                    env[v] = c % n;
                    c /= n;
                }
                if !flat.iter().all(|&f| self.tarski(f, &mut env)) {
                    continue;
                }
                any = true;
                if let Some(a) = atom {
                    let Op::Atom { vars: args, .. } = &nodes[*a].op else {
                        unreachable!()
                    };
                    cells.push(args.iter().fold(0, |acc, &v| acc * n + env[v]));
                }
            }
            if !any {
                return Ok(false);
            }
            cells.sort_unstable();
            cells.dedup();
            reach.extend(&cells);
            row_cells.push(cells);
        }
        let Some(a) = atom else {
            return Ok(true);
        };
        reach.sort_unstable();
        reach.dedup();
        if reach.len() > MAX_REACH {
            return self.sat(*fallback, x);
        }
        let row_masks: Vec<u64> = row_cells
            .iter()
            .map(|cells| {
                cells
                    .iter()
                    .map(|c| 1u64 << reach.binary_search(c).unwrap())
                    .fold(0, |m, b| m | b)
            })
            .collect();
        let Op::Atom {
            dep,
            vars: args,
            predicate,
            ..
        } = &nodes[*a].op
        else {
            unreachable!()
        };
        // The block realises exactly the relations T ⊆ reach that meet every
        // row's reachable cells.
        self.budget.reserve(1u128 << reach.len())?;
        for t in 1..(1u64 << reach.len()) {
            self.budget.spend(1)?;
            if row_masks.iter().any(|&m| m & t == 0) {
                continue;
            }
            let rel = self.child_team(args.len(), masked(&reach, t))?;
            let holds = match predicate {
                Some(p) => dep.holds_relativized(&rel, p),
                None => dep.holds(&rel),
            };
            if holds {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn check_rows(m: usize, budget: &Budget) -> Result<usize> {
    if m > MAX_MASK_ROWS {
        return Err(Error::ResourceExhausted {
            budget: budget.limit(),
        });
    }
    Ok(m)
}

fn masked(cells: &[usize], mask: u64) -> impl Iterator<Item = usize> + '_ {
    cells
        .iter()
        .enumerate()
        .filter(move |(i, _)| mask >> i & 1 == 1)
        .map(|(_, &c)| c)
}

fn project(x: &Relation, from: &[VarId], to: &[VarId]) -> Relation {
    if from == to {
        return x.clone();
    }
    let positions: Vec<usize> = to.iter().map(|v| from.binary_search(v).unwrap()).collect();
    x.select(&positions)
}

/// Cell of each listed row of `x` after restriction to `to`.
fn project_rows(x: &Relation, rows: &[usize], from: &[VarId], to: &[VarId]) -> Vec<usize> {
    let n = x.universe();
    let positions: Vec<usize> = to.iter().map(|v| from.binary_search(v).unwrap()).collect();
    let mut row = vec![0; from.len()];
    rows.iter()
        .map(|&i| {
            x.decode(i, &mut row);
            positions.iter().fold(0, |acc, &p| acc * n + row[p])
        })
        .collect()
}
