//! Exhaustive checkers over small structures and teams.
//!
//! Every checker sweeps all structures of sizes `2..=max_universe` (from 1
//! with the small-model override) over the formulas' signature, and all
//! teams over the free variables with at most `max_rows` rows. The number of
//! (structure, team) pairs visited is compared against its closed form.

mod generate;
pub mod suite;

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;

use crate::dependencies::{exists_relation, ClosureProperty, Dependency, Registry};
use crate::error::{Budget, Error, Result};
use crate::eval::{EvalConfig, Evaluator};
use crate::structures::{
    enumerate_structures, print_structure, structure_count, tarski_eval, Relation, RelSymbol,
    Signature, Structure,
};
use crate::syntax::{free_variables, Formula, Var};
use crate::teams::{print_team, Team};

pub use generate::{random_formula, random_structure, random_team, Profile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_universe: usize,
    pub max_rows: usize,
}

impl Bounds {
    pub fn new(max_universe: usize, max_rows: usize) -> Self {
        Bounds {
            max_universe,
            max_rows,
        }
    }
}

/// A structure and team on which a property fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub structure: Structure,
    pub team: Team,
}

fn inline(text: &str) -> String {
    text.lines().join("; ")
}

impl Witness {
    pub fn model_inline(&self) -> String {
        inline(&print_structure(&self.structure))
    }

    pub fn team_inline(&self) -> String {
        inline(&print_team(&self.team, &self.structure))
    }
}

/// Outcome of one checker run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub property: String,
    pub holds: bool,
    pub bounds: Bounds,
    pub witness: Option<Witness>,
    /// (structure, team) pairs examined.
    pub visited: u64,
    pub notes: Vec<String>,
}

pub type EquivalenceReport = Report;

impl Report {
    pub fn new(property: impl Into<String>, bounds: Bounds) -> Self {
        Report {
            property: property.into(),
            holds: true,
            bounds,
            witness: None,
            visited: 0,
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, witness: Option<Witness>) {
        self.holds = false;
        if self.witness.is_none() {
            self.witness = witness;
        }
    }

    pub fn equivalent(&self) -> bool {
        self.holds
    }

    /// `PROPERTY <name> VERDICT <ok|fail> BOUNDS n=<n> rows=<r> [WITNESS <model> / <team>]`
    pub fn machine_line(&self) -> String {
        let mut line = format!(
            "PROPERTY {} VERDICT {} BOUNDS n={} rows={}",
            self.property,
            if self.holds { "ok" } else { "fail" },
            self.bounds.max_universe,
            self.bounds.max_rows
        );
        if let Some(w) = &self.witness {
            line.push_str(&format!(" WITNESS {} / {}", w.model_inline(), w.team_inline()));
        }
        line
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} (|M| <= {}, teams <= {} rows, {} cases)",
            self.property,
            if self.holds { "holds" } else { "FAILS" },
            self.bounds.max_universe,
            self.bounds.max_rows,
            self.visited
        )?;
        if let Some(w) = &self.witness {
            writeln!(f, "  structure: {}", w.model_inline())?;
            writeln!(f, "  team:      {}", w.team_inline())?;
        }
        for note in &self.notes {
            writeln!(f, "  note: {note}")?;
        }
        Ok(())
    }
}

/// Signature collected from the relation symbols (and relativizers) of the
/// given formulas.
pub fn signature_of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> Result<Signature> {
    let mut symbols: Vec<(String, usize)> = formulas
        .into_iter()
        .flat_map(|f| f.relation_symbols())
        .collect();
    symbols.sort();
    symbols.dedup();
    Signature::new(symbols.into_iter().map(|(name, k)| RelSymbol::new(name, k)))
}

/// Teams over `vars` with at most `max_rows` rows: by size, then in
/// lexicographic order of row indices.
pub fn teams(vars: &[Var], n: usize, max_rows: usize) -> Result<impl Iterator<Item = Team> + '_> {
    let cells = Relation::empty(n, vars.len())?.index_space();
    Ok((0..=max_rows.min(cells)).flat_map(move |r| {
        (0..cells).combinations(r).map(move |rows| {
            let mut rel = Relation::empty(n, vars.len()).expect("checked above");
            for i in rows {
                rel.insert_index(i);
            }
            Team::from_relation(vars.to_vec(), rel).expect("distinct variables")
        })
    }))
}

/// `Σ_{r ≤ max_rows} C(cells, r)`.
pub fn team_count(cells: usize, max_rows: usize) -> u64 {
    let mut total = 0u64;
    let mut binom = 1u64;
    for r in 0..=max_rows.min(cells) {
        total = total.saturating_add(binom);
        binom = binom.saturating_mul((cells - r) as u64) / (r as u64 + 1);
    }
    total
}

/// Runs the checkers with a fixed registry and evaluation strategy.
#[derive(Debug, Clone, Default)]
pub struct Checker {
    pub registry: Registry,
    pub config: EvalConfig,
}

impl Checker {
    pub fn new(registry: Registry, config: EvalConfig) -> Self {
        Checker { registry, config }
    }

    fn universes(&self, bounds: Bounds) -> std::ops::RangeInclusive<usize> {
        let lo = if self.config.allow_small { 1 } else { 2 };
        lo..=bounds.max_universe
    }

    fn structures(&self, sig: &Signature, n: usize) -> Result<impl Iterator<Item = Structure>> {
        enumerate_structures(sig, n, self.config.allow_small, u64::MAX)
    }

    fn evaluator(&self, s: &Structure, f: &Formula) -> Result<Evaluator> {
        Evaluator::new(s, f, &self.registry, &self.config)
    }

    fn expected_visits(&self, sig: &Signature, vars: usize, bounds: Bounds) -> u64 {
        self.universes(bounds)
            .map(|n| {
                let structures = structure_count(sig, n).unwrap_or(u64::MAX);
                structures.saturating_mul(team_count(n.pow(vars as u32), bounds.max_rows))
            })
            .sum()
    }

    fn assert_exhaustive(&self, report: &Report, sig: &Signature, vars: usize) {
        if report.holds {
            assert_eq!(
                report.visited,
                self.expected_visits(sig, vars, report.bounds),
                "sweep for {} skipped cases",
                report.property
            );
        }
    }

    /// Team equivalence of `left` and `right` over the sweep.
    pub fn check_equivalence(&self, left: &Formula, right: &Formula, bounds: Bounds) -> Result<EquivalenceReport> {
        let vars: Vec<Var> = free_variables(left).into_iter().collect();
        let right_vars: Vec<Var> = free_variables(right).into_iter().collect();
        if vars != right_vars {
            return Err(Error::Precondition(format!(
                "free variables differ: {{{}}} vs {{{}}}",
                vars.iter().join(","),
                right_vars.iter().join(",")
            )));
        }
        let sig = signature_of([left, right])?;
        let mut report = Report::new("equivalence", bounds);
        'sweep: for n in self.universes(bounds) {
            for s in self.structures(&sig, n)? {
                let mut l = self.evaluator(&s, left)?;
                let mut r = self.evaluator(&s, right)?;
                for team in teams(&vars, n, bounds.max_rows)? {
                    report.visited += 1;
                    if l.eval(&team)? != r.eval(&team)? {
                        let witness = Witness {
                            structure: s.clone(),
                            team,
                        };
                        report.notes.push(replay(&self.registry, left, right, &witness));
                        report.fail(Some(witness));
                        break 'sweep;
                    }
                }
            }
        }
        self.assert_exhaustive(&report, &sig, vars.len());
        Ok(report)
    }

    /// Team satisfaction of a first-order formula agrees with pointwise
    /// satisfaction.
    pub fn check_flatness(&self, formula: &Formula, bounds: Bounds) -> Result<Report> {
        if !formula.is_first_order() {
            return Err(Error::NotFlat(formula.to_string()));
        }
        let vars: Vec<Var> = free_variables(formula).into_iter().collect();
        let sig = signature_of([formula])?;
        let mut report = Report::new("flatness", bounds);
        'sweep: for n in self.universes(bounds) {
            for s in self.structures(&sig, n)? {
                let mut ev = self.evaluator(&s, formula)?;
                for team in teams(&vars, n, bounds.max_rows)? {
                    report.visited += 1;
                    let team_verdict = ev.eval(&team)?;
                    let mut pointwise = true;
                    for a in team.assignments() {
                        pointwise &= tarski_eval(&s, &a, formula)?;
                    }
                    if team_verdict != pointwise {
                        report.fail(Some(Witness {
                            structure: s.clone(),
                            team,
                        }));
                        break 'sweep;
                    }
                }
            }
        }
        self.assert_exhaustive(&report, &sig, vars.len());
        Ok(report)
    }

    fn atom_dependencies(&self, formula: &Formula) -> Result<Vec<(Dependency, Option<String>)>> {
        formula
            .atoms()
            .into_iter()
            .map(|a| Ok((self.registry.resolve(&a.name, &a.shape())?, a.relativizer.clone())))
            .collect()
    }

    /// The team-level closure property implied by the atoms' flags.
    pub fn check_closure_propagation(
        &self,
        formula: &Formula,
        property: ClosureProperty,
        bounds: Bounds,
    ) -> Result<Report> {
        if formula.has_global_or() {
            return Err(Error::Precondition("formula contains ⊔".into()));
        }
        if property != ClosureProperty::Union && formula.has_possibly() {
            return Err(Error::Precondition(format!(
                "◇ does not preserve {}",
                property.name()
            )));
        }
        for (dep, _) in self.atom_dependencies(formula)? {
            let flags = dep.flags();
            let ok = match property {
                ClosureProperty::Downwards => flags.downwards,
                ClosureProperty::Union => flags.union,
                ClosureProperty::EmptyTeam => flags.empty_team,
                ClosureProperty::Upwards => {
                    return Err(Error::Precondition("upwards closure is not propagated".into()))
                }
            };
            if !ok {
                return Err(Error::Precondition(format!(
                    "`{}` is not {}",
                    dep.name(),
                    property.name()
                )));
            }
        }
        let vars: Vec<Var> = free_variables(formula).into_iter().collect();
        let sig = signature_of([formula])?;
        let mut report = Report::new(format!("closure-{}", property.name()), bounds);
        'sweep: for n in self.universes(bounds) {
            for s in self.structures(&sig, n)? {
                let mut ev = self.evaluator(&s, formula)?;
                let mut verdicts: HashMap<Team, bool> = HashMap::new();
                let mut satisfying = Vec::new();
                for team in teams(&vars, n, bounds.max_rows)? {
                    report.visited += 1;
                    let v = ev.eval(&team)?;
                    if v {
                        satisfying.push(team.clone());
                    }
                    verdicts.insert(team, v);
                }
                let failure = match property {
                    ClosureProperty::EmptyTeam => {
                        let empty = Team::empty(vars.clone(), n)?;
                        (!verdicts[&empty]).then_some(empty)
                    }
                    ClosureProperty::Downwards => satisfying.iter().find_map(|t| {
                        t.as_relation().indices().find_map(|i| {
                            let mut smaller = t.as_relation().clone();
                            smaller.remove_index(i);
                            let y = Team::from_relation(vars.clone(), smaller).expect("same domain");
                            (!verdicts[&y]).then(|| t.clone())
                        })
                    }),
                    ClosureProperty::Union => {
                        let mut found = None;
                        for (a, b) in satisfying.iter().tuple_combinations() {
                            let u = Team::from_relation(vars.clone(), a.as_relation().union(b.as_relation()))?;
                            let holds = match verdicts.get(&u) {
                                Some(&v) => v,
                                None => ev.eval(&u)?,
                            };
                            if !holds {
                                found = Some(u);
                                break;
                            }
                        }
                        found
                    }
                    ClosureProperty::Upwards => unreachable!(),
                };
                if let Some(team) = failure {
                    report.fail(Some(Witness {
                        structure: s.clone(),
                        team,
                    }));
                    break 'sweep;
                }
            }
        }
        self.assert_exhaustive(&report, &sig, vars.len());
        Ok(report)
    }

    /// Whenever a `⊔`-free formula is satisfied, each of its atoms has some
    /// member over the (relativized) universe, and the empty relation when
    /// the team is empty.
    pub fn check_atom_transmission(&self, formula: &Formula, bounds: Bounds) -> Result<Report> {
        if formula.has_global_or() {
            return Err(Error::Precondition("formula contains ⊔".into()));
        }
        let deps = self.atom_dependencies(formula)?;
        if deps.is_empty() {
            return Err(Error::Precondition("formula has no dependency atom".into()));
        }
        let vars: Vec<Var> = free_variables(formula).into_iter().collect();
        let sig = signature_of([formula])?;
        let mut report = Report::new("atom-transmission", bounds);
        let mut satisfied = 0u64;
        'sweep: for n in self.universes(bounds) {
            for s in self.structures(&sig, n)? {
                let mut ev = self.evaluator(&s, formula)?;
                for team in teams(&vars, n, bounds.max_rows)? {
                    report.visited += 1;
                    if !ev.eval(&team)? {
                        continue;
                    }
                    satisfied += 1;
                    for (dep, rel) in &deps {
                        let predicate = match rel {
                            Some(p) => Some(s.relation(p).ok_or_else(|| Error::Relativizer(p.clone()))?),
                            None => None,
                        };
                        let universe = predicate.map_or(n, Relation::len);
                        let mut budget = Budget::default();
                        let some = exists_relation(dep, universe, false, &mut budget)?.is_some();
                        let empty_ok = !team.is_empty() || {
                            let empty = Relation::empty(n, dep.arity())?;
                            match predicate {
                                Some(p) => dep.holds_relativized(&empty, p),
                                None => dep.holds(&empty),
                            }
                        };
                        if !some || !empty_ok {
                            report.fail(Some(Witness {
                                structure: s.clone(),
                                team: team.clone(),
                            }));
                            break 'sweep;
                        }
                    }
                }
            }
        }
        report.notes.push(format!("{satisfied} satisfying teams"));
        self.assert_exhaustive(&report, &sig, vars.len());
        Ok(report)
    }
}

/// Re-evaluates a counterexample with a fresh brute-force evaluator.
fn replay(registry: &Registry, left: &Formula, right: &Formula, w: &Witness) -> String {
    let cfg = EvalConfig::brute();
    let run = |f: &Formula| Evaluator::new(&w.structure, f, registry, &cfg)?.eval(&w.team);
    match (run(left), run(right)) {
        (Ok(l), Ok(r)) if l != r => format!("brute-force replay: left {l}, right {r}"),
        (Ok(l), Ok(_)) => format!("brute-force replay does not separate the formulas (both {l})"),
        (Err(e), _) | (_, Err(e)) => format!("brute-force replay failed: {e}"),
    }
}

#[cfg(test)]
mod tests;
