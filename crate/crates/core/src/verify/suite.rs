//! The fixed battery behind `verify --suite paper`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    random_formula, random_structure, random_team, signature_of, teams, Bounds, Checker, Profile,
    Report, Witness,
};
use crate::dependencies::{
    classify_closure, default_shape, exists_relation, nonjumping_check, ClosureProperty, Registry,
};
use crate::error::{Budget, Result};
use crate::eval::{eval_sentence, EvalConfig, Evaluator};
use crate::rewrite::{
    all_form, build_definability_formula, build_e_formula, const_form, e_dependency,
    encode_global_disjunction, pull_global_disjunction, u_definition,
};
use crate::structures::{Relation, Structure};
use crate::syntax::{free_variables, parse, DependencyAtom, Formula, Var};
use crate::teams::Team;

/// Atoms with the empty team property.
pub const ETP_ATOMS: [&str; 4] = ["const", "dep", "inc", "indep"];

pub const LO_SENTENCE: &str = "(E x E y E z lo2(x,y,z)) <|> (E x E y E z lo3(x,y,z))";

/// Corpus sizes; [`SuiteSize::full`] matches the documented battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSize {
    pub flat: u64,
    pub closure: u64,
    pub lo2: u64,
    pub pull: u64,
    pub optimizer: u64,
    pub relativized: u64,
}

impl SuiteSize {
    pub fn full() -> Self {
        SuiteSize {
            flat: 1000,
            closure: 200,
            lo2: 200,
            pull: 200,
            optimizer: 2000,
            relativized: 200,
        }
    }
}

fn merge(into: &mut Report, part: Report, label: impl FnOnce() -> String) {
    into.visited += part.visited;
    if !part.holds && into.holds {
        into.holds = false;
        into.witness = part.witness;
        into.notes.push(label());
        into.notes.extend(part.notes);
    }
}

/// `(∃xyz lo2) ⊔ (∃xyz lo3)` holds exactly on sizes divisible by two or three.
pub fn lo_divisibility() -> Result<Report> {
    let start = Instant::now();
    let f = parse(LO_SENTENCE)?;
    let mut report = Report::new("lo-divisibility", Bounds::new(7, 1));
    for n in 2..=7 {
        let verdict = eval_sentence(&Structure::new(n)?, &f, &EvalConfig::optimized())?;
        report.visited += 1;
        if verdict != (n % 2 == 0 || n % 3 == 0) {
            report.holds = false;
            report.notes.push(format!("|M| = {n}: got {verdict}"));
        }
    }
    // Witness search against the generic enumeration at |M| = 2.
    let registry = Registry::standard();
    for name in ["lo2", "lo3"] {
        let dep = registry.resolve_default(name)?;
        let fast = exists_relation(&dep, 2, false, &mut Budget::default())?.is_some();
        let generic = (0..1u64 << 8).any(|mask| dep.holds(&Relation::from_mask(2, 3, mask).expect("fits")));
        if fast != generic {
            report.holds = false;
            report.notes.push(format!("{name} at |M| = 2: witness search {fast}, enumeration {generic}"));
        }
    }
    report.notes.push(format!("{:.2?}", start.elapsed()));
    Ok(report)
}

pub fn flatness(seed: u64, count: u64) -> Result<Report> {
    let checker = Checker::default();
    let bounds = Bounds::new(3, 4);
    let profile = Profile::first_order().with_depth(4);
    let mut report = Report::new("flatness", bounds);
    for i in 0..count {
        let f = random_formula(seed.wrapping_add(i), &profile);
        let part = checker.check_flatness(&f, bounds)?;
        merge(&mut report, part, || format!("formula: {f}"));
    }
    report.notes.push(format!("{count} formulas"));
    Ok(report)
}

pub fn closure_profiles() -> [(ClosureProperty, Profile); 3] {
    let base = Profile::default().with_depth(3);
    [
        (ClosureProperty::Downwards, base.clone().with_atoms(&["const", "dep"])),
        (ClosureProperty::Union, base.clone().with_atoms(&["inc"]).with_possibly(true)),
        (ClosureProperty::EmptyTeam, base.with_atoms(&ETP_ATOMS)),
    ]
}

pub fn closure_preservation(seed: u64, count: u64) -> Result<Report> {
    let checker = Checker::default();
    let bounds = Bounds::new(2, 4);
    let mut report = Report::new("closure-preservation", bounds);
    for (property, profile) in closure_profiles() {
        for i in 0..count {
            let f = random_formula(seed.wrapping_add(i), &profile);
            let part = checker.check_closure_propagation(&f, property, bounds)?;
            merge(&mut report, part, || format!("{}: {f}", property.name()));
        }
    }
    report.notes.push(format!("{count} formulas per property"));
    Ok(report)
}

pub fn lo2_profile() -> Profile {
    Profile::default()
        .with_depth(3)
        .with_atoms(&["lo2", "const", "dep", "inc"])
        .requiring("lo2")
}

/// `lo2` has no member on three elements, so no formula mentioning it (and
/// free of `⊔`) is satisfiable there.
pub fn lo2_transmission(seed: u64, count: u64) -> Result<Report> {
    let checker = Checker::new(Registry::standard(), EvalConfig::optimized());
    let bounds = Bounds::new(3, 9);
    let profile = lo2_profile();
    let mut report = Report::new("lo2-transmission", bounds);
    for i in 0..count {
        let f = random_formula(seed.wrapping_add(i), &profile);
        let part = checker.check_atom_transmission(&f, bounds)?;
        merge(&mut report, part, || format!("formula: {f}"));
        let vars: Vec<Var> = free_variables(&f).into_iter().collect();
        for s in crate::structures::enumerate_structures(&signature_of([&f])?, 3, false, u64::MAX)? {
            let mut ev = Evaluator::new(&s, &f, &checker.registry, &checker.config)?;
            for team in teams(&vars, 3, bounds.max_rows)? {
                if ev.eval(&team)? && report.holds {
                    report.holds = false;
                    report.witness = Some(Witness {
                        structure: s.clone(),
                        team,
                    });
                    report.notes.push(format!("satisfied on three elements: {f}"));
                }
            }
        }
    }
    Ok(report)
}

pub fn pull_profile() -> Profile {
    Profile::default()
        .with_depth(4)
        .with_atoms(&["const", "dep", "inc", "indep", "ne", "all"])
        .with_global_or(3)
        .sentences()
}

/// The pull-out corpus: sentences, and the same draws left open.
pub fn pull_corpus(seed: u64, count: u64) -> Vec<Formula> {
    let closed = pull_profile();
    let open = Profile {
        sentence: false,
        ..closed.clone()
    };
    (0..count)
        .flat_map(|i| {
            let s = seed.wrapping_add(i);
            [random_formula(s, &closed), random_formula(s, &open)]
        })
        .collect()
}

fn has_etp_atoms_only(f: &Formula) -> bool {
    !f.has_possibly() && f.atoms().iter().all(|a| ETP_ATOMS.contains(&a.name.as_str()))
}

pub fn pull_out(seed: u64, count: u64, config: &EvalConfig) -> Result<Report> {
    let checker = Checker::new(Registry::standard(), config.clone());
    let bounds = Bounds::new(3, 3);
    let mut report = Report::new("pull-out", bounds);
    for f in pull_corpus(seed, count) {
        let list = pull_global_disjunction(&f)?;
        let part = checker.check_equivalence(&f, &list.to_formula(), bounds)?;
        merge(&mut report, part, || format!("formula: {f}"));
    }
    Ok(report)
}

/// The encoding agrees with `⊔` on the ETP part of the pull-out corpus and
/// fails on `NE`.
pub fn encoding(seed: u64, count: u64, config: &EvalConfig) -> Result<Report> {
    let checker = Checker::new(Registry::standard(), config.clone());
    let bounds = Bounds::new(3, 3);
    let mut report = Report::new("global-or-encoding", bounds);
    let corpus: Vec<Formula> = pull_corpus(seed, count)
        .into_iter()
        .filter(has_etp_atoms_only)
        .collect();
    for f in &corpus {
        let part = checker.check_equivalence(f, &encode_global_disjunction(f), bounds)?;
        merge(&mut report, part, || format!("formula: {f}"));
    }
    report.notes.push(format!("{} ETP formulas", corpus.len()));
    let ne = parse("ne(v) <|> ne(v)")?;
    let regression = checker.check_equivalence(&ne, &encode_global_disjunction(&ne), Bounds::new(2, 1))?;
    report.visited += regression.visited;
    if regression.holds {
        report.holds = false;
        report.notes.push("NE regression: encoding unexpectedly equivalent".into());
    } else if let Some(w) = regression.witness {
        report.notes.push(format!("NE regression separates at {} / {}", w.model_inline(), w.team_inline()));
    }
    Ok(report)
}

pub fn u_equivalence() -> Result<Report> {
    let mut report = Checker::default().check_equivalence(&parse("u(v)")?, &u_definition(), Bounds::new(3, 8))?;
    report.property = "u-definition".into();
    Ok(report)
}

/// Induced `E` for `const`, `all`, `neq1`: equal to the upward-reachable
/// part of `D` and downwards closed.
pub fn e_construction() -> Result<Report> {
    let registry = Registry::standard();
    let mut report = Report::new("e-construction", Bounds::new(3, 3));
    for name in ["const", "all", "neq1"] {
        let dep = registry.resolve_default(name)?;
        let expected = e_dependency(&dep)?;
        let f = build_e_formula(name, &registry)?;
        for n in 2..=3 {
            let s = Structure::new(n)?;
            let config = if n == 2 { EvalConfig::brute() } else { EvalConfig::optimized() };
            let mut ev = Evaluator::new(&s, &f, &registry, &config)?;
            let mut induced = Vec::new();
            for mask in 0..1u64 << n {
                let r = Relation::from_mask(n, 1, mask)?;
                let team = Team::from_relation(vec![Var::new("x")], r.clone())?;
                let got = ev.eval(&team)?;
                report.visited += 1;
                if got != expected.holds(&r) && report.holds {
                    report.holds = false;
                    report.witness = Some(Witness {
                        structure: s.clone(),
                        team,
                    });
                    report.notes.push(format!("{name}: induced E disagrees"));
                }
                induced.push(got);
            }
            let closed = (0..1usize << n)
                .filter(|&m| induced[m])
                .all(|m| (0..n).all(|b| induced[m & !(1 << b)]));
            if !closed {
                report.holds = false;
                report.notes.push(format!("{name}: induced E at |M| = {n} is not downwards closed"));
            }
        }
        let closure = classify_closure(&expected, 3, &mut Budget::default())?;
        if !closure.flags().downwards {
            report.holds = false;
            report.notes.push(format!("{name}: E not downwards closed"));
        }
    }
    Ok(report)
}

pub fn definability() -> Result<Report> {
    let bounds = Bounds::new(3, 4);
    let mut report = Report::new("definability", bounds);
    for (name, form) in [("const", const_form()), ("all", all_form())] {
        let def = build_definability_formula(&form)?;
        let checker = Checker::new(def.registry(), EvalConfig::brute());
        let target = Formula::atom(name, def.free_vars());
        let part = checker.check_equivalence(&def.formula, &target, bounds)?;
        merge(&mut report, part, || format!("{name} form"));
    }
    Ok(report)
}

pub fn nonjumping() -> Result<Report> {
    let registry = Registry::standard();
    let mut report = Report::new("nonjumping", Bounds::new(3, 0));
    let expected: [(&str, Option<(usize, Relation)>); 3] = [
        ("const", None),
        ("all", None),
        ("neq1", Some((2, Relation::empty(2, 1)?))),
    ];
    for (name, want) in expected {
        let dep = registry.resolve_default(name)?;
        let got = nonjumping_check(&dep, 3, &mut Budget::default())?;
        report.visited += 1;
        if got.witness != want {
            report.holds = false;
            report.notes.push(format!("{name}: witness {:?}", got.witness));
        }
    }
    Ok(report)
}

/// Profiles cycled through by the optimizer comparison.
pub fn optimizer_profiles() -> Vec<Profile> {
    let all = [
        "const", "nonconst", "dep", "indep", "inc", "ninc", "ne", "all", "u", "neq1", "lo2", "lo3",
    ];
    let base = Profile::default().with_depth(4).with_relations(&[("P", 1), ("R", 2)]);
    vec![
        base.clone().with_atoms(&all).with_global_or(1).with_possibly(true),
        base.clone().with_atoms(&ETP_ATOMS).with_relativizers(&["P"]),
        base.clone().with_atoms(&["const", "dep", "all", "ne"]).with_vars(&["x", "y", "z"]),
        base.with_atoms(&ETP_ATOMS).with_global_or(1).with_depth(2),
    ]
}

/// Brute force and the optimized strategy agree on random instances.
pub fn optimizer_agreement(seed: u64, count: u64) -> Result<Report> {
    let registry = Registry::standard();
    let bounds = Bounds::new(3, 4);
    let mut report = Report::new("optimizer-agreement", bounds);
    let profiles = optimizer_profiles();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut exhausted, mut truths) = (0, 0);
    for i in 0..count {
        let profile = &profiles[i as usize % profiles.len()];
        let mut f = random_formula(rng.gen(), profile);
        // Encoded `⊔` nests two set-valued choices; brute force only
        // finishes them on small instances.
        let encoded = i % 8 == 7;
        if encoded {
            f = encode_global_disjunction(&f);
        }
        let (n, rows) = if encoded { (2, 2) } else { (rng.gen_range(2..=3), 4) };
        let s = random_structure(&mut rng, &signature_of([&f])?, n)?;
        let vars: Vec<Var> = free_variables(&f).into_iter().collect();
        let team = random_team(&mut rng, &vars, n, rows)?;
        report.visited += 1;
        let run = |config: EvalConfig| Evaluator::new(&s, &f, &registry, &config)?.eval(&team);
        match (run(EvalConfig::brute()), run(EvalConfig::optimized())) {
            (Ok(a), Ok(b)) if a == b => truths += a as u64,
            (Ok(a), Ok(b)) => {
                if report.holds {
                    report.notes.push(format!("{f}: brute {a}, optimized {b}"));
                    report.witness = Some(Witness {
                        structure: s.clone(),
                        team: team.clone(),
                    });
                }
                report.holds = false;
            }
            (Err(e), _) | (_, Err(e)) => {
                if !e.is_exhausted() {
                    return Err(e);
                }
                exhausted += 1;
                report.holds = false;
                report.notes.push(format!("{f}: {e}"));
            }
        }
    }
    report.notes.push(format!("{truths} true, {exhausted} exhausted"));
    Ok(report)
}

/// A satisfied relativized atom keeps every argument inside its predicate.
pub fn relativized_atoms(seed: u64, count: u64) -> Result<Report> {
    let registry = Registry::standard();
    let mut report = Report::new("relativized-atoms", Bounds::new(3, 4));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = [
        "const", "nonconst", "dep", "indep", "inc", "ninc", "ne", "all", "u", "neq1",
    ];
    let pool: Vec<Var> = ["x", "y", "z"].into_iter().map(Var::new).collect();
    let mut satisfied = 0;
    for _ in 0..count {
        let name = names[rng.gen_range(0..names.len())];
        let groups: Vec<Vec<Var>> = default_shape(name)
            .iter()
            .map(|&len| (0..len).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect())
            .collect();
        let f = Formula::Atom(DependencyAtom::new(name, groups).relativized("P"));
        let n = rng.gen_range(2..=3);
        let sig = signature_of([&f])?;
        let s = random_structure(&mut rng, &sig, n)?;
        let p = s.relation("P").expect("in signature").clone();
        let vars: Vec<Var> = free_variables(&f).into_iter().collect();
        // Half of the teams are drawn inside P.
        let team = if rng.gen_bool(0.5) && !p.is_empty() {
            let inside: Vec<Vec<usize>> = (0..vars.len()).map(|_| p.tuples().map(|t| t[0]).collect()).collect();
            let mut rows = Vec::new();
            for _ in 0..rng.gen_range(1..=4) {
                rows.push(inside.iter().map(|c| c[rng.gen_range(0..c.len())]).collect::<Vec<_>>());
            }
            Team::new(vars.clone(), n, rows)?
        } else {
            random_team(&mut rng, &vars, n, 4)?
        };
        report.visited += 1;
        if !Evaluator::new(&s, &f, &registry, &EvalConfig::brute())?.eval(&team)? {
            continue;
        }
        satisfied += 1;
        let inside = team.rows().all(|row| row.iter().all(|&a| p.contains(&[a])));
        if !inside && report.holds {
            report.holds = false;
            report.witness = Some(Witness {
                structure: s.clone(),
                team: team.clone(),
            });
            report.notes.push(format!("{f} satisfied outside P"));
        }
    }
    report.notes.push(format!("{satisfied} satisfied instances"));
    Ok(report)
}

/// All checks, in a fixed order.
pub fn paper_suite(seed: u64, size: SuiteSize) -> Result<Vec<Report>> {
    let opt = EvalConfig::optimized();
    Ok(vec![
        lo_divisibility()?,
        flatness(seed, size.flat)?,
        closure_preservation(seed, size.closure)?,
        lo2_transmission(seed, size.lo2)?,
        pull_out(seed, size.pull, &EvalConfig::brute())?,
        encoding(seed, size.pull, &opt)?,
        u_equivalence()?,
        e_construction()?,
        definability()?,
        nonjumping()?,
        optimizer_agreement(seed, size.optimizer)?,
        relativized_atoms(seed, size.relativized)?,
    ])
}
