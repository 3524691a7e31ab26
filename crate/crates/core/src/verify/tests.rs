use super::*;
use crate::syntax::parse;

#[test]
fn team_counts_match_enumeration() {
    let vars = [Var::new("x"), Var::new("y")];
    for (n, rows) in [(2, 0), (2, 3), (2, 4), (3, 4), (3, 9)] {
        let got = teams(&vars, n, rows).unwrap().count() as u64;
        assert_eq!(got, team_count(n * n, rows));
    }
    assert_eq!(team_count(9, 9), 512);
}

#[test]
fn equivalence_counterexample_replays() {
    let checker = Checker::default();
    let left = parse("const(x)").unwrap();
    let right = parse("x = x").unwrap();
    let report = checker.check_equivalence(&left, &right, Bounds::new(2, 2)).unwrap();
    assert!(!report.holds);
    let w = report.witness.as_ref().unwrap();
    assert_eq!(w.team.len(), 2);
    assert!(report.notes[0].starts_with("brute-force replay: left false"));
    assert_eq!(
        report.machine_line(),
        "PROPERTY equivalence VERDICT fail BOUNDS n=2 rows=2 WITNESS universe = 2 / vars = x; row 0; row 1"
    );
}

#[test]
fn equivalence_requires_equal_free_variables() {
    let err = Checker::default()
        .check_equivalence(&parse("P(x)").unwrap(), &parse("P(y)").unwrap(), Bounds::new(2, 1))
        .unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

#[test]
fn equivalence_counts_every_case() {
    let report = Checker::default()
        .check_equivalence(&parse("u(v)").unwrap(), &crate::rewrite::u_definition(), Bounds::new(3, 8))
        .unwrap();
    assert!(report.holds);
    assert_eq!(report.visited, 4 + 8);
}

#[test]
fn flatness_rejects_atoms() {
    let err = Checker::default()
        .check_flatness(&parse("const(x)").unwrap(), Bounds::new(2, 2))
        .unwrap_err();
    assert!(matches!(err, Error::NotFlat(_)));
    let ok = Checker::default()
        .check_flatness(&parse("A y (P(x) | x = y)").unwrap(), Bounds::new(3, 3))
        .unwrap();
    assert!(ok.holds);
}

#[test]
fn closure_checks_validate_atoms() {
    let checker = Checker::default();
    let f = parse("E y (inc(x ; y) & P(y))").unwrap();
    assert!(checker
        .check_closure_propagation(&f, ClosureProperty::Union, Bounds::new(2, 4))
        .unwrap()
        .holds);
    assert!(matches!(
        checker.check_closure_propagation(&f, ClosureProperty::Downwards, Bounds::new(2, 4)),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        checker.check_closure_propagation(&parse("const(x) <|> P(x)").unwrap(), ClosureProperty::Downwards, Bounds::new(2, 4)),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn atom_transmission_on_lo2() {
    let checker = Checker::new(Registry::standard(), EvalConfig::optimized());
    let f = parse("E z lo2(x,y,z)").unwrap();
    let report = checker.check_atom_transmission(&f, Bounds::new(3, 3)).unwrap();
    assert!(report.holds, "{report}");
    assert!(matches!(
        checker.check_atom_transmission(&parse("P(x)").unwrap(), Bounds::new(2, 1)),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn random_formulas_are_deterministic() {
    let profile = Profile::default()
        .with_atoms(&["const", "dep", "inc"])
        .with_global_or(2)
        .sentences();
    for seed in 0..50 {
        let f = random_formula(seed, &profile);
        assert_eq!(f, random_formula(seed, &profile));
        assert!(free_variables(&f).is_empty());
        assert!(f.count_global_or() <= 2);
    }
    let lo = Profile::default().with_atoms(&["lo2"]).requiring("lo2");
    assert!((0..50).all(|s| random_formula(s, &lo).atoms().iter().any(|a| a.name == "lo2")));
}
