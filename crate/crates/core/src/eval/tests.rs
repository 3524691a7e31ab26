use super::*;
use crate::structures::Relation;
use crate::syntax::{parse, Var};

fn structure(n: usize, p: &[usize]) -> Structure {
    let rel = Relation::from_tuples(n, 1, p.iter().map(|&e| [e])).unwrap();
    Structure::new(n).unwrap().with_relation("P", rel).unwrap()
}

fn team(n: usize, vars: &[&str], rows: &[&[usize]]) -> Team {
    Team::new(vars.iter().map(|v| Var::new(*v)).collect(), n, rows.iter().copied()).unwrap()
}

fn both(s: &Structure, t: &Team, text: &str) -> bool {
    let f = parse(text).unwrap();
    let brute = eval(s, t, &f, &EvalConfig::brute()).unwrap();
    let opt = eval(s, t, &f, &EvalConfig::optimized()).unwrap();
    assert_eq!(brute, opt, "{text}");
    brute
}

#[test]
fn literals_and_bottom() {
    let s = structure(2, &[0]);
    let empty = team(2, &["x"], &[]);
    let t = team(2, &["x"], &[&[0], &[1]]);
    assert!(both(&s, &empty, "FF"));
    assert!(!both(&s, &t, "FF"));
    assert!(!both(&s, &t, "P(x)"));
    assert!(both(&s, &t, "P(x) | ~P(x)"));
    assert!(both(&s, &empty, "P(x) & ~P(x)"));
}

#[test]
fn tensor_disjunction_splits_the_team() {
    let s = structure(3, &[]);
    let two = team(3, &["x"], &[&[0], &[1]]);
    let three = team(3, &["x"], &[&[0], &[1], &[2]]);
    assert!(!both(&s, &two, "const(x)"));
    assert!(both(&s, &two, "const(x) | const(x)"));
    assert!(!both(&s, &three, "const(x) | const(x)"));
    assert!(both(&s, &three, "const(x) | const(x) | const(x)"));
}

#[test]
fn global_disjunction_takes_the_whole_team() {
    let s = structure(2, &[0]);
    let t = team(2, &["x"], &[&[0], &[1]]);
    assert!(!both(&s, &t, "P(x) <|> ~P(x)"));
    assert!(both(&s, &team(2, &["x"], &[&[1]]), "P(x) <|> ~P(x)"));
}

#[test]
fn quantifiers_are_lax() {
    let s = structure(2, &[]);
    let t = team(2, &["x"], &[&[0], &[1]]);
    assert!(both(&s, &t, "E y (y = x)"));
    assert!(both(&s, &t, "E y const(y)"));
    assert!(!both(&s, &t, "E y (const(y) & y = x)"));
    assert!(both(&s, &t, "E y all(y)"));
    assert!(both(&s, &t, "E y (inc(y ; x) & inc(x ; y))"));
    assert!(!both(&s, &t, "A y dep(x ; y)"));
    assert!(both(&s, &t, "A y indep(x ; ; y)"));
}

#[test]
fn possibility_looks_for_a_nonempty_subteam() {
    let s = structure(2, &[0]);
    let t = team(2, &["x"], &[&[0], &[1]]);
    assert!(both(&s, &t, "<> P(x)"));
    assert!(!both(&s, &team(2, &["x"], &[&[1]]), "<> P(x)"));
    assert!(!both(&s, &team(2, &["x"], &[]), "<> TT"));
    assert!(both(&s, &t, "<> all(x) & ne(x)"));
}

#[test]
fn linear_order_sentence() {
    let f = parse("(E x E y E z lo2(x,y,z)) <|> (E x E y E z lo3(x,y,z))").unwrap();
    let opt = EvalConfig::optimized();
    for (n, expected) in [(2, true), (3, true), (4, true), (5, false), (6, true), (7, false)] {
        let s = Structure::new(n).unwrap();
        assert_eq!(eval_sentence(&s, &f, &opt).unwrap(), expected, "n = {n}");
    }
    let s = Structure::new(2).unwrap();
    assert!(eval_sentence(&s, &f, &EvalConfig::brute()).unwrap());
}

#[test]
fn constancy_pins_quantified_variables() {
    let s = structure(3, &[0, 1]);
    let t = team(3, &["x"], &[&[0], &[1], &[2]]);
    assert!(both(&s, &t, "E p (const(p) & (x = p | x != p))"));
    assert!(!both(&s, &t, "E p (const(p) & x = p)"));
    assert!(both(&s, &t, "E p E q (const(p) & const(q) & (p = q & TT | p != q & FF))"));
}

#[test]
fn exhaustion_is_an_error() {
    let s = Structure::new(3).unwrap();
    let t = Team::full(vec![Var::new("x"), Var::new("y")], 3).unwrap();
    let f = parse("const(x,y) | const(x,y)").unwrap();
    let err = eval(&s, &t, &f, &EvalConfig::brute().with_budget(100)).unwrap_err();
    assert!(err.is_exhausted());
}

#[test]
fn unbound_and_small_universe() {
    let s = Structure::new(2).unwrap();
    let f = parse("P(x)").unwrap();
    assert!(matches!(
        eval(&s, &team(2, &["x"], &[&[0]]), &f, &EvalConfig::brute()),
        Err(Error::UnknownRelation(_))
    ));
    let g = parse("x = y").unwrap();
    assert!(matches!(
        eval(&s, &team(2, &["x"], &[&[0]]), &g, &EvalConfig::brute()),
        Err(Error::Unbound(_))
    ));
    let one = Structure::with_small_universe(1).unwrap();
    assert!(matches!(
        eval_sentence(&one, &Formula::Top, &EvalConfig::brute()),
        Err(Error::SmallUniverse(1))
    ));
    assert!(eval_sentence(&one, &Formula::Top, &EvalConfig::brute().with_small_universe(true)).unwrap());
}
