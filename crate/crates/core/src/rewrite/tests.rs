use super::*;
use crate::eval::{eval_with, EvalConfig};
use crate::structures::Structure;
use crate::syntax::{parse, parse_with, ParseOptions};
use crate::teams::Team;

fn p(text: &str) -> Formula {
    parse(text).unwrap()
}

#[test]
fn pull_out_examples() {
    let list = pull_global_disjunction(&p("E v (P(v) <|> ~P(v))")).unwrap();
    assert_eq!(list.disjuncts(), &[p("E v P(v)"), p("E v ~P(v)")]);

    let flat = p("E x (P(x) | x = y)");
    assert_eq!(pull_global_disjunction(&flat).unwrap().disjuncts(), &[flat]);

    let list = pull_global_disjunction(&p("(P(a) <|> P(b)) | (P(c) <|> P(d))")).unwrap();
    let expected = ["P(a) | P(c)", "P(a) | P(d)", "P(b) | P(c)", "P(b) | P(d)"];
    assert_eq!(list.disjuncts(), expected.map(p).as_slice());
}

#[test]
fn pull_out_rejects_possibility_above_global_or() {
    assert!(matches!(
        pull_global_disjunction(&p("<> (P(x) <|> TT)")),
        Err(Error::UnsupportedShape(_))
    ));
    assert!(pull_global_disjunction(&p("<> P(x) <|> TT")).is_ok());
}

#[test]
fn measure_decreases_along_the_rewrite() {
    let mut f = p("A x ((P(x) <|> const(x)) & (E y (P(y) <|> ~P(y)) | (x = x <|> FF)))");
    let mut steps = 0;
    while let Some(next) = pull_step(&f) {
        assert!(pull_measure(&next) < pull_measure(&f));
        f = next;
        steps += 1;
    }
    assert!(steps > 3);
}

#[test]
fn encoding_shape_and_identity() {
    let flat = p("E x (P(x) | const(x))");
    assert_eq!(encode_global_disjunction(&flat), flat);
    let encoded = encode_global_disjunction(&p("P(v) <|> ~P(v)"));
    let opts = ParseOptions {
        allow_reserved: true,
        ..Default::default()
    };
    let expected = parse_with(
        "E _p0 E _q0 (const(_p0) & const(_q0) & (_p0 = _q0 & P(v) | _p0 != _q0 & ~P(v)))",
        opts,
    )
    .unwrap();
    assert_eq!(encoded, expected);
}

#[test]
fn encoding_fails_without_the_empty_team_property() {
    let s = Structure::new(2).unwrap();
    let t = Team::new(vec![Var::new("v")], 2, [[0]]).unwrap();
    let f = p("ne(v) <|> ne(v)");
    let cfg = EvalConfig::brute();
    let r = Registry::standard();
    assert!(eval_with(&s, &t, &f, &r, &cfg).unwrap());
    assert!(!eval_with(&s, &t, &encode_global_disjunction(&f), &r, &cfg).unwrap());
}

#[test]
fn encoding_team_example() {
    let s = Structure::new(2).unwrap();
    let t = Team::new(vec![Var::new("v"), Var::new("w")], 2, [[0, 0], [0, 1]]).unwrap();
    let f = p("v = w <|> v != w");
    let (cfg, r) = (EvalConfig::brute(), Registry::standard());
    assert!(!eval_with(&s, &t, &f, &r, &cfg).unwrap());
    assert!(!eval_with(&s, &t, &encode_global_disjunction(&f), &r, &cfg).unwrap());
}

#[test]
fn e_formula_shape() {
    let f = build_e_formula("const", &Registry::standard()).unwrap();
    let opts = ParseOptions {
        allow_reserved: true,
        ..Default::default()
    };
    let expected = parse_with(
        "FF <|> A _p0 A _q0 E _y0 ((_p0 != _q0 | _y0 = x) & const(_y0))",
        opts,
    )
    .unwrap();
    assert_eq!(f, expected);
    let g = build_e_formula("dep", &Registry::standard()).unwrap();
    assert!(g.to_string().contains("dep(_y0 ; _y1)"));
    assert!(build_e_formula("nope", &Registry::standard()).is_err());
}

#[test]
fn e_dependency_of_constancy() {
    let e = e_dependency(&Dependency::builtin("const", &[1]).unwrap()).unwrap();
    for mask in 0..4u64 {
        let r = Relation::from_mask(2, 1, mask).unwrap();
        assert_eq!(e.holds(&r), r.len() <= 1);
    }
    assert!(e.flags().downwards);
}

#[test]
fn relativization() {
    let f = relativize_fo(&p("A x E y x != y"), "P").unwrap();
    assert_eq!(f, p("A x (~P(x) | E y (P(y) & x != y))"));
    assert_eq!(relativize_fo(&p("TT"), "P").unwrap(), p("TT"));
    assert!(matches!(relativize_fo(&p("E x const(x)"), "P"), Err(Error::NotFlat(_))));
}

#[test]
fn u_is_bottom_or_all() {
    assert_eq!(u_definition(), p("FF <|> all(v)"));
}

#[test]
fn definability_fixtures() {
    let d = build_definability_formula(&const_form()).unwrap();
    let opts = ParseOptions {
        allow_reserved: true,
        ..Default::default()
    };
    let expected = parse_with(
        "fo:F(x1) & FF <|> E _z0 (const(_z0) & fo:E(x1,_z0) & x1 = _z0)",
        opts,
    )
    .unwrap();
    assert_eq!(d.formula, expected);
    assert_eq!(d.e.arity(), 2);

    let a = build_definability_formula(&all_form()).unwrap();
    assert_eq!(a.formula, p("fo:F(x1) & FF <|> fo:E(x1) & TT"));
    let full = Relation::full(2, 1).unwrap();
    assert!(a.e.holds(&full));
    assert!(!a.e.holds(&Relation::from_mask(2, 1, 1).unwrap()));
    assert!(!a.f.holds(&full));
}

#[test]
fn definability_file() {
    let form = load_definability_form(
        "# constancy\narity 1\nparams 1\npsi+ TT\ntheta x1 = z1\n",
    )
    .unwrap();
    assert_eq!(form, const_form());
    assert!(load_definability_form("arity 1\nparams 0\npsi+ A y ~Q(y)\ntheta TT").is_err());
    assert!(load_definability_form("arity 1\nparams 0\npsi+ TT\n").is_err());
    assert!(load_definability_form("arity 1\nparams 0\npsi+ TT\ntheta R(x1)").is_err());
    assert!(matches!(
        load_definability_form("arity x\nparams 0\npsi+ TT\ntheta TT"),
        Err(Error::Syntax { .. })
    ));
}
