use proptest::prelude::*;

use teamcheck::eval::{EvalConfig, Evaluator};
use teamcheck::rewrite::{encode_global_disjunction, pull_global_disjunction, pull_measure, pull_step};
use teamcheck::structures::{load_structure, print_structure};
use teamcheck::syntax::{free_variables, negate, parse, parse_with, Formula, ParseOptions};
use teamcheck::teams::{load_team, print_team};
use teamcheck::verify::{random_formula, random_structure, random_team, signature_of, Profile};
use teamcheck::Registry;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rich_profile() -> Profile {
    Profile::default()
        .with_depth(4)
        .with_relations(&[("P", 1), ("R", 2)])
        .with_atoms(&["const", "dep", "indep", "inc", "ninc", "ne", "all", "u", "neq1", "lo2"])
        .with_relativizers(&["P"])
        .with_global_or(2)
        .with_possibly(true)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printed_formulas_parse_back(seed in any::<u64>()) {
        let f = random_formula(seed, &rich_profile());
        let again = parse(&f.to_string()).unwrap();
        prop_assert_eq!(again, f);
    }

    #[test]
    fn first_order_negation_is_involutive(seed in any::<u64>()) {
        let f = random_formula(seed, &Profile::first_order().with_depth(4));
        prop_assert_eq!(negate(negate(f.clone()).unwrap()).unwrap(), f);
    }

    #[test]
    fn structure_and_team_files_round_trip(seed in any::<u64>(), n in 2usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(seed, &rich_profile().with_vars(&["x", "y", "z"]));
        let s = random_structure(&mut rng, &signature_of([&f]).unwrap(), n).unwrap();
        prop_assert_eq!(&load_structure(&print_structure(&s)).unwrap(), &s);
        let vars: Vec<_> = free_variables(&f).into_iter().collect();
        let t = random_team(&mut rng, &vars, n, 6).unwrap();
        prop_assert_eq!(load_team(&print_team(&t, &s), &s).unwrap(), t);
    }

    #[test]
    fn pull_steps_decrease_the_measure(seed in any::<u64>()) {
        let profile = rich_profile().with_possibly(false).with_global_or(3);
        let mut f = random_formula(seed, &profile);
        let budget = f.count_global_or();
        while let Some(next) = pull_step(&f) {
            prop_assert!(pull_measure(&next) < pull_measure(&f));
            f = next;
        }
        let list = pull_global_disjunction(&random_formula(seed, &profile)).unwrap();
        prop_assert!(list.len() <= 1 << budget);
        prop_assert!(list.disjuncts().iter().all(|d| !d.has_global_or()));
    }

    #[test]
    fn encoding_removes_global_disjunction(seed in any::<u64>()) {
        let f = random_formula(seed, &rich_profile());
        let encoded = encode_global_disjunction(&f);
        prop_assert!(!encoded.has_global_or());
        prop_assert_eq!(free_variables(&encoded), free_variables(&f));
        let opts = ParseOptions { allow_reserved: true, ..Default::default() };
        prop_assert_eq!(parse_with(&encoded.to_string(), opts).unwrap(), encoded);
    }

    #[test]
    fn unused_columns_do_not_change_verdicts(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(seed, &rich_profile());
        let s = random_structure(&mut rng, &signature_of([&f]).unwrap(), 2).unwrap();
        let mut vars: Vec<_> = free_variables(&f).into_iter().collect();
        let t = random_team(&mut rng, &vars, 2, 3).unwrap();
        let cfg = EvalConfig::optimized();
        let registry = Registry::standard();
        let base = Evaluator::new(&s, &f, &registry, &cfg).unwrap().eval(&t).unwrap();
        // Adding a column that the formula never mentions duplicates rows
        // without changing the projection.
        vars.push("unused".into());
        let wide = t.duplicate(&["unused".into()]).unwrap();
        prop_assert_eq!(wide.domain(), &vars[..]);
        let again = Evaluator::new(&s, &f, &registry, &cfg).unwrap().eval(&wide).unwrap();
        prop_assert_eq!(base, again);
    }
}

#[test]
fn formula_shapes_are_closed_under_printing() {
    for text in ["TT", "FF", "~R(x,y) | x != y", "<> (const^P(x) <|> dep(x ; y))", "A x E y indep(x ; ; y)"] {
        let f: Formula = parse(text).unwrap();
        assert_eq!(parse(&f.to_string()).unwrap(), f, "{text}");
    }
}
