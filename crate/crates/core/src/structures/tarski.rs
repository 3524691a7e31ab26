use super::{Assignment, Structure};
use crate::error::{Error, Result};
use crate::syntax::{Formula, Var};

/// Classical satisfaction of a first-order formula at a single assignment.
///
/// `Bottom` is false everywhere and `Top` true everywhere.
pub fn tarski_eval(structure: &Structure, assignment: &Assignment, formula: &Formula) -> Result<bool> {
    if !formula.is_first_order() {
        return Err(Error::NotFlat(formula.to_string()));
    }
    let mut s = assignment.clone();
    eval(structure, &mut s, formula)
}

fn value(s: &Assignment, v: &Var) -> Result<usize> {
    s.get(v).ok_or_else(|| Error::Unbound(v.clone()))
}

fn eval(m: &Structure, s: &mut Assignment, f: &Formula) -> Result<bool> {
    Ok(match f {
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Rel {
            symbol,
            args,
            positive,
        } => {
            let rel = m
                .relation(symbol)
                .ok_or_else(|| Error::UnknownRelation(symbol.clone()))?;
            if rel.arity() != args.len() {
                return Err(Error::Arity {
                    name: symbol.clone(),
                    expected: rel.arity(),
                    found: args.len(),
                });
            }
            let tuple = args.iter().map(|v| value(s, v)).collect::<Result<Vec<_>>>()?;
            rel.contains(&tuple) == *positive
        }
        Formula::Eq {
            left,
            right,
            positive,
        } => (value(s, left)? == value(s, right)?) == *positive,
        Formula::And(a, b) => eval(m, s, a)? && eval(m, s, b)?,
        Formula::Or(a, b) => eval(m, s, a)? || eval(m, s, b)?,
        Formula::Exists(v, b) | Formula::Forall(v, b) => {
            let universal = matches!(f, Formula::Forall(..));
            let saved = s.get(v);
            let mut result = universal;
            for e in 0..m.size() {
                s.set(v.clone(), e);
                if eval(m, s, b)? != universal {
                    result = !universal;
                    break;
                }
            }
            match saved {
                Some(e) => s.set(v.clone(), e),
                None => s.remove(v),
            }
            result
        }
        Formula::Atom(_) | Formula::GlobalOr(..) | Formula::Possibly(_) => {
            return Err(Error::NotFlat(f.to_string()))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Relation;
    use crate::syntax::parse;

    #[test]
    fn membership_and_quantifiers() {
        let m = Structure::new(2)
            .unwrap()
            .with_relation("R", Relation::from_tuples(2, 2, [[0, 1]]).unwrap())
            .unwrap();
        let s = Assignment::new().with("x", 0).with("y", 1);
        assert!(tarski_eval(&m, &s, &parse("R(x,y)").unwrap()).unwrap());

        let m3 = Structure::new(3).unwrap();
        assert!(tarski_eval(&m3, &Assignment::new(), &parse("A x E y x != y").unwrap()).unwrap());

        let m = Structure::new(2)
            .unwrap()
            .with_relation("R", Relation::from_tuples(2, 1, [[0]]).unwrap())
            .unwrap();
        assert!(!tarski_eval(&m, &Assignment::new(), &parse("A x R(x)").unwrap()).unwrap());
    }

    #[test]
    fn errors() {
        let m = Structure::new(2).unwrap();
        assert!(matches!(
            tarski_eval(&m, &Assignment::new(), &parse("const(x)").unwrap()),
            Err(Error::NotFlat(_))
        ));
        assert_eq!(
            tarski_eval(&m, &Assignment::new(), &parse("x = x").unwrap()),
            Err(Error::Unbound("x".into()))
        );
        assert!(matches!(
            tarski_eval(&m, &Assignment::new().with("x", 0), &parse("P(x)").unwrap()),
            Err(Error::UnknownRelation(_))
        ));
    }

    #[test]
    fn quantifier_restores_outer_binding() {
        let m = Structure::new(2).unwrap();
        let s = Assignment::new().with("x", 0).with("y", 0);
        let f = parse("(E x x != y) & x = y").unwrap();
        assert!(tarski_eval(&m, &s, &f).unwrap());
    }
}
