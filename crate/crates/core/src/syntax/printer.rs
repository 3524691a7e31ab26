use std::fmt;

use super::ast::{DependencyAtom, Formula};

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::GlobalOr(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        _ => 4,
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, child: &Formula, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

fn write_binary(
    f: &mut fmt::Formatter<'_>,
    parent: &Formula,
    op: &str,
    left: &Formula,
    right: &Formula,
) -> fmt::Result {
    let p = precedence(parent);
    write_operand(f, left, precedence(left) < p)?;
    write!(f, " {op} ")?;
    write_operand(f, right, precedence(right) <= p)
}

fn write_vars(f: &mut fmt::Formatter<'_>, vars: &[super::Var]) -> fmt::Result {
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

impl fmt::Display for DependencyAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(p) = &self.relativizer {
            write!(f, "^{p}")?;
        }
        f.write_str("(")?;
        for (i, g) in self.groups.iter().enumerate() {
            if i > 0 {
                f.write_str(" ;")?;
                if !g.is_empty() {
                    f.write_str(" ")?;
                }
            }
            write_vars(f, g)?;
        }
        f.write_str(")")
    }
}

/// Prints in the parser's surface syntax with minimal parentheses, so that
/// `parse(&f.to_string()) == f`.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top => f.write_str("TT"),
            Formula::Bottom => f.write_str("FF"),
            Formula::Rel {
                symbol,
                args,
                positive,
            } => {
                if !positive {
                    f.write_str("~")?;
                }
                write!(f, "{symbol}(")?;
                write_vars(f, args)?;
                f.write_str(")")
            }
            Formula::Eq {
                left,
                right,
                positive,
            } => write!(f, "{left} {} {right}", if *positive { "=" } else { "!=" }),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(a, b) => write_binary(f, self, "&", a, b),
            Formula::Or(a, b) => write_binary(f, self, "|", a, b),
            Formula::GlobalOr(a, b) => write_binary(f, self, "<|>", a, b),
            Formula::Exists(v, b) => {
                write!(f, "E {v} ")?;
                write_operand(f, b, precedence(b) < 4)
            }
            Formula::Forall(v, b) => {
                write!(f, "A {v} ")?;
                write_operand(f, b, precedence(b) < 4)
            }
            Formula::Possibly(b) => {
                f.write_str("<> ")?;
                write_operand(f, b, precedence(b) < 4)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::parse;

    #[test]
    fn minimal_parentheses() {
        for text in [
            "E x A y (x = y | x != y)",
            "P(x) | Q(x) & R(x)",
            "(P(x) | Q(x)) & R(x)",
            "P(x) | (Q(x) | R(x))",
            "P(x) <|> Q(x) <|> R(x)",
            "P(x) <|> (Q(x) <|> R(x))",
            "<> (const(x) | ~P(x))",
            "dep(x,y ; z) & indep(x ; ; z) & inc(x ; y)",
            "const^P(x) | fo:mine^Q(x,y)",
            "FF <|> all(v)",
            "E x E y E z lo2(x,y,z)",
            "A x TT",
            "dep( ; z)",
        ] {
            assert_eq!(parse(text).unwrap().to_string(), text);
        }
    }
}
