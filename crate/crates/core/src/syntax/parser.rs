//! Recursive-descent parser for the ASCII formula language.
//!
//! ```text
//! gor     := or ("<|>" or)*
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "E" var unary | "A" var unary | "<>" unary | "~" unary | primary
//! primary := "(" gor ")" | "TT" | "FF" | Rel "(" vars ")"
//!          | dep ["^" Rel] "(" vars (";" vars)* ")" | var ("=" | "!=") var
//! ```

use super::ast::{DependencyAtom, Formula, Var};
use crate::dependencies::{self, Registry};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions<'a> {
    /// Accept `_`-prefixed variables, which are otherwise reserved for the
    /// rewriter.
    pub allow_reserved: bool,
    /// When present, every dependency atom must resolve in this registry.
    /// Otherwise only built-in names are checked and `fo:` names pass.
    pub registry: Option<&'a Registry>,
}

pub fn parse(text: &str) -> Result<Formula> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, options: ParseOptions<'_>) -> Result<Formula> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        options,
        end: text.len(),
    };
    let f = p.global_or()?;
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(p.error_at(t.offset, format!("unexpected {}", t.kind)));
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Kind {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Amp,
    Bar,
    GlobalOr,
    Diamond,
    Tilde,
    Eq,
    Neq,
    Caret,
    Colon,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Kind::Ident(name) => return write!(f, "`{name}`"),
            Kind::LParen => "`(`",
            Kind::RParen => "`)`",
            Kind::Comma => "`,`",
            Kind::Semi => "`;`",
            Kind::Amp => "`&`",
            Kind::Bar => "`|`",
            Kind::GlobalOr => "`<|>`",
            Kind::Diamond => "`<>`",
            Kind::Tilde => "`~`",
            Kind::Eq => "`=`",
            Kind::Neq => "`!=`",
            Kind::Caret => "`^`",
            Kind::Colon => "`:`",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_alphanumeric() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: Kind::Ident(text[start..i].to_string()),
                offset: start,
            });
            continue;
        } else if text[i..].starts_with("<|>") {
            i += 3;
            Kind::GlobalOr
        } else if text[i..].starts_with("<>") {
            i += 2;
            Kind::Diamond
        } else if text[i..].starts_with("!=") {
            i += 2;
            Kind::Neq
        } else {
            i += 1;
            match c {
                b'(' => Kind::LParen,
                b')' => Kind::RParen,
                b',' => Kind::Comma,
                b';' => Kind::Semi,
                b'&' => Kind::Amp,
                b'|' => Kind::Bar,
                b'~' => Kind::Tilde,
                b'=' => Kind::Eq,
                b'^' => Kind::Caret,
                b':' => Kind::Colon,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    return Err(Error::syntax(
                        column(start),
                        format!("unexpected character `{ch}`"),
                    ));
                }
            }
        };
        out.push(Token {
            kind,
            offset: start,
        });
    }
    Ok(out)
}

fn column(offset: usize) -> String {
    format!("column {}", offset + 1)
}

fn is_var_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_lowercase() || c == '_')
}

fn is_symbol_name(s: &str) -> bool {
    s.starts_with(|c: char| c.is_ascii_uppercase())
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    options: ParseOptions<'a>,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Kind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, ahead: usize) -> Option<&Kind> {
        self.tokens.get(self.pos + ahead).map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.offset)
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::syntax(column(offset), message)
    }

    fn error_here(&self, expected: &str) -> Error {
        match self.tokens.get(self.pos) {
            Some(t) => self.error_at(t.offset, format!("expected {expected}, found {}", t.kind)),
            None => self.error_at(self.end, format!("expected {expected}, found end of input")),
        }
    }

    fn eat(&mut self, kind: &Kind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: Kind) -> Result<()> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error_here(&kind.to_string()))
        }
    }

    fn global_or(&mut self) -> Result<Formula> {
        let mut f = self.or()?;
        while self.eat(&Kind::GlobalOr) {
            f = Formula::global_or(f, self.or()?);
        }
        Ok(f)
    }

    fn or(&mut self) -> Result<Formula> {
        let mut f = self.and()?;
        while self.eat(&Kind::Bar) {
            f = Formula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.eat(&Kind::Amp) {
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some(Kind::Ident(q)) if (q == "E" || q == "A") && self.quantified_var_follows() => {
                let universal = q == "A";
                self.pos += 1;
                let v = self.var()?;
                let body = self.unary()?;
                Ok(if universal {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                })
            }
            Some(Kind::Diamond) => {
                self.pos += 1;
                Ok(Formula::possibly(self.unary()?))
            }
            Some(Kind::Tilde) => {
                self.pos += 1;
                negate(self.unary()?)
            }
            _ => self.primary(),
        }
    }

    fn quantified_var_follows(&self) -> bool {
        matches!(self.peek_at(1), Some(Kind::Ident(v)) if is_var_name(v))
    }

    fn var(&mut self) -> Result<Var> {
        match self.tokens.get(self.pos) {
            Some(Token {
                kind: Kind::Ident(name),
                offset,
            }) if is_var_name(name) => {
                if name.starts_with('_') && !self.options.allow_reserved {
                    return Err(self.error_at(
                        *offset,
                        format!("variable `{name}` uses the reserved `_` prefix"),
                    ));
                }
                let v = Var::new(name.clone());
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error_here("a variable")),
        }
    }

    fn var_list(&mut self, close: &[Kind]) -> Result<Vec<Var>> {
        let mut vars = Vec::new();
        if self.peek().is_some_and(|k| close.contains(k)) {
            return Ok(vars);
        }
        loop {
            vars.push(self.var()?);
            if !self.eat(&Kind::Comma) {
                return Ok(vars);
            }
        }
    }

    fn primary(&mut self) -> Result<Formula> {
        let start = self.offset();
        let name = match self.peek() {
            Some(Kind::LParen) => {
                self.pos += 1;
                let f = self.global_or()?;
                self.expect(Kind::RParen)?;
                return Ok(f);
            }
            Some(Kind::Ident(name)) => name.clone(),
            _ => return Err(self.error_here("a formula")),
        };
        match name.as_str() {
            "TT" => {
                self.pos += 1;
                return Ok(Formula::Top);
            }
            "FF" => {
                self.pos += 1;
                return Ok(Formula::Bottom);
            }
            _ => {}
        }
        if is_symbol_name(&name) {
            self.pos += 1;
            self.expect(Kind::LParen)?;
            let args = self.var_list(&[Kind::RParen])?;
            self.expect(Kind::RParen)?;
            if args.is_empty() {
                return Err(self.error_at(start, format!("relation `{name}` needs arguments")));
            }
            return Ok(Formula::rel(name, args));
        }
        match self.peek_at(1) {
            Some(Kind::Eq | Kind::Neq) => {
                let left = self.var()?;
                let positive = self.peek() == Some(&Kind::Eq);
                self.pos += 1;
                let right = self.var()?;
                Ok(Formula::Eq {
                    left,
                    right,
                    positive,
                })
            }
            Some(Kind::LParen | Kind::Caret | Kind::Colon) => self.atom(start),
            _ => {
                self.pos += 1;
                Err(self.error_here("`=`, `!=` or `(`"))
            }
        }
    }

    fn atom(&mut self, start: usize) -> Result<Formula> {
        let Some(Kind::Ident(mut name)) = self.peek().cloned() else {
            return Err(self.error_here("a dependency name"));
        };
        self.pos += 1;
        if self.eat(&Kind::Colon) {
            if name != "fo" {
                return Err(self.error_at(start, format!("unknown prefix `{name}:`")));
            }
            match self.peek().cloned() {
                Some(Kind::Ident(rest)) => {
                    self.pos += 1;
                    name = format!("fo:{rest}");
                }
                _ => return Err(self.error_here("a dependency name after `fo:`")),
            }
        }
        let relativizer = if self.eat(&Kind::Caret) {
            match self.peek().cloned() {
                Some(Kind::Ident(p)) if is_symbol_name(&p) => {
                    self.pos += 1;
                    Some(p)
                }
                _ => return Err(self.error_here("a relativizing predicate")),
            }
        } else {
            None
        };
        self.expect(Kind::LParen)?;
        let mut groups = vec![self.var_list(&[Kind::RParen, Kind::Semi])?];
        while self.eat(&Kind::Semi) {
            groups.push(self.var_list(&[Kind::RParen, Kind::Semi])?);
        }
        self.expect(Kind::RParen)?;
        let atom = DependencyAtom {
            name,
            relativizer,
            groups,
        };
        let checked = match self.options.registry {
            Some(registry) => registry.resolve(&atom.name, &atom.shape()).map(drop),
            None if atom.name.starts_with("fo:") => Ok(()),
            None => dependencies::check_builtin_shape(&atom.name, &atom.shape()),
        };
        checked.map_err(|e| match e {
            Error::UnknownDependency(_) | Error::Arity { .. } | Error::UnsupportedShape(_) => {
                self.error_at(start, e.to_string())
            }
            other => other,
        })?;
        Ok(Formula::Atom(atom))
    }
}

/// Classical negation of a first-order formula, pushed to the literals.
pub fn negate(formula: Formula) -> Result<Formula> {
    Ok(match formula {
        Formula::Top => Formula::Bottom,
        Formula::Bottom => Formula::Top,
        Formula::Rel {
            symbol,
            args,
            positive,
        } => Formula::Rel {
            symbol,
            args,
            positive: !positive,
        },
        Formula::Eq {
            left,
            right,
            positive,
        } => Formula::Eq {
            left,
            right,
            positive: !positive,
        },
        Formula::And(a, b) => Formula::or(negate(*a)?, negate(*b)?),
        Formula::Or(a, b) => Formula::and(negate(*a)?, negate(*b)?),
        Formula::Exists(v, b) => Formula::forall(v, negate(*b)?),
        Formula::Forall(v, b) => Formula::exists(v, negate(*b)?),
        Formula::Atom(_) => return Err(Error::NotNnf("dependency atom")),
        Formula::GlobalOr(..) => return Err(Error::NotNnf("global disjunction")),
        Formula::Possibly(_) => return Err(Error::NotNnf("possibility operator")),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
    }

    #[test]
    fn quantifiers_bind_their_immediate_operand() {
        assert_eq!(
            p("E x A y (x = y | x != y)"),
            Formula::exists(
                "x",
                Formula::forall("y", Formula::or(Formula::eq("x", "y"), Formula::neq("x", "y")))
            )
        );
        assert_eq!(
            p("E x P(x) & Q(x)"),
            Formula::and(
                Formula::exists("x", Formula::rel("P", ["x"])),
                Formula::rel("Q", ["x"])
            )
        );
    }

    #[test]
    fn negation_is_pushed_inward() {
        assert_eq!(
            p("~(R(x) & x = y)"),
            Formula::or(Formula::not_rel("R", ["x"]), Formula::neq("x", "y"))
        );
        assert_eq!(p("~TT"), Formula::Bottom);
        assert_eq!(p("~~P(x)"), Formula::rel("P", ["x"]));
        assert_eq!(
            p("~E x A y R(x,y)"),
            Formula::forall("x", Formula::exists("y", Formula::not_rel("R", ["x", "y"])))
        );
    }

    #[test]
    fn negation_over_non_flat_is_rejected() {
        for (text, what) in [
            ("~const(x)", "dependency atom"),
            ("~(P(x) <|> P(y))", "global disjunction"),
            ("~<> P(x)", "possibility operator"),
            ("~(P(x) & const(x))", "dependency atom"),
        ] {
            assert_eq!(parse(text).unwrap_err(), Error::NotNnf(what));
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let (a, b, c) = (
            Formula::rel("P", ["x"]),
            Formula::rel("Q", ["x"]),
            Formula::rel("R", ["x"]),
        );
        assert_eq!(
            p("P(x) | Q(x) & R(x)"),
            Formula::or(a.clone(), Formula::and(b.clone(), c.clone()))
        );
        assert_eq!(
            p("P(x) <|> Q(x) | R(x)"),
            Formula::global_or(a.clone(), Formula::or(b.clone(), c.clone()))
        );
        assert_eq!(
            p("P(x) & Q(x) & R(x)"),
            Formula::and(Formula::and(a.clone(), b.clone()), c.clone())
        );
        assert_eq!(
            p("P(x) <|> Q(x) <|> R(x)"),
            Formula::global_or(Formula::global_or(a.clone(), b.clone()), c.clone())
        );
        assert_eq!(
            p("<> P(x) | Q(x)"),
            Formula::or(Formula::possibly(a), b)
        );
    }

    #[test]
    fn atoms_with_groups() {
        let f = p("dep(x,y ; z)");
        assert_eq!(
            f,
            Formula::Atom(DependencyAtom::new(
                "dep",
                vec![vec!["x".into(), "y".into()], vec!["z".into()]]
            ))
        );
        let f = p("indep(x ; ; z)");
        let Formula::Atom(a) = f else { panic!() };
        assert_eq!(a.shape(), [1, 0, 1]);
        let Formula::Atom(a) = p("const^P(x)") else { panic!() };
        assert_eq!(a.relativizer.as_deref(), Some("P"));
        let Formula::Atom(a) = p("fo:mine(x, y)") else { panic!() };
        assert_eq!(a.name, "fo:mine");
        assert_eq!(p("const(x, x)"), Formula::atom("const", ["x", "x"]));
        let Formula::Atom(a) = p("fo:mine^P(x)") else { panic!() };
        assert_eq!(a.relativizer.as_deref(), Some("P"));
    }

    #[test]
    fn constants_and_literals() {
        assert_eq!(p("TT"), Formula::Top);
        assert_eq!(p("FF <|> all(v)"), Formula::global_or(Formula::Bottom, Formula::atom("all", ["v"])));
        assert_eq!(p("~R(x,y)"), Formula::not_rel("R", ["x", "y"]));
        assert_eq!(p("x != y"), Formula::neq("x", "y"));
        assert_eq!(p("E(x)"), Formula::rel("E", ["x"]));
        assert_eq!(p("E x E(x)"), Formula::exists("x", Formula::rel("E", ["x"])));
        assert_eq!(p("A x (x = x)"), Formula::forall("x", Formula::eq("x", "x")));
    }

    #[test]
    fn errors_report_positions() {
        match parse("P(x) & ").unwrap_err() {
            Error::Syntax { location, .. } => assert_eq!(location, "column 8"),
            other => panic!("{other:?}"),
        }
        match parse("P(x) $ Q(x)").unwrap_err() {
            Error::Syntax { location, .. } => assert_eq!(location, "column 6"),
            other => panic!("{other:?}"),
        }
        assert!(parse("(P(x)").is_err());
        assert!(parse("P()").is_err());
        assert!(parse("x").is_err());
        assert!(parse("P(x) Q(x)").is_err());
    }

    #[test]
    fn unknown_dependencies_and_bad_shapes() {
        assert!(parse("nosuch(x)").is_err());
        assert!(parse("lo2(x, y)").is_err());
        assert!(parse("inc(x ; y, z)").is_err());
        assert!(parse("dep(x ; )").is_err());
        assert!(parse("const()").is_err());
    }

    #[test]
    fn reserved_variables() {
        assert!(parse("_p0 = x").is_err());
        let opts = ParseOptions {
            allow_reserved: true,
            ..Default::default()
        };
        assert_eq!(parse_with("_p0 = x", opts).unwrap(), Formula::eq("_p0", "x"));
    }
}
