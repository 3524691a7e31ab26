//! The line-oriented model file:
//!
//! ```text
//! # comment
//! universe = 3            # or: universe = a,b,c
//! rel R/2 = {(0,1), (1,2)}
//! rel P/1 = {0, 2}
//! ```

use std::fmt::Write as _;

use super::{Relation, Structure};
use crate::error::{Error, Result};

pub fn load_structure(text: &str) -> Result<Structure> {
    load_structure_with(text, false)
}

/// Like [`load_structure`], optionally accepting universes of size one.
pub fn load_structure_with(text: &str, allow_small: bool) -> Result<Structure> {
    let mut structure: Option<Structure> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let loc = format!("line {}", lineno + 1);
        let (head, rhs) = line
            .split_once('=')
            .ok_or_else(|| Error::syntax(&loc, "expected `=`"))?;
        let head = head.trim();
        let rhs = rhs.trim();
        match structure.as_mut() {
            None => {
                if head != "universe" {
                    return Err(Error::syntax(&loc, "first line must declare the universe"));
                }
                structure = Some(parse_universe(rhs, allow_small, &loc)?);
            }
            Some(s) => {
                if head == "universe" {
                    return Err(Error::syntax(&loc, "universe declared twice"));
                }
                let decl = head
                    .strip_prefix("rel")
                    .filter(|d| d.starts_with(char::is_whitespace))
                    .ok_or_else(|| Error::syntax(&loc, "expected `rel <Name>/<arity>`"))?
                    .trim();
                let (name, arity) = decl
                    .split_once('/')
                    .ok_or_else(|| Error::syntax(&loc, "expected `<Name>/<arity>`"))?;
                let name = name.trim();
                if !is_symbol(name) {
                    return Err(Error::syntax(&loc, format!("bad relation name `{name}`")));
                }
                let arity: usize = arity
                    .trim()
                    .parse()
                    .map_err(|_| Error::syntax(&loc, "arity must be a number"))?;
                if arity == 0 {
                    return Err(Error::Signature(format!("0-ary relation `{name}`")));
                }
                if s.relation(name).is_some() {
                    return Err(Error::syntax(&loc, format!("relation `{name}` declared twice")));
                }
                let rel = parse_relation(s, arity, rhs, &loc)?;
                s.insert_relation(name, rel)?;
            }
        }
    }
    structure.ok_or_else(|| Error::syntax("end of input", "missing universe declaration"))
}

fn strip_comment(line: &str) -> &str {
    line.split_once('#').map_or(line, |(before, _)| before)
}

fn is_symbol(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_universe(rhs: &str, allow_small: bool, loc: &str) -> Result<Structure> {
    let make = |n| {
        if allow_small {
            Structure::with_small_universe(n)
        } else {
            Structure::new(n)
        }
    };
    if !rhs.contains(',') {
        if let Ok(n) = rhs.parse::<usize>() {
            return make(n);
        }
    }
    let labels: Vec<String> = rhs.split(',').map(|l| l.trim().to_string()).collect();
    if let Some(bad) = labels.iter().find(|l| {
        l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
    }) {
        return Err(Error::syntax(loc, format!("bad element label `{bad}`")));
    }
    make(labels.len())?.with_labels(labels)
}

fn parse_relation(s: &Structure, arity: usize, rhs: &str, loc: &str) -> Result<Relation> {
    let body = rhs
        .strip_prefix('{')
        .and_then(|r| r.strip_suffix('}'))
        .ok_or_else(|| Error::syntax(loc, "relation body must be enclosed in `{}`"))?
        .trim();
    let mut rel = Relation::empty(s.size(), arity)?;
    let mut rest = body;
    while !rest.is_empty() {
        let tuple_text;
        if let Some(r) = rest.strip_prefix('(') {
            let close = r
                .find(')')
                .ok_or_else(|| Error::syntax(loc, "unclosed tuple"))?;
            tuple_text = &r[..close];
            rest = r[close + 1..].trim_start();
        } else {
            let end = rest.find(',').unwrap_or(rest.len());
            tuple_text = &rest[..end];
            rest = &rest[end..];
        }
        let tuple = tuple_text
            .split(',')
            .map(|e| parse_element(s, e.trim(), loc))
            .collect::<Result<Vec<_>>>()?;
        if tuple.len() != arity {
            return Err(Error::Arity {
                name: format!("tuple ({tuple_text}) at {loc}"),
                expected: arity,
                found: tuple.len(),
            });
        }
        rel.insert(&tuple);
        rest = match rest.strip_prefix(',') {
            Some(r) => {
                let r = r.trim_start();
                if r.is_empty() {
                    return Err(Error::syntax(loc, "trailing comma"));
                }
                r
            }
            None if rest.is_empty() => rest,
            None => return Err(Error::syntax(loc, "expected `,` between tuples")),
        };
    }
    Ok(rel)
}

pub(crate) fn parse_element(s: &Structure, text: &str, loc: &str) -> Result<usize> {
    if text.is_empty() {
        return Err(Error::syntax(loc, "empty element"));
    }
    if s.labels().is_none() {
        let e: usize = text
            .parse()
            .map_err(|_| Error::syntax(loc, format!("bad element `{text}`")))?;
        if e >= s.size() {
            return Err(Error::ElementRange {
                element: e,
                size: s.size(),
            });
        }
        return Ok(e);
    }
    s.element(text)
        .ok_or_else(|| Error::syntax(loc, format!("unknown element `{text}`")))
}

/// Canonical model file text; `load_structure` inverts it.
pub fn print_structure(s: &Structure) -> String {
    let mut out = String::new();
    match s.labels() {
        Some(labels) => writeln!(out, "universe = {}", labels.join(",")),
        None => writeln!(out, "universe = {}", s.size()),
    }
    .unwrap();
    for (name, rel) in s.relations() {
        write!(out, "rel {name}/{} = {{", rel.arity()).unwrap();
        for (i, t) in rel.tuples().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let items: Vec<String> = t.iter().map(|&e| s.label(e)).collect();
            if rel.arity() == 1 {
                out.push_str(&items[0]);
            } else {
                write!(out, "({})", items.join(",")).unwrap();
            }
        }
        out.push_str("}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_universe() {
        let s = load_structure("universe = 2\nrel R/2 = {(0,1)}").unwrap();
        assert_eq!(s.size(), 2);
        let r = s.relation("R").unwrap();
        assert_eq!(r.len(), 1);
        assert!(r.contains(&[0, 1]));
    }

    #[test]
    fn labelled_universe() {
        let s = load_structure("universe = a,b,c\nrel P/1 = {a}").unwrap();
        assert_eq!(s.size(), 3);
        assert_eq!(s.relation("P").unwrap().tuples().collect::<Vec<_>>(), [[0]]);
        assert_eq!(s.label(2), "c");
    }

    #[test]
    fn element_out_of_range() {
        let err = load_structure("universe = 2\nrel R/2 = {(0,5)}").unwrap_err();
        assert_eq!(err, Error::ElementRange { element: 5, size: 2 });
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = load_structure("# header\nuniverse = 2\n\nrel R/2 {(0,1)}").unwrap_err();
        match err {
            Error::Syntax { location, .. } => assert_eq!(location, "line 4"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(load_structure("rel R/1 = {}").is_err());
        assert!(matches!(
            load_structure("universe = 2\nrel R/2 = {(0,1,1)}").unwrap_err(),
            Error::Arity { .. }
        ));
        assert!(load_structure("universe = 2\nrel R/0 = {}").is_err());
    }

    #[test]
    fn comments_blank_lines_and_empty_relations() {
        let s = load_structure("\n# c\nuniverse = 3 # three\n\nrel E/2 = {}\nrel P/1 = {0, 2}\n")
            .unwrap();
        assert!(s.relation("E").unwrap().is_empty());
        assert_eq!(s.relation("P").unwrap().len(), 2);
    }

    #[test]
    fn small_universe_override() {
        assert_eq!(load_structure("universe = 1").unwrap_err(), Error::SmallUniverse(1));
        assert_eq!(load_structure_with("universe = 1", true).unwrap().size(), 1);
    }

    #[test]
    fn canonical_round_trip() {
        for text in [
            "universe = 3\nrel P/1 = {0, 2}\nrel R/2 = {(0,1), (2,2)}\n",
            "universe = a,b\nrel P/1 = {b}\nrel T/3 = {(a,a,b)}\n",
            "universe = 2\n",
        ] {
            let s = load_structure(text).unwrap();
            assert_eq!(print_structure(&s), text);
            assert_eq!(load_structure(&print_structure(&s)).unwrap(), s);
        }
    }
}
