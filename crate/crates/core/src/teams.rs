//! Teams and the team-building operations used by the satisfaction rules.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::structures::{self, Assignment, Element, Relation, Structure};
use crate::syntax::Var;

/// A set of assignments over a common, ordered domain.
///
/// Rows are stored as a relation of arity `|domain|`, so duplicates merge and
/// iteration order is the lexicographic order of rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Team {
    domain: Vec<Var>,
    rows: Relation,
}

fn check_distinct(vars: &[Var]) -> Result<()> {
    if let Some(v) = vars.iter().duplicates().next() {
        return Err(Error::Team(format!("variable `{v}` repeated")));
    }
    Ok(())
}

impl Team {
    pub fn new<I, R>(domain: Vec<Var>, universe: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[Element]>,
    {
        check_distinct(&domain)?;
        let rows = Relation::from_tuples(universe, domain.len(), rows)?;
        Ok(Team { domain, rows })
    }

    pub fn empty(domain: Vec<Var>, universe: usize) -> Result<Self> {
        Team::new(domain, universe, std::iter::empty::<Vec<Element>>())
    }

    /// The team `{ε}`: empty domain, one (empty) row.
    pub fn unit(universe: usize) -> Self {
        Team {
            domain: Vec::new(),
            rows: Relation::full(universe, 0).expect("a single point"),
        }
    }

    /// Every assignment of `domain` into the universe.
    pub fn full(domain: Vec<Var>, universe: usize) -> Result<Self> {
        check_distinct(&domain)?;
        let rows = Relation::full(universe, domain.len())?;
        Ok(Team { domain, rows })
    }

    pub fn from_relation(domain: Vec<Var>, rows: Relation) -> Result<Self> {
        check_distinct(&domain)?;
        if rows.arity() != domain.len() {
            return Err(Error::Arity {
                name: "team rows".into(),
                expected: domain.len(),
                found: rows.arity(),
            });
        }
        Ok(Team { domain, rows })
    }

    pub fn from_assignments(domain: Vec<Var>, universe: usize, rows: &[Assignment]) -> Result<Self> {
        let tuples = rows
            .iter()
            .map(|s| {
                if s.domain().count() != domain.len() {
                    return Err(Error::Team("assignment domain differs from team domain".into()));
                }
                domain
                    .iter()
                    .map(|v| s.get(v).ok_or_else(|| Error::Unbound(v.clone())))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Team::new(domain, universe, tuples)
    }

    pub fn domain(&self) -> &[Var] {
        &self.domain
    }

    pub fn universe(&self) -> usize {
        self.rows.universe()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// The rows as a relation over the domain order.
    pub fn as_relation(&self) -> &Relation {
        &self.rows
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<Element>> + '_ {
        self.rows.tuples()
    }

    pub fn assignments(&self) -> impl Iterator<Item = Assignment> + '_ {
        self.rows()
            .map(|row| self.domain.iter().cloned().zip(row).collect())
    }

    pub fn contains_row(&self, row: &[Element]) -> bool {
        row.len() == self.domain.len() && self.rows.contains(row)
    }

    fn position(&self, v: &Var) -> Result<usize> {
        self.domain
            .iter()
            .position(|d| d == v)
            .ok_or_else(|| Error::Unbound(v.clone()))
    }

    fn positions(&self, vars: &[Var]) -> Result<Vec<usize>> {
        vars.iter().map(|v| self.position(v)).collect()
    }

    /// `X(v̄) = {(s(v₁), …, s(v_k)) : s ∈ X}`; variables may repeat.
    pub fn relation_of(&self, vars: &[Var]) -> Result<Relation> {
        Ok(self.rows.select(&self.positions(vars)?))
    }

    /// Restriction of every row to `vars` (which must be distinct).
    pub fn restrict(&self, vars: &[Var]) -> Result<Team> {
        check_distinct(vars)?;
        Ok(Team {
            domain: vars.to_vec(),
            rows: self.relation_of(vars)?,
        })
    }

    /// Domain after writing `vars`: old variables keep their place, new
    /// ones are appended in order.
    fn extended_domain(&self, vars: &[Var]) -> (Vec<Var>, Vec<usize>) {
        let mut domain = self.domain.clone();
        let slots = vars
            .iter()
            .map(|v| match domain.iter().position(|d| d == v) {
                Some(i) => i,
                None => {
                    domain.push(v.clone());
                    domain.len() - 1
                }
            })
            .collect();
        (domain, slots)
    }

    fn rebuild(
        &self,
        vars: &[Var],
        mut images: impl FnMut(&[Element], &mut dyn FnMut(&[Element])) -> Result<()>,
    ) -> Result<Team> {
        check_distinct(vars)?;
        let (domain, slots) = self.extended_domain(vars);
        let mut rows = Relation::empty(self.universe(), domain.len())?;
        let mut out = vec![0; domain.len()];
        for row in self.rows() {
            out[..row.len()].copy_from_slice(&row);
            images(&row, &mut |values: &[Element]| {
                for (&slot, &e) in slots.iter().zip(values) {
                    out[slot] = e;
                }
                rows.insert(&out);
            })?;
        }
        Ok(Team { domain, rows })
    }

    /// `X[M/ȳ]`.
    pub fn duplicate(&self, vars: &[Var]) -> Result<Team> {
        let n = self.universe();
        let all: Vec<Vec<Element>> = (0..vars.len())
            .map(|_| 0..n)
            .multi_cartesian_product()
            .collect();
        let all = if vars.is_empty() { vec![vec![]] } else { all };
        self.rebuild(vars, |_, emit| {
            for values in &all {
                emit(values);
            }
            Ok(())
        })
    }

    /// `X[H/ȳ]`.
    pub fn supplement(&self, vars: &[Var], choice: &ChoiceFunction) -> Result<Team> {
        if choice.width() != vars.len() {
            return Err(Error::Arity {
                name: "choice function".into(),
                expected: vars.len(),
                found: choice.width(),
            });
        }
        self.rebuild(vars, |row, emit| {
            let image = choice
                .image(row)
                .ok_or_else(|| Error::Team(format!("choice function undefined on row {row:?}")))?;
            for values in image.tuples() {
                emit(&values);
            }
            Ok(())
        })
    }

    /// `X[ā/ȳ]`.
    pub fn assign_constant(&self, vars: &[Var], values: &[Element]) -> Result<Team> {
        if values.len() != vars.len() {
            return Err(Error::Arity {
                name: "constant tuple".into(),
                expected: vars.len(),
                found: values.len(),
            });
        }
        if let Some(&e) = values.iter().find(|&&e| e >= self.universe()) {
            return Err(Error::ElementRange {
                element: e,
                size: self.universe(),
            });
        }
        self.rebuild(vars, |_, emit| {
            emit(values);
            Ok(())
        })
    }

    fn row_indices(&self) -> Vec<usize> {
        self.rows.indices().collect()
    }

    fn with_indices(&self, indices: impl Iterator<Item = usize>) -> Team {
        let mut rows = Relation::empty(self.universe(), self.domain.len()).expect("same space");
        for i in indices {
            rows.insert_index(i);
        }
        Team {
            domain: self.domain.clone(),
            rows,
        }
    }

    /// Every subteam, ordered by the bitmask over rows (row `i` is bit `i`).
    pub fn enumerate_subteams(&self, budget: u64) -> Result<impl Iterator<Item = Team> + '_> {
        let idx = self.row_indices();
        let m = idx.len() as u32;
        if m >= 64 || (1u64 << m) > budget {
            return Err(Error::ResourceExhausted { budget });
        }
        Ok((0..1u64 << m).map(move |mask| {
            self.with_indices((0..m).filter(|b| mask >> b & 1 == 1).map(|b| idx[b as usize]))
        }))
    }

    /// Every pair `(Y₁, Y₂)` with `Y₁ ∪ Y₂ = X`: each row goes left, right or
    /// both, giving `3^|X|` pairs.
    pub fn enumerate_covers(&self, budget: u64) -> Result<impl Iterator<Item = (Team, Team)> + '_> {
        let idx = self.row_indices();
        let total = 3u64
            .checked_pow(idx.len() as u32)
            .filter(|&t| t <= budget)
            .ok_or(Error::ResourceExhausted { budget })?;
        Ok((0..total).map(move |mut code| {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for &i in &idx {
                match code % 3 {
                    0 => left.push(i),
                    1 => right.push(i),
                    _ => {
                        left.push(i);
                        right.push(i);
                    }
                }
                code /= 3;
            }
            (
                self.with_indices(left.into_iter()),
                self.with_indices(right.into_iter()),
            )
        }))
    }

    /// Every choice function from the rows into non-empty sets of
    /// `width`-tuples; `(2^(n^width) − 1)^|X|` of them.
    pub fn enumerate_choices(
        &self,
        width: usize,
        budget: u64,
    ) -> Result<impl Iterator<Item = ChoiceFunction> + '_> {
        let n = self.universe();
        let per_row = structures::relation_count(n, width)
            .map(|c| c - 1)
            .ok_or(Error::ResourceExhausted { budget })?;
        let total = (0..self.len())
            .try_fold(1u64, |acc, _| acc.checked_mul(per_row))
            .filter(|&t| t <= budget)
            .ok_or(Error::ResourceExhausted { budget })?;
        let rows: Vec<Vec<Element>> = self.rows().collect();
        Ok((0..total).map(move |mut code| {
            let images = rows
                .iter()
                .map(|row| {
                    let mask = code % per_row + 1;
                    code /= per_row;
                    (row.clone(), Relation::from_mask(n, width, mask).expect("fits"))
                })
                .collect();
            ChoiceFunction { width, images }
        }))
    }
}

/// A map from rows of a team to non-empty sets of tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceFunction {
    width: usize,
    images: BTreeMap<Vec<Element>, Relation>,
}

impl ChoiceFunction {
    pub fn new(width: usize, images: impl IntoIterator<Item = (Vec<Element>, Relation)>) -> Result<Self> {
        let images: BTreeMap<_, _> = images.into_iter().collect();
        for (row, image) in &images {
            if image.arity() != width {
                return Err(Error::Arity {
                    name: "choice image".into(),
                    expected: width,
                    found: image.arity(),
                });
            }
            if image.is_empty() {
                return Err(Error::Team(format!("empty image for row {row:?}")));
            }
        }
        Ok(ChoiceFunction { width, images })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn image(&self, row: &[Element]) -> Option<&Relation> {
        self.images.get(row)
    }
}

/// Parses a team file: `vars = v w` followed by `row <elem> ...` lines.
pub fn load_team(text: &str, structure: &Structure) -> Result<Team> {
    let mut domain: Option<Vec<Var>> = None;
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split_once('#').map_or(raw, |(l, _)| l).trim();
        if line.is_empty() {
            continue;
        }
        let loc = format!("line {}", lineno + 1);
        match &domain {
            None => {
                let rest = line
                    .strip_prefix("vars")
                    .map(str::trim_start)
                    .and_then(|r| r.strip_prefix('='))
                    .ok_or_else(|| Error::syntax(&loc, "first line must be `vars = ...`"))?;
                let vars: Vec<Var> = rest.split_whitespace().map(Var::from).collect();
                if let Some(v) = vars.iter().find(|v| {
                    !v.as_str()
                        .starts_with(|c: char| c.is_ascii_lowercase())
                }) {
                    return Err(Error::syntax(&loc, format!("bad variable `{v}`")));
                }
                check_distinct(&vars)?;
                domain = Some(vars);
            }
            Some(vars) => {
                let rest = line
                    .strip_prefix("row")
                    .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
                    .ok_or_else(|| Error::syntax(&loc, "expected `row ...`"))?;
                let row = rest
                    .split_whitespace()
                    .map(|e| structures::parse_element(structure, e, &loc))
                    .collect::<Result<Vec<_>>>()?;
                if row.len() != vars.len() {
                    return Err(Error::Arity {
                        name: format!("row at {loc}"),
                        expected: vars.len(),
                        found: row.len(),
                    });
                }
                rows.push(row);
            }
        }
    }
    let domain = domain.ok_or_else(|| Error::syntax("end of input", "missing `vars` line"))?;
    Team::new(domain, structure.size(), rows)
}

/// Canonical team file text.
pub fn print_team(team: &Team, structure: &Structure) -> String {
    let mut out = String::from("vars =");
    for v in team.domain() {
        write!(out, " {v}").unwrap();
    }
    out.push('\n');
    for row in team.rows() {
        out.push_str("row");
        for e in row {
            write!(out, " {}", structure.label(e)).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> Vec<Var> {
        names.iter().map(|&n| Var::from(n)).collect()
    }

    fn example() -> Team {
        Team::new(vars(&["v", "w"]), 2, [[0, 0], [0, 1]]).unwrap()
    }

    #[test]
    fn relation_of_examples() {
        let x = example();
        let r = x.relation_of(&vars(&["v", "w"])).unwrap();
        assert_eq!(r, Relation::from_tuples(2, 2, [[0, 0], [0, 1]]).unwrap());
        let r = x.relation_of(&vars(&["v", "v"])).unwrap();
        assert_eq!(r, Relation::from_tuples(2, 2, [[0, 0]]).unwrap());
        assert!(Team::empty(vars(&["v"]), 2).unwrap().relation_of(&vars(&["v"])).unwrap().is_empty());
        assert!(x.relation_of(&vars(&["u"])).is_err());
    }

    #[test]
    fn duplicate_examples() {
        let x = Team::new(vars(&["v"]), 2, [[0]]).unwrap();
        let d = x.duplicate(&vars(&["y"])).unwrap();
        assert_eq!(d, Team::new(vars(&["v", "y"]), 2, [[0, 0], [0, 1]]).unwrap());
        assert!(Team::empty(vars(&["v"]), 2).unwrap().duplicate(&vars(&["y"])).unwrap().is_empty());
        let x = Team::new(vars(&["v"]), 2, [[0], [1]]).unwrap();
        assert_eq!(x.duplicate(&vars(&["v"])).unwrap(), x);
        assert!(x.duplicate(&vars(&["y", "y"])).is_err());
    }

    #[test]
    fn supplement_examples() {
        let x = Team::new(vars(&["v"]), 2, [[0]]).unwrap();
        let h = ChoiceFunction::new(1, [(vec![0], Relation::full(2, 1).unwrap())]).unwrap();
        assert_eq!(x.supplement(&vars(&["y"]), &h).unwrap(), x.duplicate(&vars(&["y"])).unwrap());

        let x = Team::new(vars(&["v"]), 2, [[0], [1]]).unwrap();
        let h = ChoiceFunction::new(
            1,
            [
                (vec![0], Relation::from_tuples(2, 1, [[1]]).unwrap()),
                (vec![1], Relation::from_tuples(2, 1, [[0]]).unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(
            x.supplement(&vars(&["y"]), &h).unwrap(),
            Team::new(vars(&["v", "y"]), 2, [[0, 1], [1, 0]]).unwrap()
        );
        let empty = Team::empty(vars(&["v"]), 2).unwrap();
        assert!(empty.supplement(&vars(&["y"]), &h).unwrap().is_empty());
        assert!(x.supplement(&vars(&["y", "z"]), &h).is_err());
        assert!(ChoiceFunction::new(1, [(vec![0], Relation::empty(2, 1).unwrap())]).is_err());
    }

    #[test]
    fn assign_constant_examples() {
        let x = Team::new(vars(&["v"]), 2, [[0], [1]]).unwrap();
        assert_eq!(
            x.assign_constant(&vars(&["z"]), &[1]).unwrap(),
            Team::new(vars(&["v", "z"]), 2, [[0, 1], [1, 1]]).unwrap()
        );
        let x = Team::new(vars(&["v"]), 2, [[0]]).unwrap();
        assert_eq!(
            x.assign_constant(&vars(&["v"]), &[1]).unwrap(),
            Team::new(vars(&["v"]), 2, [[1]]).unwrap()
        );
        assert!(x.assign_constant(&vars(&["v"]), &[2]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let x = example();
        let covers: Vec<_> = x.enumerate_covers(100).unwrap().collect();
        assert_eq!(covers.len(), 9);
        for (l, r) in &covers {
            let union: Vec<_> = l.rows().chain(r.rows()).unique().sorted().collect();
            assert_eq!(union, x.rows().collect::<Vec<_>>());
        }
        let empty = Team::empty(vars(&["v"]), 2).unwrap();
        let covers: Vec<_> = empty.enumerate_covers(100).unwrap().collect();
        assert_eq!(covers, vec![(empty.clone(), empty.clone())]);

        let one = Team::new(vars(&["v"]), 2, [[0]]).unwrap();
        assert_eq!(one.enumerate_choices(1, 100).unwrap().count(), 3);
        assert_eq!(x.enumerate_subteams(100).unwrap().count(), 4);
        assert!(x.enumerate_covers(8).is_err());
    }

    #[test]
    fn unit_team() {
        let e = Team::unit(3);
        assert_eq!(e.len(), 1);
        assert!(e.domain().is_empty());
        let d = e.duplicate(&vars(&["x"])).unwrap();
        assert_eq!(d.len(), 3);
    }

    #[test]
    fn team_file_round_trip() {
        let m = Structure::new(2).unwrap();
        let x = load_team("vars = v w\nrow 0 0\nrow 0 1\n", &m).unwrap();
        assert_eq!(x, example());
        assert_eq!(print_team(&x, &m), "vars = v w\nrow 0 0\nrow 0 1\n");
        assert!(load_team("vars = v\nrow 3\n", &m).is_err());
        assert!(load_team("vars = v\nrow 0 1\n", &m).is_err());
        let unit = load_team("vars =\nrow\n", &m).unwrap();
        assert_eq!(unit, Team::unit(2));
    }
}
