//! S-expression query language for referring expressions.
//!
//! ```text
//! query      := "(" "select" constraint+ ")"
//! constraint := "(" "category" NAME ")"
//!             | "(" "rel" RELATION query [ "ordinal" INT ] ")"
//!             | "(" "band" ("high" | "low") ")"
//!             | "(" "stack" ("top" | "middle" | "bottom" | INT) ")"
//!             | "(" "fact" KEY VALUE ")"
//! RELATION   := left-of | right-of | above | below | next-to
//! ```
//!
//! Atoms containing spaces or parentheses are written in double quotes.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::neighbor_graph::Relation;

/// Deepest allowed chain of nested anchor queries.
pub const MAX_ANCHOR_DEPTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StackPos {
    Top,
    Middle,
    Bottom,
    NthFromTop(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    Category(String),
    Rel { relation: Relation, anchor: Box<Query>, ordinal: usize },
    Band(Band),
    Stack(StackPos),
    Fact { key: String, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub constraints: Vec<Constraint>,
}

impl Query {
    /// Number of nested anchor levels below this query.
    pub fn anchor_depth(&self) -> usize {
        self.constraints
            .iter()
            .map(|c| match c {
                Constraint::Rel { anchor, .. } => 1 + anchor.anchor_depth(),
                _ => 0,
            })
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DslErrorKind {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("expected {expected}, found `{found}`")]
    Unexpected { expected: &'static str, found: String },
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),
    #[error("invalid value `{0}`")]
    InvalidValue(String),
    #[error("ordinal must be a positive integer, got `{0}`")]
    BadOrdinal(String),
    #[error("anchor nesting deeper than {MAX_ANCHOR_DEPTH}")]
    TooDeep,
    #[error("select needs at least one constraint")]
    EmptySelect,
    #[error("unterminated string")]
    UnterminatedString,
    #[error("trailing input")]
    TrailingInput,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {pos}")]
pub struct DslError {
    pub pos: usize,
    pub kind: DslErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, DslError> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push((i, Tok::Open));
            }
            ')' => {
                chars.next();
                out.push((i, Tok::Close));
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, e)) => s.push(e),
                            None => break,
                        },
                        Some((_, ch)) => s.push(ch),
                        None => return Err(DslError { pos: i, kind: DslErrorKind::UnterminatedString }),
                    }
                }
                out.push((i, Tok::Atom(s)));
            }
            _ => {
                let mut s = String::new();
                while let Some(&(_, ch)) = chars.peek() {
                    if ch.is_whitespace() || ch == '(' || ch == ')' || ch == '"' {
                        break;
                    }
                    s.push(ch);
                    chars.next();
                }
                out.push((i, Tok::Atom(s)));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn err<T>(&self, pos: usize, kind: DslErrorKind) -> Result<T, DslError> {
        Err(DslError { pos, kind })
    }

    fn next(&mut self) -> Result<(usize, Tok), DslError> {
        match self.toks.get(self.at) {
            Some(t) => {
                self.at += 1;
                Ok(t.clone())
            }
            None => self.err(self.end, DslErrorKind::UnexpectedEnd),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn open(&mut self) -> Result<(), DslError> {
        match self.next()? {
            (_, Tok::Open) => Ok(()),
            (p, t) => self.err(p, unexpected("`(`", &t)),
        }
    }

    fn close(&mut self) -> Result<(), DslError> {
        match self.next()? {
            (_, Tok::Close) => Ok(()),
            (p, t) => self.err(p, unexpected("`)`", &t)),
        }
    }

    fn atom(&mut self, expected: &'static str) -> Result<(usize, String), DslError> {
        match self.next()? {
            (p, Tok::Atom(s)) => Ok((p, s)),
            (p, t) => self.err(p, unexpected(expected, &t)),
        }
    }

    fn query(&mut self, depth: usize) -> Result<Query, DslError> {
        self.open()?;
        let (p, kw) = self.atom("`select`")?;
        if kw != "select" {
            return self.err(p, DslErrorKind::UnknownKeyword(kw));
        }
        let mut constraints = Vec::new();
        while let Some(Tok::Open) = self.peek() {
            constraints.push(self.constraint(depth)?);
        }
        if constraints.is_empty() {
            let pos = self.toks.get(self.at).map_or(self.end, |t| t.0);
            return self.err(pos, DslErrorKind::EmptySelect);
        }
        self.close()?;
        Ok(Query { constraints })
    }

    fn constraint(&mut self, depth: usize) -> Result<Constraint, DslError> {
        self.open()?;
        let (p, kw) = self.atom("constraint keyword")?;
        let c = match kw.as_str() {
            "category" => Constraint::Category(self.atom("category name")?.1),
            "band" => {
                let (p, v) = self.atom("`high` or `low`")?;
                Constraint::Band(match v.as_str() {
                    "high" => Band::High,
                    "low" => Band::Low,
                    _ => return self.err(p, DslErrorKind::InvalidValue(v)),
                })
            }
            "stack" => {
                let (p, v) = self.atom("stack position")?;
                Constraint::Stack(match v.as_str() {
                    "top" => StackPos::Top,
                    "middle" => StackPos::Middle,
                    "bottom" => StackPos::Bottom,
                    n => match n.parse::<usize>() {
                        Ok(n) if n >= 1 => StackPos::NthFromTop(n),
                        _ => return self.err(p, DslErrorKind::InvalidValue(v)),
                    },
                })
            }
            "fact" => {
                let key = self.atom("fact key")?.1;
                let value = self.atom("fact value")?.1;
                Constraint::Fact { key, value }
            }
            "rel" => {
                let (rp, r) = self.atom("relation")?;
                let relation = match parse_relation(&r) {
                    Some(rel) => rel,
                    None => return self.err(rp, DslErrorKind::UnknownRelation(r)),
                };
                if depth + 1 > MAX_ANCHOR_DEPTH {
                    let pos = self.toks.get(self.at).map_or(self.end, |t| t.0);
                    return self.err(pos, DslErrorKind::TooDeep);
                }
                let anchor = Box::new(self.query(depth + 1)?);
                let mut ordinal = 1;
                if let Some(Tok::Atom(_)) = self.peek() {
                    let (kp, k) = self.atom("`ordinal`")?;
                    if k != "ordinal" {
                        return self.err(kp, DslErrorKind::UnknownKeyword(k));
                    }
                    let (np, n) = self.atom("ordinal value")?;
                    ordinal = match n.parse::<usize>() {
                        Ok(n) if n >= 1 => n,
                        _ => return self.err(np, DslErrorKind::BadOrdinal(n)),
                    };
                }
                Constraint::Rel { relation, anchor, ordinal }
            }
            _ => return self.err(p, DslErrorKind::UnknownKeyword(kw)),
        };
        self.close()?;
        Ok(c)
    }
}

fn unexpected(expected: &'static str, found: &Tok) -> DslErrorKind {
    let found = match found {
        Tok::Open => "(".to_string(),
        Tok::Close => ")".to_string(),
        Tok::Atom(s) => s.clone(),
    };
    DslErrorKind::Unexpected { expected, found }
}

pub fn parse_relation(word: &str) -> Option<Relation> {
    Some(match word {
        "left-of" => Relation::Left,
        "right-of" => Relation::Right,
        "above" => Relation::Above,
        "below" => Relation::Below,
        "next-to" => Relation::NextTo,
        _ => return None,
    })
}

pub fn relation_keyword(rel: Relation) -> &'static str {
    match rel {
        Relation::Left => "left-of",
        Relation::Right => "right-of",
        Relation::Above => "above",
        Relation::Below => "below",
        Relation::NextTo => "next-to",
    }
}

pub fn parse_query(src: &str) -> Result<Query, DslError> {
    let mut p = Parser { toks: tokenize(src)?, at: 0, end: src.len() };
    let q = p.query(0)?;
    if let Some((pos, _)) = p.toks.get(p.at) {
        return Err(DslError { pos: *pos, kind: DslErrorKind::TrailingInput });
    }
    Ok(q)
}

fn write_atom(f: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    let plain = !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || matches!(c, '(' | ')' | '"' | '\\'));
    if plain {
        f.write_str(s)
    } else {
        f.write_str("\"")?;
        for c in s.chars() {
            if c == '"' || c == '\\' {
                f.write_str("\\")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("\"")
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Category(c) => {
                f.write_str("(category ")?;
                write_atom(f, c)?;
                f.write_str(")")
            }
            Constraint::Band(Band::High) => f.write_str("(band high)"),
            Constraint::Band(Band::Low) => f.write_str("(band low)"),
            Constraint::Stack(pos) => match pos {
                StackPos::Top => f.write_str("(stack top)"),
                StackPos::Middle => f.write_str("(stack middle)"),
                StackPos::Bottom => f.write_str("(stack bottom)"),
                StackPos::NthFromTop(n) => write!(f, "(stack {n})"),
            },
            Constraint::Fact { key, value } => {
                f.write_str("(fact ")?;
                write_atom(f, key)?;
                f.write_str(" ")?;
                write_atom(f, value)?;
                f.write_str(")")
            }
            Constraint::Rel { relation, anchor, ordinal } => {
                write!(f, "(rel {} {anchor}", relation_keyword(*relation))?;
                if *ordinal != 1 {
                    write!(f, " ordinal {ordinal}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(select")?;
        for c in &self.constraints {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_nested_relation_with_ordinal() {
        let q =
            parse_query("(select (category Cabinet) (rel right-of (select (category Microwave)) ordinal 2))").unwrap();
        assert_eq!(q.constraints.len(), 2);
        match &q.constraints[1] {
            Constraint::Rel { relation, ordinal, anchor } => {
                assert_eq!(*relation, Relation::Right);
                assert_eq!(*ordinal, 2);
                assert_eq!(anchor.constraints, vec![Constraint::Category("Microwave".into())]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn canonical_form_drops_first_ordinal() {
        let src = "(select (category Drawer) (rel left-of (select (category Stove)) ordinal 1))";
        assert_eq!(
            parse_query(src).unwrap().to_string(),
            "(select (category Drawer) (rel left-of (select (category Stove))))"
        );
    }

    #[test]
    fn unknown_keyword_reports_position() {
        let err = parse_query("(select (colour red))").unwrap_err();
        assert_eq!(err.pos, 9);
        assert_eq!(err.kind, DslErrorKind::UnknownKeyword("colour".into()));
    }

    #[test]
    fn rejects_zero_ordinal_and_bad_relation() {
        let err = parse_query("(select (rel above (select (category A)) ordinal 0))").unwrap_err();
        assert!(matches!(err.kind, DslErrorKind::BadOrdinal(_)));
        let err = parse_query("(select (rel behind (select (category A))))").unwrap_err();
        assert_eq!(err.pos, 13);
        assert!(matches!(err.kind, DslErrorKind::UnknownRelation(_)));
    }

    #[test]
    fn rejects_empty_select_and_trailing_input() {
        assert_eq!(parse_query("(select)").unwrap_err().kind, DslErrorKind::EmptySelect);
        assert_eq!(parse_query("(select (band low)) x").unwrap_err().kind, DslErrorKind::TrailingInput);
        assert_eq!(parse_query("(select (band low)").unwrap_err().kind, DslErrorKind::UnexpectedEnd);
    }

    #[test]
    fn nesting_limit() {
        let mut src = "(select (category A))".to_string();
        for _ in 0..MAX_ANCHOR_DEPTH {
            src = format!("(select (rel above {src}))");
        }
        assert_eq!(parse_query(&src).unwrap().anchor_depth(), MAX_ANCHOR_DEPTH);
        let deeper = format!("(select (rel above {src}))");
        assert_eq!(parse_query(&deeper).unwrap_err().kind, DslErrorKind::TooDeep);
    }

    #[test]
    fn quoted_atoms() {
        let q = parse_query(r#"(select (category "butter knife") (fact "in \"x\"" y))"#).unwrap();
        assert_eq!(q.constraints[0], Constraint::Category("butter knife".into()));
        assert_eq!(parse_query(&q.to_string()).unwrap(), q);
    }

    fn atom() -> impl Strategy<Value = String> {
        prop_oneof!["[A-Za-z][A-Za-z0-9_-]{0,8}", "[a-z ()\"]{1,6}",]
    }

    fn leaf() -> impl Strategy<Value = Constraint> {
        prop_oneof![
            atom().prop_map(Constraint::Category),
            prop_oneof![Just(Band::High), Just(Band::Low)].prop_map(Constraint::Band),
            prop_oneof![
                Just(StackPos::Top),
                Just(StackPos::Middle),
                Just(StackPos::Bottom),
                (1usize..6).prop_map(StackPos::NthFromTop),
            ]
            .prop_map(Constraint::Stack),
            (atom(), atom()).prop_map(|(key, value)| Constraint::Fact { key, value }),
        ]
    }

    pub(crate) fn arb_query() -> impl Strategy<Value = Query> {
        let base = prop::collection::vec(leaf(), 1..4).prop_map(|constraints| Query { constraints });
        base.prop_recursive(MAX_ANCHOR_DEPTH as u32, 24, 3, |inner| {
            let rel = (
                prop_oneof![
                    Just(Relation::Left),
                    Just(Relation::Right),
                    Just(Relation::Above),
                    Just(Relation::Below),
                    Just(Relation::NextTo),
                ],
                inner,
                1usize..5,
            )
                .prop_map(|(relation, anchor, ordinal)| Constraint::Rel {
                    relation,
                    anchor: Box::new(anchor),
                    ordinal,
                });
            prop::collection::vec(prop_oneof![leaf(), rel], 1..4).prop_map(|constraints| Query { constraints })
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_is_identity(q in arb_query()) {
            let text = q.to_string();
            prop_assert_eq!(parse_query(&text).unwrap(), q);
        }

        #[test]
        fn printing_is_a_fixed_point(q in arb_query()) {
            let once = q.to_string();
            let twice = parse_query(&once).unwrap().to_string();
            prop_assert_eq!(once, twice);
        }
    }
}
