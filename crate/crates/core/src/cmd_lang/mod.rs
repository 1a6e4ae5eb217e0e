//! Restricted command language: parsing, a simulated kitchen, validation.

pub mod exec;
pub mod validate;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exec::{execute, run_program, ExecError, KitchenSetup, KitchenState, ObjectState, RunError, StepRecord};
pub use validate::{validate_program, Issue, ValidationReport};

const STANDARD_TABLE: &str = include_str!("../../data/verbs.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verb {
    PickUp,
    PutDownIn,
    PutDownOn,
    GoTo,
    TurnOn,
    TurnOff,
    WaitFor,
    WaitUntil,
    Stir,
    PourInto,
    CrackInto,
    Serve,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionCommand {
    pub verb: Verb,
    pub args: Vec<String>,
    pub optional: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty command")]
    Empty,
    #[error("unknown verb in `{0}`")]
    UnknownVerb(String),
    #[error("{verb} takes {expected} argument(s), found {found}")]
    ArityMismatch { verb: String, expected: usize, found: usize },
    #[error("empty argument in `{0}`")]
    EmptyArgument(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerbSpec {
    pub name: Verb,
    pub prefix: String,
    #[serde(default)]
    pub joiner: Option<String>,
    pub template: String,
    #[serde(default)]
    pub requires: Vec<String>,
    #[serde(default)]
    pub effects: Vec<String>,
}

impl VerbSpec {
    pub fn arity(&self) -> usize {
        if self.joiner.is_some() {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct HeatRule {
    pub flag: String,
    pub objects: Vec<String>,
    pub ticks: u32,
    #[serde(default)]
    pub min_stirred: u32,
}

#[derive(Debug, Clone, Deserialize)]
pub struct HeatModel {
    pub warm_after: u32,
    #[serde(default, rename = "rule")]
    pub rules: Vec<HeatRule>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Timing {
    pub unmodeled_wait: u64,
    pub max_wait: u64,
}

/// Verb inventory plus the small physics the executor needs.
#[derive(Debug, Clone, Deserialize)]
pub struct VerbTable {
    #[serde(rename = "verb")]
    pub verbs: Vec<VerbSpec>,
    pub conditions: BTreeMap<String, (String, String)>,
    pub timing: Timing,
    pub heat: HeatModel,
    pub dishes: BTreeMap<String, Vec<String>>,
}

impl VerbTable {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let table: VerbTable = toml::from_str(text).map_err(|e| e.to_string())?;
        for v in [
            Verb::PickUp,
            Verb::PutDownIn,
            Verb::PutDownOn,
            Verb::GoTo,
            Verb::TurnOn,
            Verb::TurnOff,
            Verb::WaitFor,
            Verb::WaitUntil,
            Verb::Stir,
            Verb::PourInto,
            Verb::CrackInto,
            Verb::Serve,
        ] {
            if !table.verbs.iter().any(|s| s.name == v) {
                return Err(format!("verb table lacks {v:?}"));
            }
        }
        Ok(table)
    }

    /// The table shipped with the crate.
    pub fn standard() -> Self {
        Self::from_toml(STANDARD_TABLE).expect("bundled verb table is valid")
    }

    pub fn spec(&self, verb: Verb) -> &VerbSpec {
        self.verbs.iter().find(|s| s.name == verb).expect("table covers every verb")
    }

    /// Inventory lines in table order, as shown to a language model.
    pub fn templates(&self) -> Vec<String> {
        self.verbs.iter().map(|v| v.template.clone()).collect()
    }

    pub fn parse(&self, line: &str) -> Result<ActionCommand, ParseError> {
        let mut text = line.trim();
        let mut optional = false;
        if let Some(rest) = strip_prefix_ci(text, "(optional)") {
            optional = true;
            text = rest.trim_start();
        }
        let text = text.trim_end().trim_end_matches('.').trim_end();
        if text.is_empty() {
            return Err(ParseError::Empty);
        }
        let mut candidates: Vec<(&VerbSpec, &str)> = self
            .verbs
            .iter()
            .filter_map(|s| {
                let rest = strip_prefix_ci(text, &s.prefix)?;
                (rest.is_empty() || rest.starts_with(' ')).then_some((s, rest.trim_start()))
            })
            .collect();
        let Some(longest) = candidates.iter().map(|(s, _)| s.prefix.len()).max() else {
            return Err(ParseError::UnknownVerb(line.trim().to_string()));
        };
        candidates.retain(|(s, _)| s.prefix.len() == longest);

        // Among verbs sharing a prefix, the joiner that occurs first decides.
        let mut best: Option<(usize, &VerbSpec, Vec<String>)> = None;
        for (spec, rest) in &candidates {
            match &spec.joiner {
                None => {
                    if best.is_none() {
                        best = Some((usize::MAX, spec, vec![rest.to_string()]));
                    }
                }
                Some(j) => {
                    if let Some(at) = find_word_ci(rest, j) {
                        if best.as_ref().is_none_or(|(pos, _, _)| at < *pos) {
                            let a = rest[..at].to_string();
                            let b = rest[at + j.len()..].to_string();
                            best = Some((at, spec, vec![a, b]));
                        }
                    }
                }
            }
        }
        let Some((_, spec, raw)) = best else {
            let spec = candidates[0].0;
            return Err(ParseError::ArityMismatch {
                verb: spec.prefix.clone(),
                expected: spec.arity(),
                found: usize::from(!candidates[0].1.is_empty()),
            });
        };
        let args: Vec<String> = raw.iter().map(|a| strip_article(a)).collect();
        if args.iter().any(String::is_empty) {
            return Err(ParseError::EmptyArgument(line.trim().to_string()));
        }
        Ok(ActionCommand { verb: spec.name, args, optional })
    }

    pub fn render(&self, cmd: &ActionCommand) -> String {
        let spec = self.spec(cmd.verb);
        let mut out = String::new();
        if cmd.optional {
            out.push_str("(Optional) ");
        }
        let mut args = cmd.args.iter();
        let mut rest = spec.template.as_str();
        while let Some(open) = rest.find('<') {
            out.push_str(&rest[..open]);
            let close = rest[open..].find('>').map_or(rest.len(), |c| open + c + 1);
            out.push_str(args.next().map_or("", String::as_str));
            rest = &rest[close..];
        }
        out.push_str(rest);
        out
    }
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &s[prefix.len()..])
}

/// Byte offset of ` word ` in `s`, ignoring case.
fn find_word_ci(s: &str, word: &str) -> Option<usize> {
    let needle = format!(" {} ", word.to_ascii_lowercase());
    format!("{} ", s.to_ascii_lowercase()).find(&needle).map(|i| i + 1)
}

fn strip_article(arg: &str) -> String {
    let a = arg.trim();
    for art in ["the ", "a ", "an "] {
        if let Some(rest) = strip_prefix_ci(a, art) {
            return rest.trim().to_string();
        }
    }
    a.to_string()
}

pub fn parse_command(line: &str) -> Result<ActionCommand, ParseError> {
    VerbTable::standard().parse(line)
}

/// Parses a whole program, one command per non-blank line.
pub fn parse_program(text: &str, table: &VerbTable) -> Result<Vec<ActionCommand>, (usize, ParseError)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| table.parse(l).map_err(|e| (i + 1, e)))
        .collect()
}

impl fmt::Display for ActionCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&VerbTable::standard().render(self))
    }
}
