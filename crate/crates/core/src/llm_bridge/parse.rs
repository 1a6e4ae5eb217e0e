use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::world_model::id_suffix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroundingLine {
    Parsed { re: String, ids: Vec<String> },
    Unparsed { line: String },
}

const ARROWS: [&str; 2] = ["→", "->"];
const SEPARATORS: [&str; 4] = ["→", "->", ":", " - "];

fn strip_marker(line: &str) -> &str {
    let l = line.trim();
    for m in ["- ", "* ", "• "] {
        if let Some(rest) = l.strip_prefix(m) {
            return rest.trim_start();
        }
    }
    let digits = l.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits > 0 {
        let rest = &l[digits..];
        if let Some(r) = rest.strip_prefix(". ").or_else(|| rest.strip_prefix(") ")) {
            return r.trim_start();
        }
    }
    l
}

fn clean_re(s: &str) -> String {
    s.trim().trim_matches(|c: char| matches!(c, '"' | '\'' | '*' | '`' | '“' | '”' | '‘' | '’')).trim().to_string()
}

fn word_tokens(s: &str) -> impl Iterator<Item = &str> {
    s.split(|c: char| !c.is_alphanumeric()).filter(|w| !w.is_empty())
}

/// Extracts `(expression, ids)` pairs from a grounding answer. Only tokens
/// found in `vocabulary` count as ids; lines without one are skipped unless
/// they look like an answer (contain an arrow), in which case they are
/// kept as `Unparsed`.
pub fn parse_grounding_response(text: &str, vocabulary: &BTreeSet<String>) -> Vec<GroundingLine> {
    let mut out = Vec::new();
    for raw in text.lines() {
        let line = strip_marker(raw);
        if line.is_empty() {
            continue;
        }
        let split = SEPARATORS.iter().find_map(|sep| line.find(sep).map(|at| (&line[..at], &line[at + sep.len()..])));
        let answer = split.map_or(line, |(_, a)| a);
        let mut ids: Vec<String> = Vec::new();
        for w in word_tokens(answer) {
            if vocabulary.contains(w) && !ids.iter().any(|i| i == w) {
                ids.push(w.to_string());
            }
        }
        let has_arrow = ARROWS.iter().any(|a| line.contains(a));
        match (ids.is_empty(), split) {
            (false, Some((re, _))) => out.push(GroundingLine::Parsed { re: clean_re(re), ids }),
            (false, None) => {
                let first = line.find(ids[0].as_str()).unwrap_or(line.len());
                out.push(GroundingLine::Parsed { re: clean_re(&line[..first]), ids })
            }
            (true, _) if has_arrow => out.push(GroundingLine::Unparsed { line: raw.trim().to_string() }),
            (true, _) => {}
        }
    }
    out
}

/// One storage recommendation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageSuggestion {
    pub re_text: String,
    pub objects: Vec<String>,
    pub locations: Vec<String>,
    pub type_class: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum StorageLine {
    Suggestion(StorageSuggestion),
    Unparsed { line: String },
}

fn strip_glosses(s: &str) -> String {
    let mut out = String::new();
    let mut depth = 0usize;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

fn split_id(id: &str) -> Option<(&str, u64)> {
    let suffix = id_suffix(id)?;
    let prefix = &id[..id.len() - suffix.len()];
    if prefix.is_empty() || !prefix.chars().all(|c| c.is_ascii_alphabetic() || c == '_') {
        return None;
    }
    Some((prefix, suffix.parse().ok()?))
}

/// Expands a comma/`or` separated id list, including `objA-objB` ranges.
fn id_list(segment: &str) -> Option<Vec<String>> {
    let cleaned = strip_glosses(segment);
    let mut ids = Vec::new();
    for part in cleaned.split(',').flat_map(|p| p.split(" or ")) {
        let item = part.trim().trim_end_matches('.').trim();
        if item.is_empty() {
            continue;
        }
        if let Some((a, b)) = item.split_once('-') {
            let (pa, na) = split_id(a.trim())?;
            let (pb, nb) = split_id(b.trim())?;
            if pa != pb || na > nb {
                return None;
            }
            ids.extend((na..=nb).map(|n| format!("{pa}{n}")));
        } else {
            split_id(item)?;
            ids.push(item.to_string());
        }
    }
    (!ids.is_empty()).then_some(ids)
}

fn type_heading(line: &str) -> Option<u8> {
    let rest = line.strip_prefix("Type ")?;
    let n: String = rest.chars().take_while(|c| c.is_ascii_digit()).collect();
    rest[n.len()..].starts_with(':').then(|| n.parse().ok()).flatten()
}

/// Reads `expression → stored ids → location ids` lines, tracking the
/// `Type N:` heading each falls under.
pub fn parse_storage_response(text: &str) -> Vec<StorageLine> {
    let mut out = Vec::new();
    let mut current_type = None;
    for raw in text.lines() {
        let line = strip_marker(raw);
        if let Some(t) = type_heading(line) {
            current_type = Some(t);
            continue;
        }
        let normalized = line.replace("->", "→");
        if !normalized.contains('→') {
            continue;
        }
        let parts: Vec<&str> = normalized.split('→').map(str::trim).collect();
        if parts.iter().all(|p| p.starts_with('[') && p.ends_with(']')) {
            continue;
        }
        let parsed = match parts.as_slice() {
            [re, objs, locs] => id_list(objs).zip(id_list(locs)).map(|(objects, locations)| StorageSuggestion {
                re_text: clean_re(re),
                objects,
                locations,
                type_class: current_type,
            }),
            _ => None,
        };
        out.push(match parsed {
            Some(s) => StorageLine::Suggestion(s),
            None => StorageLine::Unparsed { line: raw.trim().to_string() },
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn grounding_separators() {
        let v = vocab(&["Drawer29", "Cabinet12", "Cabinet7", "Cabinet14"]);
        let text = "Sure! Here they are:\n\n1. the drawer next to the fridge → Drawer29\nthe cabinet below the sink: Cabinet12\n- \"The second cabinet\" - Cabinet7, Cabinet14\nthe microwave → I am not sure\n";
        assert_eq!(
            parse_grounding_response(text, &v),
            vec![
                GroundingLine::Parsed { re: "the drawer next to the fridge".into(), ids: vec!["Drawer29".into()] },
                GroundingLine::Parsed { re: "the cabinet below the sink".into(), ids: vec!["Cabinet12".into()] },
                GroundingLine::Parsed {
                    re: "The second cabinet".into(),
                    ids: vec!["Cabinet7".into(), "Cabinet14".into()]
                },
                GroundingLine::Unparsed { line: "the microwave → I am not sure".into() },
            ]
        );
    }

    #[test]
    fn unknown_tokens_are_not_ids() {
        let v = vocab(&["Drawer29"]);
        let got = parse_grounding_response("the drawer -> Drawer99", &v);
        assert_eq!(got, vec![GroundingLine::Unparsed { line: "the drawer -> Drawer99".into() }]);
    }

    #[test]
    fn storage_line_with_range_and_alternatives() {
        let got = parse_storage_response(
            "Type 4: Dishes\n- a vase → object81, object82 → object58 (shelves) or object7-object9 (cabinets)\n",
        );
        let StorageLine::Suggestion(s) = &got[0] else { panic!("{got:?}") };
        assert_eq!(s.objects, ["object81", "object82"]);
        assert_eq!(s.locations, ["object58", "object7", "object8", "object9"]);
        assert_eq!(s.type_class, Some(4));
    }

    #[test]
    fn storage_arrow_count_enforced() {
        let got = parse_storage_response("the apple → object1\nthe pear → object2 → object40 → object41\n");
        assert!(got.iter().all(|l| matches!(l, StorageLine::Unparsed { .. })));
        assert_eq!(got.len(), 2);
    }

    #[test]
    fn storage_header_and_gloss() {
        let got = parse_storage_response(
            "[Referring Expression] → [Object ID to Store] → [Location]\nsomething to slice the bread → object44 (knife) → object27 (drawers)\n",
        );
        assert_eq!(got.len(), 1);
        let StorageLine::Suggestion(s) = &got[0] else { panic!() };
        assert_eq!(
            (s.objects.as_slice(), s.locations.as_slice()),
            (&["object44".to_string()][..], &["object27".to_string()][..])
        );
    }
}
