//! Situational knowledge: facts about objects, where they come from, and the
//! check applied before acting on a model's storage suggestion.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::llm_bridge::StorageSuggestion;
use crate::world_model::{id_order_key, SceneModel};

pub const STORAGE_KEY: &str = "storage";
pub const NEEDS_HUMAN: &str = "needs human instruction";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Human,
    Llm,
    Observed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assertion {
    pub object: String,
    pub key: String,
    pub value: String,
    pub provenance: Provenance,
    pub confirmed: bool,
}

impl std::fmt::Display for Assertion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}, {}, {}) from {:?}{}",
            self.object,
            self.key,
            self.value,
            self.provenance,
            if self.confirmed { ", confirmed" } else { "" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accept { reason: String },
    NeedsConfirmation { reason: String },
    Reject { reason: String, conflict: Assertion },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KnowledgeError {
    #[error("unknown object id `{0}`")]
    UnknownId(String),
    #[error("suggestion for `{0}` names no objects or no locations")]
    EmptySuggestion(String),
    #[error("a confirmed fact needs exactly one location, got {0}")]
    MultipleLocations(usize),
    #[error("conflicts with confirmed fact {0}")]
    ConfirmedConflict(Assertion),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Journal { path: String, line: usize, message: String },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum JournalEntry {
    Assert(Assertion),
    Retract { object: String, key: String, value: String },
}

/// Assertions about objects, optionally journaled to disk.
#[derive(Debug, Default)]
pub struct FactStore {
    assertions: Vec<Assertion>,
    journal: Option<PathBuf>,
}

fn io_err(path: &Path, e: std::io::Error) -> KnowledgeError {
    KnowledgeError::Io { path: path.display().to_string(), message: e.to_string() }
}

impl FactStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Replays the journal at `path`; a missing file is an empty store.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, KnowledgeError> {
        let path = path.as_ref();
        let mut store = FactStore::default();
        match std::fs::read_to_string(path) {
            Ok(text) => {
                for (i, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let entry: JournalEntry = serde_json::from_str(line).map_err(|e| KnowledgeError::Journal {
                        path: path.display().to_string(),
                        line: i + 1,
                        message: e.to_string(),
                    })?;
                    store.apply(entry);
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => return Err(io_err(path, e)),
        }
        store.journal = Some(path.to_path_buf());
        Ok(store)
    }

    pub fn assertions(&self) -> &[Assertion] {
        &self.assertions
    }

    fn apply(&mut self, entry: JournalEntry) {
        match entry {
            JournalEntry::Assert(a) => {
                self.assertions.retain(|b| !(b.object == a.object && b.key == a.key && b.value == a.value));
                self.assertions.push(a);
            }
            JournalEntry::Retract { object, key, value } => {
                self.assertions.retain(|b| !(b.object == object && b.key == key && b.value == value))
            }
        }
    }

    fn record(&mut self, entry: JournalEntry) -> Result<(), KnowledgeError> {
        if let Some(path) = &self.journal {
            let mut f = OpenOptions::new().create(true).append(true).open(path).map_err(|e| io_err(path, e))?;
            let line = serde_json::to_string(&entry).expect("journal entry serializes");
            writeln!(f, "{line}").map_err(|e| io_err(path, e))?;
        }
        self.apply(entry);
        Ok(())
    }

    /// Rewrites the journal so it holds only the current assertions.
    pub fn compact(&self) -> Result<(), KnowledgeError> {
        let Some(path) = &self.journal else { return Ok(()) };
        let tmp = path.with_extension("compact");
        let mut text = String::new();
        for a in &self.assertions {
            text.push_str(&serde_json::to_string(&JournalEntry::Assert(a.clone())).expect("serializes"));
            text.push('\n');
        }
        std::fs::write(&tmp, text).map_err(|e| io_err(&tmp, e))?;
        std::fs::rename(&tmp, path).map_err(|e| io_err(path, e))
    }

    pub fn confirmed(&self, object: &str, key: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.confirmed && a.object == object && a.key == key)
    }

    pub fn values(&self, object: &str, key: &str) -> Vec<&Assertion> {
        self.assertions.iter().filter(|a| a.object == object && a.key == key).collect()
    }

    /// Adds an assertion, keeping at most one confirmed value per (object, key).
    /// A confirmed assertion replaces every other value for its key; replacing
    /// a different confirmed value requires `override_confirmed`.
    pub fn assert(&mut self, a: Assertion, override_confirmed: bool) -> Result<(), KnowledgeError> {
        if let Some(existing) = self.confirmed(&a.object, &a.key) {
            if existing.value != a.value {
                if !override_confirmed {
                    return Err(KnowledgeError::ConfirmedConflict(existing.clone()));
                }
            } else if !a.confirmed {
                // Already confirmed; an unconfirmed repeat adds nothing.
                return Ok(());
            }
        }
        if a.confirmed {
            let stale: Vec<Assertion> =
                self.values(&a.object, &a.key).into_iter().filter(|b| b.value != a.value).cloned().collect();
            for b in stale {
                self.record(JournalEntry::Retract { object: b.object, key: b.key, value: b.value })?;
            }
        }
        self.record(JournalEntry::Assert(a))
    }
}

fn check_ids(s: &StorageSuggestion, scene: &SceneModel) -> Result<(), KnowledgeError> {
    if s.objects.is_empty() || s.locations.is_empty() {
        return Err(KnowledgeError::EmptySuggestion(s.re_text.clone()));
    }
    for id in s.objects.iter().chain(&s.locations) {
        if !scene.contains_id(id) {
            return Err(KnowledgeError::UnknownId(id.clone()));
        }
    }
    Ok(())
}

/// Confirmed storage fact for an object: one about the object itself wins
/// over one about its category.
fn storage_fact<'a>(store: &'a FactStore, scene: &SceneModel, id: &str) -> Option<&'a Assertion> {
    store.confirmed(id, STORAGE_KEY).or_else(|| {
        let category = &scene.object(id)?.category;
        store
            .assertions()
            .iter()
            .find(|a| a.confirmed && a.key == STORAGE_KEY && a.object.eq_ignore_ascii_case(category))
    })
}

fn value_matches(value: &str, location: &str, scene: &SceneModel) -> bool {
    value.eq_ignore_ascii_case(location)
        || scene.object(location).is_some_and(|o| o.category.eq_ignore_ascii_case(value))
}

pub fn verify_suggestion(
    s: &StorageSuggestion,
    scene: &SceneModel,
    store: &FactStore,
) -> Result<Verdict, KnowledgeError> {
    check_ids(s, scene)?;
    let mut all_known = true;
    for obj in &s.objects {
        match storage_fact(store, scene, obj) {
            Some(fact) if s.locations.iter().any(|l| value_matches(&fact.value, l, scene)) => {}
            Some(fact) => {
                return Ok(Verdict::Reject {
                    reason: format!("{obj} is stored in {}, not {}", fact.value, s.locations.join(", ")),
                    conflict: fact.clone(),
                })
            }
            None => all_known = false,
        }
    }
    Ok(if all_known {
        Verdict::Accept { reason: "matches confirmed storage facts".into() }
    } else {
        Verdict::NeedsConfirmation { reason: format!("no confirmed storage fact for `{}`", s.re_text) }
    })
}

/// Records a suggestion as storage facts with model provenance.
pub fn commit_fact(
    store: &mut FactStore,
    s: &StorageSuggestion,
    scene: &SceneModel,
    confirmed: bool,
    override_confirmed: bool,
) -> Result<(), KnowledgeError> {
    check_ids(s, scene)?;
    if confirmed && s.locations.len() != 1 {
        return Err(KnowledgeError::MultipleLocations(s.locations.len()));
    }
    for obj in &s.objects {
        if !override_confirmed {
            if let Some(existing) = store.confirmed(obj, STORAGE_KEY) {
                if !s.locations.contains(&existing.value) {
                    return Err(KnowledgeError::ConfirmedConflict(existing.clone()));
                }
            }
        }
    }
    for obj in &s.objects {
        for loc in &s.locations {
            store.assert(
                Assertion {
                    object: obj.clone(),
                    key: STORAGE_KEY.into(),
                    value: loc.clone(),
                    provenance: Provenance::Llm,
                    confirmed,
                },
                override_confirmed,
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalMatch {
    pub matches: Vec<String>,
    pub ambiguous: bool,
    pub hint: Option<String>,
}

/// Objects of `category` known to have `key = value`, from scene facts or
/// confirmed store facts.
pub fn resolve_functional(
    category: &str,
    key: &str,
    value: &str,
    scene: &SceneModel,
    store: &FactStore,
) -> FunctionalMatch {
    let mut matches: Vec<&str> = scene
        .objects
        .iter()
        .filter(|o| o.category.eq_ignore_ascii_case(category))
        .filter(|o| {
            o.has_fact(key, value) || store.confirmed(&o.id, key).is_some_and(|a| a.value.eq_ignore_ascii_case(value))
        })
        .map(|o| o.id.as_str())
        .collect();
    matches.sort_by_key(|id| id_order_key(id));
    FunctionalMatch {
        ambiguous: matches.len() > 1,
        hint: matches.is_empty().then(|| NEEDS_HUMAN.to_string()),
        matches: matches.into_iter().map(String::from).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world_model::{Aabb, ObjectRecord, Vec3};

    fn scene() -> SceneModel {
        let o = |id: &str, cat: &str| ObjectRecord {
            id: id.into(),
            category: cat.into(),
            position: Vec3::new(0.0, 0.0, 0.0),
            bbox: Aabb { min: Vec3::new(0.0, 0.0, 0.0), max: Vec3::new(0.0, 0.0, 0.0) },
            facts: vec![],
        };
        SceneModel {
            counter_height: 0.9,
            objects: vec![
                o("object1", "apple"),
                o("object7", "cabinet"),
                o("object27", "drawer"),
                o("object28", "drawer"),
                o("object39", "fork"),
                o("object40", "fridge"),
                o("object42", "plant"),
                o("object54", "potato"),
                o("object58", "shelf"),
            ],
            viewpoints: vec![],
        }
    }

    fn sugg(re: &str, objects: &[&str], locations: &[&str]) -> StorageSuggestion {
        StorageSuggestion {
            re_text: re.into(),
            objects: objects.iter().map(|s| s.to_string()).collect(),
            locations: locations.iter().map(|s| s.to_string()).collect(),
            type_class: None,
        }
    }

    fn human(object: &str, value: &str) -> Assertion {
        Assertion {
            object: object.into(),
            key: STORAGE_KEY.into(),
            value: value.into(),
            provenance: Provenance::Human,
            confirmed: true,
        }
    }

    #[test]
    fn accept_on_matching_confirmed_fact() {
        let mut store = FactStore::in_memory();
        store.assert(human("apple", "fridge"), false).unwrap();
        let v = verify_suggestion(&sugg("the apple", &["object1"], &["object40"]), &scene(), &store).unwrap();
        assert!(matches!(v, Verdict::Accept { .. }));
    }

    #[test]
    fn reject_cites_the_conflict() {
        let mut store = FactStore::in_memory();
        store.assert(human("potato", "low-cabinet"), false).unwrap();
        let v = verify_suggestion(&sugg("potatoes", &["object54"], &["object40"]), &scene(), &store).unwrap();
        let Verdict::Reject { conflict, .. } = v else { panic!("{v:?}") };
        assert_eq!(conflict.value, "low-cabinet");
    }

    #[test]
    fn unknown_fact_needs_confirmation() {
        let v = verify_suggestion(&sugg("my plant", &["object42"], &["object58"]), &scene(), &FactStore::in_memory())
            .unwrap();
        assert!(matches!(v, Verdict::NeedsConfirmation { .. }));
    }

    #[test]
    fn unknown_ids_are_errors() {
        let err = verify_suggestion(&sugg("x", &["object99"], &["object40"]), &scene(), &FactStore::in_memory());
        assert_eq!(err, Err(KnowledgeError::UnknownId("object99".into())));
    }

    #[test]
    fn confirm_then_verify_accepts() {
        let s = sugg("a fork", &["object39"], &["object27"]);
        let mut store = FactStore::in_memory();
        commit_fact(&mut store, &s, &scene(), true, false).unwrap();
        assert!(store.confirmed("object39", STORAGE_KEY).is_some());
        assert!(matches!(verify_suggestion(&s, &scene(), &store).unwrap(), Verdict::Accept { .. }));
    }

    #[test]
    fn unconfirmed_alternatives_coexist() {
        let mut store = FactStore::in_memory();
        commit_fact(&mut store, &sugg("a fork", &["object39"], &["object27"]), &scene(), false, false).unwrap();
        commit_fact(&mut store, &sugg("a fork", &["object39"], &["object28"]), &scene(), false, false).unwrap();
        assert_eq!(store.values("object39", STORAGE_KEY).len(), 2);
        assert!(store.confirmed("object39", STORAGE_KEY).is_none());
        commit_fact(&mut store, &sugg("a fork", &["object39"], &["object28"]), &scene(), true, false).unwrap();
        assert_eq!(store.values("object39", STORAGE_KEY).len(), 1);
    }

    #[test]
    fn confirmed_fact_needs_override() {
        let mut store = FactStore::in_memory();
        commit_fact(&mut store, &sugg("a fork", &["object39"], &["object27"]), &scene(), true, false).unwrap();
        let again = sugg("a fork", &["object39"], &["object28"]);
        assert!(matches!(
            commit_fact(&mut store, &again, &scene(), true, false),
            Err(KnowledgeError::ConfirmedConflict(_))
        ));
        commit_fact(&mut store, &again, &scene(), true, true).unwrap();
        assert_eq!(store.confirmed("object39", STORAGE_KEY).unwrap().value, "object28");
        assert!(matches!(
            commit_fact(&mut store, &sugg("x", &["object1"], &["object27", "object28"]), &scene(), true, false),
            Err(KnowledgeError::MultipleLocations(2))
        ));
    }

    #[test]
    fn journal_round_trip_and_compaction() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("facts.jsonl");
        {
            let mut store = FactStore::open(&path).unwrap();
            commit_fact(&mut store, &sugg("f", &["object39"], &["object27"]), &scene(), false, false).unwrap();
            commit_fact(&mut store, &sugg("f", &["object39"], &["object28"]), &scene(), true, false).unwrap();
        }
        let store = FactStore::open(&path).unwrap();
        assert_eq!(store.assertions().len(), 1);
        let before = std::fs::read_to_string(&path).unwrap().lines().count();
        store.compact().unwrap();
        let after = std::fs::read_to_string(&path).unwrap().lines().count();
        assert!(after < before);
        assert_eq!(FactStore::open(&path).unwrap().assertions(), store.assertions());
    }

    #[test]
    fn functional_lookup() {
        let mut sc = scene();
        let mut store = FactStore::in_memory();
        let none = resolve_functional("drawer", "contains", "silverware", &sc, &store);
        assert_eq!(none.hint.as_deref(), Some(NEEDS_HUMAN));
        sc.objects[2].facts.push(crate::world_model::Fact { key: "contains".into(), value: "silverware".into() });
        let one = resolve_functional("drawer", "contains", "silverware", &sc, &store);
        assert_eq!((one.matches.as_slice(), one.ambiguous), (&["object27".to_string()][..], false));
        store
            .assert(
                Assertion {
                    object: "object28".into(),
                    key: "contains".into(),
                    value: "silverware".into(),
                    provenance: Provenance::Human,
                    confirmed: true,
                },
                false,
            )
            .unwrap();
        let two = resolve_functional("drawer", "contains", "silverware", &sc, &store);
        assert_eq!(two.matches, ["object27", "object28"]);
        assert!(two.ambiguous);
    }
}
