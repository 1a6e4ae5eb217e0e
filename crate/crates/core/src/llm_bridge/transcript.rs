use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::BridgeError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub digest: String,
    pub prompt: String,
    pub response: String,
    /// Unix seconds.
    pub timestamp: u64,
    /// Run label, such as a variant name. Two runs can send the same prompt
    /// and receive different answers; the label keeps both replayable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Append-only JSON-lines record of prompts and responses, keyed by prompt digest.
#[derive(Debug, Default)]
pub struct Transcript {
    path: Option<PathBuf>,
    entries: Vec<TranscriptEntry>,
    index: HashMap<String, usize>,
    labelled: HashMap<(String, String), usize>,
}

impl Transcript {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens `path`, reading existing entries. A missing file starts empty.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, BridgeError> {
        let path = path.as_ref();
        let mut t = Transcript { path: Some(path.to_path_buf()), ..Default::default() };
        let text = match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(BridgeError::io(path, e)),
        };
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranscriptEntry = serde_json::from_str(line)
                .map_err(|e| BridgeError::Transcript(format!("{}:{}: {e}", path.display(), n + 1)))?;
            t.insert(entry);
        }
        Ok(t)
    }

    /// Opens `path`, failing if it does not exist.
    pub fn open_existing(path: impl AsRef<Path>) -> Result<Self, BridgeError> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(BridgeError::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "transcript not found"),
            ));
        }
        Self::open(path)
    }

    fn insert(&mut self, entry: TranscriptEntry) {
        // Later recordings of the same prompt win.
        let at = self.entries.len();
        self.index.insert(entry.digest.clone(), at);
        if let Some(label) = &entry.label {
            self.labelled.insert((entry.digest.clone(), label.clone()), at);
        }
        self.entries.push(entry);
    }

    /// Latest entry for `digest`, preferring one recorded under `label`.
    pub fn lookup(&self, digest: &str, label: Option<&str>) -> Option<&TranscriptEntry> {
        label
            .and_then(|l| self.labelled.get(&(digest.to_string(), l.to_string())))
            .or_else(|| self.index.get(digest))
            .map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn append(&mut self, entry: TranscriptEntry) -> Result<(), BridgeError> {
        if let Some(path) = &self.path {
            let mut f =
                OpenOptions::new().create(true).append(true).open(path).map_err(|e| BridgeError::io(path, e))?;
            let line = serde_json::to_string(&entry).expect("entry serializes");
            writeln!(f, "{line}").map_err(|e| BridgeError::io(path, e))?;
        }
        self.insert(entry);
        Ok(())
    }
}
