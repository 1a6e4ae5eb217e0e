//! Prompt construction, completion (live or replayed) and response parsing.

pub mod client;
pub mod parse;
pub mod prompts;
pub mod transcript;

use std::path::Path;

use thiserror::Error;

use crate::neighbor_graph::GraphError;
use crate::world_model::SceneError;

pub use client::{ChatTransport, CompletionClient, HttpTransport, LiveConfig, TransportError};
pub use parse::{parse_grounding_response, parse_storage_response, GroundingLine, StorageLine, StorageSuggestion};
pub use prompts::{
    build_grounding_prompt, build_simplify_prompt, build_storage_prompt, PromptDoc, PromptKind, PromptVariant,
};
pub use transcript::{Transcript, TranscriptEntry};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BridgeError {
    #[error("no {0} given")]
    EmptyInput(&'static str),
    #[error("variant mismatch: {0}")]
    VariantMismatch(String),
    #[error("no recorded response for prompt {0}")]
    MissingReplay(String),
    #[error("endpoint failed after {attempts} attempts: {reason}")]
    EndpointFailure { attempts: u32, reason: String },
    #[error("endpoint timed out on all {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("config error: {0}")]
    Config(String),
    #[error("transcript error: {0}")]
    Transcript(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Scene(#[from] SceneErrorText),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Scene errors carry an `io::Error`, so keep only the message.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{0}")]
pub struct SceneErrorText(pub String);

impl From<SceneError> for BridgeError {
    fn from(e: SceneError) -> Self {
        BridgeError::Scene(SceneErrorText(e.to_string()))
    }
}

impl BridgeError {
    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        BridgeError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}
