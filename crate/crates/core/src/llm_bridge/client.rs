use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::prompts::PromptDoc;
use super::transcript::{Transcript, TranscriptEntry};
use super::BridgeError;

pub const ENV_ENDPOINT: &str = "GROUNDKIT_ENDPOINT";
pub const ENV_MODEL: &str = "GROUNDKIT_MODEL";
pub const ENV_API_KEY: &str = "GROUNDKIT_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiveConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub api_key: Option<String>,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_retries() -> u32 {
    2
}

fn default_timeout() -> u64 {
    60
}

impl LiveConfig {
    /// Reads a TOML config (if given) and applies environment overrides.
    pub fn load(path: Option<&Path>) -> Result<LiveConfig, BridgeError> {
        Self::load_with_env(path, |k| std::env::var(k).ok())
    }

    pub fn load_with_env(path: Option<&Path>, env: impl Fn(&str) -> Option<String>) -> Result<LiveConfig, BridgeError> {
        let mut table: toml::Table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| BridgeError::io(p, e))?;
                text.parse().map_err(|e| BridgeError::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for (var, key) in [(ENV_ENDPOINT, "endpoint"), (ENV_MODEL, "model"), (ENV_API_KEY, "api_key")] {
            if let Some(v) = env(var) {
                table.insert(key.into(), toml::Value::String(v));
            }
        }
        let cfg: LiveConfig =
            toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| BridgeError::Config(e.to_string()))?;
        if cfg.endpoint.trim().is_empty() || cfg.model.trim().is_empty() {
            return Err(BridgeError::Config("endpoint and model must be set".into()));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    Timeout,
    Failed(String),
}

/// Sends one user message to a chat-completion endpoint.
pub trait ChatTransport: Send + Sync {
    fn send(&self, config: &LiveConfig, prompt: &str) -> Result<String, TransportError>;
}

/// OpenAI-compatible chat-completion over HTTPS.
pub struct HttpTransport;

#[derive(Deserialize)]
struct ChatReply {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

impl ChatTransport for HttpTransport {
    fn send(&self, config: &LiveConfig, prompt: &str) -> Result<String, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| TransportError::Failed(e.to_string()))?;
        let body = serde_json::json!({
            "model": config.model,
            "temperature": config.temperature,
            "messages": [{ "role": "user", "content": prompt }],
        });
        let mut req = client.post(&config.endpoint).json(&body);
        if let Some(key) = &config.api_key {
            req = req.bearer_auth(key);
        }
        let classify = |e: reqwest::Error| {
            if e.is_timeout() {
                TransportError::Timeout
            } else {
                TransportError::Failed(e.to_string())
            }
        };
        let reply: ChatReply =
            req.send().and_then(|r| r.error_for_status()).map_err(classify)?.json().map_err(classify)?;
        reply
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| TransportError::Failed("reply has no choices".into()))
    }
}

enum Mode {
    Replay,
    Live { config: LiveConfig, transport: Box<dyn ChatTransport> },
}

/// Answers prompts from a recorded transcript, or from a live endpoint
/// while recording every response.
pub struct CompletionClient {
    mode: Mode,
    transcript: Mutex<Transcript>,
}

impl CompletionClient {
    pub fn replay(transcript: Transcript) -> Self {
        CompletionClient { mode: Mode::Replay, transcript: Mutex::new(transcript) }
    }

    pub fn replay_file(path: impl AsRef<Path>) -> Result<Self, BridgeError> {
        Ok(Self::replay(Transcript::open_existing(path)?))
    }

    pub fn live(config: LiveConfig, transport: Box<dyn ChatTransport>, transcript: Transcript) -> Self {
        CompletionClient { mode: Mode::Live { config, transport }, transcript: Mutex::new(transcript) }
    }

    pub fn is_live(&self) -> bool {
        matches!(self.mode, Mode::Live { .. })
    }

    pub fn complete(&self, prompt: &PromptDoc) -> Result<String, BridgeError> {
        match &self.mode {
            Mode::Replay => self
                .transcript
                .lock()
                .expect("transcript lock")
                .lookup(&prompt.inputs_digest, prompt.label.as_deref())
                .map(|e| e.response.clone())
                .ok_or_else(|| BridgeError::MissingReplay(prompt.inputs_digest.clone())),
            Mode::Live { config, transport } => {
                let attempts = config.retries + 1;
                let mut last = TransportError::Failed("not attempted".into());
                for _ in 0..attempts {
                    match transport.send(config, &prompt.text) {
                        Ok(response) => {
                            let entry = TranscriptEntry {
                                digest: prompt.inputs_digest.clone(),
                                prompt: prompt.text.clone(),
                                response: response.clone(),
                                timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
                                label: prompt.label.clone(),
                            };
                            self.transcript.lock().expect("transcript lock").append(entry)?;
                            return Ok(response);
                        }
                        Err(e) => last = e,
                    }
                }
                Err(match last {
                    TransportError::Timeout => BridgeError::Timeout { attempts },
                    TransportError::Failed(reason) => BridgeError::EndpointFailure { attempts, reason },
                })
            }
        }
    }
}
