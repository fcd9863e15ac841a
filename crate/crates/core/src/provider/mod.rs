//! Model backends and assembly extraction.
//!
//! Three backends share the [`Provider`] trait: a live OpenAI-compatible
//! chat-completion client, a replay archive keyed by request digest, and a
//! scripted table of canned responses for tests.

mod archive;
mod extract;
mod http;
mod scripted;

use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use archive::{record, ArchiveEntry, ReplayProvider};
pub use extract::{extract_assembly, AsmArtifact, ExtractError, ExtractionMethod};
pub use http::{BackoffPolicy, HttpChatProvider};
pub use scripted::ScriptedProvider;

pub const DEFAULT_TEMPERATURE: f64 = 0.8;
pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 4096;
pub const DEFAULT_REQUEST_TIMEOUT_MS: u64 = 120_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    HttpChat,
    Replay,
    Scripted,
}

impl ProviderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProviderKind::HttpChat => "http-chat",
            ProviderKind::Replay => "replay",
            ProviderKind::Scripted => "scripted",
        }
    }
}

impl std::str::FromStr for ProviderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "http-chat" => Ok(ProviderKind::HttpChat),
            "replay" => Ok(ProviderKind::Replay),
            "scripted" => Ok(ProviderKind::Scripted),
            other => Err(format!("unknown provider kind `{other}` (expected http-chat, replay or scripted)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint: Option<String>,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub request_timeout_ms: u64,
    /// Name of the environment variable holding the API key. The key itself
    /// is never stored.
    pub api_key_env: Option<String>,
    /// Replay source; for other kinds, where responses are recorded.
    pub archive: Option<PathBuf>,
    /// Root of a scripted response table.
    pub script: Option<PathBuf>,
    pub max_in_flight: usize,
    pub requests_per_minute: Option<u32>,
    pub max_attempts: u32,
}

impl ProviderConfig {
    pub fn new(kind: ProviderKind, model_name: impl Into<String>) -> Self {
        ProviderConfig {
            kind,
            endpoint: None,
            model_name: model_name.into(),
            temperature: DEFAULT_TEMPERATURE,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            request_timeout_ms: DEFAULT_REQUEST_TIMEOUT_MS,
            api_key_env: None,
            archive: None,
            script: None,
            max_in_flight: 4,
            requests_per_minute: None,
            max_attempts: 5,
        }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        let bad = |m: &str| Err(ProviderError::Config(m.to_string()));
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return bad("temperature must be a finite number >= 0");
        }
        if self.max_output_tokens == 0 {
            return bad("max_output_tokens must be positive");
        }
        if self.request_timeout_ms == 0 {
            return bad("request_timeout_ms must be positive");
        }
        if self.model_name.trim().is_empty() {
            return bad("model name is empty");
        }
        match self.kind {
            ProviderKind::HttpChat if self.endpoint.is_none() => bad("http-chat provider needs an endpoint"),
            ProviderKind::HttpChat if self.api_key_env.is_none() => bad("http-chat provider needs api_key_env"),
            ProviderKind::HttpChat if self.max_attempts == 0 || self.max_in_flight == 0 => {
                bad("max_attempts and max_in_flight must be positive")
            }
            ProviderKind::Replay if self.archive.is_none() => bad("replay provider needs an archive directory"),
            ProviderKind::Scripted if self.script.is_none() => bad("scripted provider needs a script directory"),
            _ => Ok(()),
        }
    }
}

/// One generation call. `case_id` is only used by the scripted backend;
/// the digest covers exactly the prompt, model, sample index and temperature.
#[derive(Debug, Clone, Copy)]
pub struct GenerationRequest<'a> {
    pub prompt: &'a str,
    pub case_id: &'a str,
    pub sample_index: u32,
    /// Zero for the initial attempt, then one per feedback round.
    pub round: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenerationResult {
    pub raw_text: String,
    pub latency_ms: u64,
    pub request_digest: String,
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("credential environment variable `{0}` is not set")]
    CredentialMissing(String),
    #[error("replay archive has no entry for request digest {digest}")]
    ReplayMiss { digest: String },
    #[error("scripted provider has no response for case `{case}` sample {index}")]
    ScriptMiss { case: String, index: u32 },
    #[error("request timed out after {attempts} attempt(s)")]
    ProviderTimeout { attempts: u32 },
    #[error("provider rejected the request with HTTP {status}: {body}")]
    ProviderRejected { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("cannot write archive entry {path}: {source}")]
    ArchiveWriteError { path: PathBuf, source: std::io::Error },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid provider configuration: {0}")]
    Config(String),
}

/// Stable digest of a generation request.
pub fn request_digest(prompt: &str, model_name: &str, sample_index: u32, temperature: f64) -> String {
    let mut buf = Vec::with_capacity(prompt.len() + model_name.len() + 48);
    buf.extend_from_slice(prompt.as_bytes());
    buf.push(0);
    buf.extend_from_slice(model_name.as_bytes());
    buf.push(0);
    buf.extend_from_slice(sample_index.to_string().as_bytes());
    buf.push(0);
    // `{:?}` is the shortest round-trip representation, so equal values hash equally.
    buf.extend_from_slice(format!("{temperature:?}").as_bytes());
    crate::sha256_hex(buf)
}

pub trait Provider: Send + Sync {
    fn config(&self) -> &ProviderConfig;

    /// Produces the raw response text for a request whose digest is `digest`.
    fn respond(&self, req: &GenerationRequest<'_>, digest: &str) -> Result<String, ProviderError>;

    fn generate(&self, req: &GenerationRequest<'_>) -> Result<GenerationResult, ProviderError> {
        let cfg = self.config();
        let digest = request_digest(req.prompt, &cfg.model_name, req.sample_index, cfg.temperature);
        let start = Instant::now();
        let raw_text = self.respond(req, &digest)?;
        Ok(GenerationResult {
            raw_text,
            latency_ms: start.elapsed().as_millis() as u64,
            request_digest: digest,
        })
    }
}

/// Instantiates the backend described by `cfg`.
pub fn open_provider(cfg: &ProviderConfig) -> Result<Box<dyn Provider>, ProviderError> {
    cfg.validate()?;
    Ok(match cfg.kind {
        ProviderKind::HttpChat => Box::new(HttpChatProvider::new(cfg.clone())?),
        ProviderKind::Replay => Box::new(ReplayProvider::new(cfg.clone())),
        ProviderKind::Scripted => Box::new(ScriptedProvider::from_dir(cfg.clone())?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_input_sensitive() {
        let d = request_digest("p", "m", 0, 0.8);
        assert_eq!(d, request_digest("p", "m", 0, 0.8));
        assert_eq!(d.len(), 64);
        assert_ne!(d, request_digest("p", "m", 1, 0.8));
        assert_ne!(d, request_digest("p", "m2", 0, 0.8));
        assert_ne!(d, request_digest("p ", "m", 0, 0.8));
        assert_ne!(d, request_digest("p", "m", 0, 0.7));
        // Field separators keep ("ab","c") and ("a","bc") apart.
        assert_ne!(request_digest("ab", "c", 0, 0.0), request_digest("a", "bc", 0, 0.0));
    }

    #[test]
    fn config_validation() {
        let mut c = ProviderConfig::new(ProviderKind::HttpChat, "gpt");
        assert!(c.validate().is_err());
        c.endpoint = Some("http://localhost:1/v1/chat/completions".into());
        c.api_key_env = Some("KEY".into());
        c.validate().unwrap();
        c.temperature = -0.1;
        assert!(c.validate().is_err());

        let c = ProviderConfig::new(ProviderKind::Replay, "gpt");
        assert!(c.validate().is_err());
        let mut c = ProviderConfig::new(ProviderKind::Scripted, "script");
        c.script = Some("s".into());
        c.validate().unwrap();
    }

    #[test]
    fn kind_round_trips_through_str() {
        for k in [ProviderKind::HttpChat, ProviderKind::Replay, ProviderKind::Scripted] {
            assert_eq!(k.as_str().parse::<ProviderKind>().unwrap(), k);
        }
        assert!("openai".parse::<ProviderKind>().is_err());
    }
}
