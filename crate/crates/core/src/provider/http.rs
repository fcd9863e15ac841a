use std::time::Duration;

use serde_json::{json, Value};

use super::{GenerationRequest, Provider, ProviderConfig, ProviderError};
use crate::sync::{Semaphore, TokenBucket};

/// Retry schedule for transient failures (HTTP 429, 5xx, timeouts).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackoffPolicy {
    pub initial: Duration,
    pub factor: u32,
    pub max_attempts: u32,
    /// Upper bound on any single wait, including server-requested ones.
    pub max_wait: Duration,
}

impl Default for BackoffPolicy {
    fn default() -> Self {
        BackoffPolicy { initial: Duration::from_secs(1), factor: 2, max_attempts: 5, max_wait: Duration::from_secs(60) }
    }
}

impl BackoffPolicy {
    /// Wait before retry number `retry` (1-based).
    pub fn delay(&self, retry: u32) -> Duration {
        let mult = self.factor.saturating_pow(retry.saturating_sub(1));
        self.initial.saturating_mul(mult).min(self.max_wait)
    }
}

/// Client for an OpenAI-compatible `/chat/completions` endpoint.
pub struct HttpChatProvider {
    cfg: ProviderConfig,
    agent: ureq::Agent,
    backoff: BackoffPolicy,
    in_flight: Semaphore,
    bucket: Option<TokenBucket>,
}

enum Attempt {
    Done(String),
    Retry { after: Option<Duration>, timeout: bool, why: String, status: Option<(u16, String)> },
    Fail(ProviderError),
}

impl HttpChatProvider {
    pub fn new(cfg: ProviderConfig) -> Result<Self, ProviderError> {
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_millis(cfg.request_timeout_ms)).build();
        let backoff = BackoffPolicy { max_attempts: cfg.max_attempts.max(1), ..BackoffPolicy::default() };
        let in_flight = Semaphore::new(cfg.max_in_flight.max(1));
        let bucket = cfg.requests_per_minute.map(TokenBucket::per_minute);
        Ok(HttpChatProvider { cfg, agent, backoff, in_flight, bucket })
    }

    pub fn with_backoff(mut self, backoff: BackoffPolicy) -> Self {
        self.backoff = backoff;
        self
    }

    fn credential(&self) -> Result<String, ProviderError> {
        let var = self.cfg.api_key_env.clone().unwrap_or_default();
        match std::env::var(&var) {
            Ok(v) if !v.is_empty() => Ok(v),
            _ => Err(ProviderError::CredentialMissing(var)),
        }
    }

    fn body(&self, prompt: &str) -> Value {
        json!({
            "model": self.cfg.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.cfg.temperature,
            "max_tokens": self.cfg.max_output_tokens,
        })
    }

    fn attempt(&self, url: &str, key: &str, body: &Value) -> Attempt {
        if let Some(b) = &self.bucket {
            b.take();
        }
        let _permit = self.in_flight.acquire();
        let resp = self.agent.post(url).set("Authorization", &format!("Bearer {key}")).send_json(body.clone());
        match resp {
            Ok(r) => match r.into_json::<Value>() {
                Ok(v) => match v.pointer("/choices/0/message/content").and_then(Value::as_str) {
                    Some(text) => Attempt::Done(text.to_string()),
                    None => Attempt::Fail(ProviderError::MalformedResponse(truncate(&v.to_string(), 512))),
                },
                Err(e) => Attempt::Fail(ProviderError::MalformedResponse(e.to_string())),
            },
            Err(ureq::Error::Status(code, r)) => {
                let after = r
                    .header("Retry-After")
                    .and_then(|h| h.trim().parse::<f64>().ok())
                    .filter(|s| s.is_finite() && *s >= 0.0)
                    .map(Duration::from_secs_f64);
                let body = r.into_string().unwrap_or_default();
                if code == 429 || (500..600).contains(&code) {
                    Attempt::Retry { after, timeout: false, why: format!("HTTP {code}"), status: Some((code, body)) }
                } else {
                    Attempt::Fail(ProviderError::ProviderRejected { status: code, body })
                }
            }
            Err(ureq::Error::Transport(t)) => {
                let why = t.to_string();
                let timeout = why.contains("timed out") || why.contains("timeout");
                Attempt::Retry { after: None, timeout, why, status: None }
            }
        }
    }
}

fn truncate(s: &str, n: usize) -> String {
    match s.char_indices().nth(n) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_string(),
    }
}

impl Provider for HttpChatProvider {
    fn config(&self) -> &ProviderConfig {
        &self.cfg
    }

    fn respond(&self, req: &GenerationRequest<'_>, _digest: &str) -> Result<String, ProviderError> {
        let key = self.credential()?;
        let url = self.cfg.endpoint.clone().unwrap_or_default();
        let body = self.body(req.prompt);
        let mut last_timeout = false;
        let mut last_why = String::new();
        let mut last_status = None;
        for attempt in 1..=self.backoff.max_attempts {
            match self.attempt(&url, &key, &body) {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry { after, timeout, why, status } => {
                    log::warn!("attempt {attempt}/{} failed: {why}", self.backoff.max_attempts);
                    last_timeout = timeout;
                    last_why = why;
                    last_status = status;
                    if attempt < self.backoff.max_attempts {
                        let wait = after.unwrap_or_else(|| self.backoff.delay(attempt)).min(self.backoff.max_wait);
                        std::thread::sleep(wait);
                    }
                }
            }
        }
        if let Some((status, body)) = last_status {
            return Err(ProviderError::ProviderRejected { status, body });
        }
        if last_timeout {
            Err(ProviderError::ProviderTimeout { attempts: self.backoff.max_attempts })
        } else {
            Err(ProviderError::Transport(format!("giving up after {} attempts: {last_why}", self.backoff.max_attempts)))
        }
    }
}
