//! HTTP chat-completion backend.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde_json::{json, Value};

use super::{BackendKind, CompletionBackend, GatewayError};

pub const MAX_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub max_in_flight: usize,
    pub timeout: Duration,
    pub backoff: Duration,
}

impl RemoteConfig {
    /// Reads `LLM_ENDPOINT`, `LLM_MODEL` and `LLM_API_KEY`.
    pub fn from_env() -> Result<Self, GatewayError> {
        let endpoint = std::env::var("LLM_ENDPOINT")
            .map_err(|_| GatewayError::BackendUnavailable("LLM_ENDPOINT is not set".into()))?;
        Ok(RemoteConfig {
            model: std::env::var("LLM_MODEL").unwrap_or_else(|_| "gpt-4".into()),
            api_key: std::env::var("LLM_API_KEY").ok(),
            ..RemoteConfig::new(endpoint)
        })
    }

    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            model: "gpt-4".into(),
            api_key: None,
            max_in_flight: 4,
            timeout: Duration::from_secs(120),
            backoff: Duration::from_millis(500),
        }
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
    in_flight: Mutex<usize>,
    slot_freed: Condvar,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GatewayError::Transport(e.to_string()))?;
        Ok(RemoteBackend {
            config,
            client,
            in_flight: Mutex::new(0),
            slot_freed: Condvar::new(),
        })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn acquire(&self) {
        let cap = self.config.max_in_flight.max(1);
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        while *n >= cap {
            n = self.slot_freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n += 1;
    }

    fn release(&self) {
        let mut n = self.in_flight.lock().unwrap_or_else(|e| e.into_inner());
        *n -= 1;
        self.slot_freed.notify_one();
    }

    fn send_once(&self, prompt: &str) -> Result<String, Attempt> {
        let body = json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.client.post(&self.config.endpoint).json(&body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Attempt::Fatal(GatewayError::Transport(e.to_string())))?;
        let status = resp.status();
        if status.as_u16() == 429 {
            return Err(Attempt::RateLimited);
        }
        if status.is_server_error() {
            return Err(Attempt::Fatal(GatewayError::BackendUnavailable(format!("HTTP {status}"))));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(GatewayError::Transport(format!("HTTP {status}"))));
        }
        let v: Value = resp
            .json()
            .map_err(|e| Attempt::Fatal(GatewayError::Transport(e.to_string())))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| Attempt::Fatal(GatewayError::Transport("reply has no message content".into())))
    }
}

enum Attempt {
    RateLimited,
    Fatal(GatewayError),
}

impl CompletionBackend for RemoteBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Remote
    }

    fn complete(&self, prompt: &str) -> Result<String, GatewayError> {
        self.acquire();
        let mut result = Err(GatewayError::RateLimited { attempts: MAX_ATTEMPTS });
        for attempt in 1..=MAX_ATTEMPTS {
            match self.send_once(prompt) {
                Ok(text) => {
                    result = Ok(text);
                    break;
                }
                Err(Attempt::Fatal(e)) => {
                    result = Err(e);
                    break;
                }
                Err(Attempt::RateLimited) if attempt < MAX_ATTEMPTS => {
                    let wait = self.config.backoff * 2u32.pow(attempt as u32 - 1);
                    tracing::warn!(attempt, ?wait, "rate limited by completion endpoint");
                    std::thread::sleep(wait);
                }
                Err(Attempt::RateLimited) => {}
            }
        }
        self.release();
        result
    }
}
