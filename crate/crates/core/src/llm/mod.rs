//! Language-model gateway: prompt templates, completion backends and reply parsers.
//!
//! Every reply goes through a parser that enforces the contract stated in its
//! prompt. A contract violation is re-asked a fixed number of times before the
//! error is surfaced to the caller.

mod mock;
mod parse;
pub mod prompt;
mod remote;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use mock::MockBackend;
pub use parse::{
    parse_clip_response, parse_keyword_response, parse_single_sentence_id, parse_tagline,
    ClipRanges, ResponseError, Tagline, MAX_TAGLINE_WORDS,
};
pub use prompt::TemplateKind;
pub use remote::{RemoteBackend, RemoteConfig};

/// Number of re-asks after a reply fails its parser.
pub const CONTRACT_RETRIES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Remote,
    Mock,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GatewayError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: usize },
    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("model reply rejected after {attempts} attempts: {source}")]
    Reply {
        attempts: usize,
        #[source]
        source: ResponseError,
    },
}

/// A chat-completion backend. Implementations must be safe to call concurrently.
pub trait CompletionBackend: Send + Sync {
    fn kind(&self) -> BackendKind;

    /// Returns the raw model text for a single-turn prompt.
    fn complete(&self, prompt: &str) -> Result<String, GatewayError>;
}

impl fmt::Debug for dyn CompletionBackend + '_ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CompletionBackend({:?})", self.kind())
    }
}

/// Completes `prompt` and parses the reply, re-asking on contract failures.
pub fn complete_parsed<T>(
    backend: &dyn CompletionBackend,
    prompt: &str,
    mut parse: impl FnMut(&str) -> Result<T, ResponseError>,
) -> Result<T, GatewayError> {
    let mut attempt = 0;
    loop {
        attempt += 1;
        let reply = backend.complete(prompt)?;
        match parse(&reply) {
            Ok(v) => return Ok(v),
            Err(e) if attempt <= CONTRACT_RETRIES => {
                tracing::warn!(attempt, error = %e, "model reply rejected, asking again");
            }
            Err(e) => {
                return Err(GatewayError::Reply {
                    attempts: attempt,
                    source: e,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Flaky {
        calls: AtomicUsize,
        good_after: usize,
    }

    impl CompletionBackend for Flaky {
        fn kind(&self) -> BackendKind {
            BackendKind::Mock
        }
        fn complete(&self, _prompt: &str) -> Result<String, GatewayError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            Ok(if n >= self.good_after { "7".into() } else { "none".into() })
        }
    }

    #[test]
    fn retries_twice_then_gives_up() {
        let parse = |t: &str| parse_single_sentence_id(t, &[7]);
        let ok = Flaky { calls: AtomicUsize::new(0), good_after: 2 };
        assert_eq!(complete_parsed(&ok, "p", parse).unwrap(), 7);
        assert_eq!(ok.calls.load(Ordering::SeqCst), 3);

        let bad = Flaky { calls: AtomicUsize::new(0), good_after: 3 };
        let err = complete_parsed(&bad, "p", parse).unwrap_err();
        assert!(matches!(err, GatewayError::Reply { attempts: 3, .. }));
        assert_eq!(bad.calls.load(Ordering::SeqCst), 3);
    }
}
