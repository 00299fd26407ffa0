//! Environment configuration and backend wiring shared by the server and the CLI.

use std::net::SocketAddr;
use std::path::PathBuf;

use teaser_core::llm::{CompletionBackend, GatewayError, MockBackend, RemoteBackend, RemoteConfig};
use teaser_core::production::{default_library, parse_manifest, MusicError, MusicTrackMeta};

use crate::workflow::{BackendChoice, Engine};

pub const DEFAULT_STORE_DIR: &str = "teaser-store";
pub const DEFAULT_BIND_ADDR: &str = "127.0.0.1:8080";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{var}: {message}")]
    Var { var: &'static str, message: String },
    #[error("music manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub store_dir: PathBuf,
    pub bind_addr: SocketAddr,
    /// Default backend for extraction requests that do not name one.
    pub backend: BackendChoice,
    pub music_manifest: Option<PathBuf>,
    /// Root that render scripts resolve media, music and logo references against.
    pub asset_root: PathBuf,
}

impl ServiceConfig {
    /// Reads `STORE_DIR`, `BIND_ADDR`, `LLM_BACKEND`, `MUSIC_MANIFEST` and `ASSET_ROOT`.
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let bind = get("BIND_ADDR").unwrap_or_else(|| DEFAULT_BIND_ADDR.into());
        let bind_addr = bind.parse().map_err(|e| ConfigError::Var {
            var: "BIND_ADDR",
            message: format!("{bind:?}: {e}"),
        })?;
        let backend = match get("LLM_BACKEND") {
            Some(v) => v.parse().map_err(|message| ConfigError::Var {
                var: "LLM_BACKEND",
                message,
            })?,
            // a configured endpoint implies the remote model
            None if get("LLM_ENDPOINT").is_some() => BackendChoice::Llm,
            None => BackendChoice::Mock,
        };
        Ok(ServiceConfig {
            store_dir: get("STORE_DIR").unwrap_or_else(|| DEFAULT_STORE_DIR.into()).into(),
            bind_addr,
            backend,
            music_manifest: get("MUSIC_MANIFEST").map(PathBuf::from),
            asset_root: get("ASSET_ROOT").unwrap_or_else(|| ".".into()).into(),
        })
    }
}

/// The bundled library, or the manifest at `path`.
pub fn load_library(path: Option<&PathBuf>) -> Result<Vec<MusicTrackMeta>, ConfigError> {
    let Some(path) = path else { return Ok(default_library()) };
    let bad = |message: String| ConfigError::Manifest {
        path: path.clone(),
        message,
    };
    let bytes = std::fs::read(path).map_err(|e| bad(e.to_string()))?;
    parse_manifest(&bytes).map_err(|e: MusicError| bad(e.to_string()))
}

/// The offline mock and, when configured, the remote model.
pub struct Backends {
    pub mock: MockBackend,
    pub remote: Option<RemoteBackend>,
    pub library: Vec<MusicTrackMeta>,
}

impl Backends {
    /// Builds the remote client only if `LLM_ENDPOINT` is set.
    pub fn from_env(library: Vec<MusicTrackMeta>) -> Result<Self, GatewayError> {
        let remote = match std::env::var("LLM_ENDPOINT") {
            Ok(_) => Some(RemoteBackend::new(RemoteConfig::from_env()?)?),
            Err(_) => None,
        };
        Ok(Backends {
            mock: MockBackend::default(),
            remote,
            library,
        })
    }

    pub fn offline(library: Vec<MusicTrackMeta>) -> Self {
        Backends {
            mock: MockBackend::default(),
            remote: None,
            library,
        }
    }

    pub fn engine(&self, choice: BackendChoice) -> Engine<'_> {
        let model: Option<&dyn CompletionBackend> = match choice {
            BackendChoice::Heuristic => None,
            BackendChoice::Mock => Some(&self.mock),
            BackendChoice::Llm => self.remote.as_ref().map(|r| r as &dyn CompletionBackend),
        };
        Engine {
            model,
            library: &self.library,
        }
    }
}
