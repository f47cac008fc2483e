//! Text-generation backends.
//!
//! The pipeline is backend-agnostic: anything that can turn a
//! [`PromptBundle`](crate::prompt::PromptBundle) into answer text implements
//! [`Backend`]. Two implementations ship here: an HTTP chat-completion
//! client ([`http::HttpBackend`]) for live models, and a deterministic
//! rules backend ([`rules::RulesBackend`]) that makes runs reproducible and
//! CI hermetic, with optional fault injection ([`faults`]) to exercise the
//! failure paths on purpose.

pub mod extract;
pub mod faults;
pub mod http;
pub mod rules;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::prompt::PromptBundle;

pub use extract::{extract_class, extract_lld, split_config_bundle, ExtractionError};
pub use faults::{FaultKind, FaultPlan, FaultSchedule, FaultSpec};

/// Decoding parameters sent with every completion request. The default
/// temperature of zero deliberately nullifies sampling creativity:
/// configuration generation wants the mode, not a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingParams {
    pub temperature: f64,
    pub max_tokens: u32,
    pub stop: Vec<String>,
}

impl Default for DecodingParams {
    fn default() -> Self {
        Self { temperature: 0.0, max_tokens: 2048, stop: Vec::new() }
    }
}

#[derive(Debug, Error)]
pub enum BackendError {
    /// Transport-level failure that persisted through retries.
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    /// The request ran past the configured timeout.
    #[error("backend timed out after {0} seconds")]
    Timeout(u64),
    /// The response arrived but does not follow the wire contract.
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    /// The response carried no usable text.
    #[error("backend returned an empty completion")]
    EmptyCompletion,
    /// The rules backend (strict mode) has no rule for this prompt.
    #[error("no rule matches the prompt: {0}")]
    RuleMiss(String),
}

/// A text-generation backend: one blocking completion per call.
///
/// Implementations must be deterministic for identical prompts whenever they
/// claim to be (the rules backend does; an HTTP model served with
/// temperature 0 usually is, but that is the server's promise, not ours).
pub trait Backend: Send + Sync {
    fn complete(&self, prompt: &PromptBundle, params: &DecodingParams)
        -> Result<String, BackendError>;
}

/// Which backend implementation to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Http,
    Rules,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Http => write!(f, "http"),
            BackendKind::Rules => write!(f, "rules"),
        }
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "http" => Ok(BackendKind::Http),
            "rules" => Ok(BackendKind::Rules),
            other => Err(format!("unknown backend kind '{other}' (expected http or rules)")),
        }
    }
}

/// Everything needed to construct a backend.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendDescriptor {
    pub kind: BackendKind,
    pub endpoint_url: Option<String>,
    pub model_name: Option<String>,
    /// Per-request timeout in seconds.
    pub timeout_s: u64,
    /// Maximum concurrent in-flight requests (HTTP backend).
    pub max_in_flight: usize,
}

/// Environment variables consulted by [`BackendDescriptor::http_from_env`].
pub const ENV_URL: &str = "NETCFG_LLM_URL";
pub const ENV_MODEL: &str = "NETCFG_LLM_MODEL";
pub const ENV_TIMEOUT_S: &str = "NETCFG_LLM_TIMEOUT_S";

pub const DEFAULT_TIMEOUT_S: u64 = 600;
pub const DEFAULT_MAX_IN_FLIGHT: usize = 1;

impl BackendDescriptor {
    pub fn rules() -> Self {
        Self {
            kind: BackendKind::Rules,
            endpoint_url: None,
            model_name: None,
            timeout_s: DEFAULT_TIMEOUT_S,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
        }
    }

    pub fn http(url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            kind: BackendKind::Http,
            endpoint_url: Some(url.into()),
            model_name: Some(model.into()),
            timeout_s: DEFAULT_TIMEOUT_S,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
        }
    }

    /// Build an HTTP descriptor from `NETCFG_LLM_URL`, `NETCFG_LLM_MODEL`,
    /// and `NETCFG_LLM_TIMEOUT_S`. Returns `None` when no URL is set.
    pub fn http_from_env() -> Option<Self> {
        let url = std::env::var(ENV_URL).ok().filter(|u| !u.trim().is_empty())?;
        let model = std::env::var(ENV_MODEL).unwrap_or_else(|_| "default".to_string());
        let timeout_s = std::env::var(ENV_TIMEOUT_S)
            .ok()
            .and_then(|t| t.parse().ok())
            .unwrap_or(DEFAULT_TIMEOUT_S);
        Some(Self { timeout_s, ..Self::http(url, model) })
    }
}

/// Construct the backend a descriptor names.
pub fn build_backend(descriptor: &BackendDescriptor) -> Result<Arc<dyn Backend>, BackendError> {
    match descriptor.kind {
        BackendKind::Rules => Ok(Arc::new(rules::RulesBackend::new())),
        BackendKind::Http => {
            let url = descriptor.endpoint_url.clone().ok_or_else(|| {
                BackendError::Unavailable("http backend requires an endpoint url".into())
            })?;
            let model = descriptor.model_name.clone().unwrap_or_else(|| "default".into());
            Ok(Arc::new(http::HttpBackend::new(
                url,
                model,
                descriptor.timeout_s,
                descriptor.max_in_flight,
            )?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoding_defaults_nullify_creativity() {
        let params = DecodingParams::default();
        assert_eq!(params.temperature, 0.0);
        assert!(params.stop.is_empty());
    }

    #[test]
    fn descriptor_env_round_trip() {
        // Serially safe: no other test in this module touches these vars.
        std::env::set_var(ENV_URL, "http://127.0.0.1:9/v1/chat/completions");
        std::env::set_var(ENV_MODEL, "test-model");
        std::env::set_var(ENV_TIMEOUT_S, "12");
        let desc = BackendDescriptor::http_from_env().unwrap();
        assert_eq!(desc.kind, BackendKind::Http);
        assert_eq!(desc.model_name.as_deref(), Some("test-model"));
        assert_eq!(desc.timeout_s, 12);
        std::env::remove_var(ENV_URL);
        std::env::remove_var(ENV_MODEL);
        std::env::remove_var(ENV_TIMEOUT_S);
        assert!(BackendDescriptor::http_from_env().is_none());
    }

    #[test]
    fn build_rejects_http_without_url() {
        let desc = BackendDescriptor { endpoint_url: None, ..BackendDescriptor::http("x", "m") };
        assert!(build_backend(&desc).is_err());
    }

    #[test]
    fn backend_kind_parses() {
        assert_eq!("rules".parse::<BackendKind>().unwrap(), BackendKind::Rules);
        assert_eq!("HTTP".parse::<BackendKind>().unwrap(), BackendKind::Http);
        assert!("llama".parse::<BackendKind>().is_err());
    }
}
