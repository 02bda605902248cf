//! Text-generation backends behind one interface: the local rules engine and
//! a vendor-neutral remote JSON endpoint.

mod batch;
mod local;
mod prompt;
mod remote;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use shipcast_core::bulletin::Attribute;
use thiserror::Error;

pub use batch::batch_generate;
pub use local::LocalBackend;
pub use prompt::{FewShot, PromptProfile, PromptProfiles};
pub use remote::{HttpTransport, RemoteBackend, RemoteConfig, Transport, TransportError};

#[derive(Debug, Clone, Error, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GatewayError {
    #[error("backend {backend} unavailable: {message}")]
    BackendUnavailable { backend: String, message: String },
    #[error("backend {backend} sent a malformed response: {message}")]
    MalformedResponse { backend: String, message: String },
    #[error("unknown backend {0:?}")]
    UnknownBackend(String),
    #[error("unknown prompt profile {0:?}")]
    UnknownProfile(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("configuration error: {0}")]
    Config(String),
}

/// Model input: a frame-set directory or a textual data summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestInput {
    Frames(PathBuf),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub attribute: Attribute,
    pub area: String,
    pub input: RequestInput,
    pub prompt_profile: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationResponse {
    pub text: String,
    pub latency_ms: u64,
    pub backend_id: String,
}

/// A text generator. Implementations must accept concurrent calls.
pub trait Backend: Send + Sync {
    fn id(&self) -> &str;

    fn generate(&self, request: &GenerationRequest, profile: &PromptProfile) -> Result<String, GatewayError>;
}

/// Registered backends plus the prompt profiles they draw on.
#[derive(Clone)]
pub struct Gateway {
    backends: BTreeMap<String, Arc<dyn Backend>>,
    profiles: PromptProfiles,
}

impl Gateway {
    pub fn new(profiles: PromptProfiles) -> Self {
        Gateway {
            backends: BTreeMap::new(),
            profiles,
        }
    }

    /// Built-in prompt profiles and the local backend.
    pub fn with_local() -> Self {
        let mut g = Gateway::new(PromptProfiles::builtin());
        g.register(Arc::new(LocalBackend::default()));
        g
    }

    pub fn register(&mut self, backend: Arc<dyn Backend>) {
        self.backends.insert(backend.id().to_string(), backend);
    }

    pub fn backend_ids(&self) -> impl Iterator<Item = &str> {
        self.backends.keys().map(String::as_str)
    }

    pub fn profiles(&self) -> &PromptProfiles {
        &self.profiles
    }

    pub fn generate(&self, request: &GenerationRequest, backend_id: &str) -> Result<GenerationResponse, GatewayError> {
        let backend = self
            .backends
            .get(backend_id)
            .ok_or_else(|| GatewayError::UnknownBackend(backend_id.to_string()))?;
        let profile = self.profiles.get(&request.prompt_profile)?;
        let started = Instant::now();
        let text = backend.generate(request, profile)?;
        if text.trim().is_empty() {
            return Err(GatewayError::MalformedResponse {
                backend: backend_id.to_string(),
                message: "empty text".into(),
            });
        }
        let response = GenerationResponse {
            text,
            latency_ms: started.elapsed().as_millis() as u64,
            backend_id: backend_id.to_string(),
        };
        log::debug!("{backend_id} {} {}: {} ms", request.area, request.attribute, response.latency_ms);
        Ok(response)
    }
}
