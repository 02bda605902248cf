//! Vendor-neutral remote endpoint: POST `{prompt, text_input?, media_manifest?}`,
//! read `{text}`.

use std::fs;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::{Backend, GatewayError, GenerationRequest, PromptProfile, RequestInput};

pub const ENV_ENDPOINT_URL: &str = "FF_ENDPOINT_URL";
pub const ENV_TIMEOUT_S: &str = "FF_TIMEOUT_S";
pub const ENV_MAX_RETRIES: &str = "FF_MAX_RETRIES";
pub const ENV_BEARER_TOKEN: &str = "FF_BEARER_TOKEN";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemoteConfig {
    pub endpoint_url: String,
    pub timeout_s: f64,
    pub max_retries: u32,
    pub backoff_base_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bearer_token: Option<String>,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            endpoint_url: String::new(),
            timeout_s: 60.0,
            max_retries: 2,
            backoff_base_s: 0.5,
            bearer_token: None,
        }
    }
}

impl RemoteConfig {
    /// Overrides fields from `FF_*` variables returned by `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), GatewayError> {
        if let Some(url) = lookup(ENV_ENDPOINT_URL) {
            self.endpoint_url = url;
        }
        if let Some(t) = lookup(ENV_TIMEOUT_S) {
            self.timeout_s = t
                .parse()
                .map_err(|_| GatewayError::Config(format!("{ENV_TIMEOUT_S}={t:?} is not a number")))?;
        }
        if let Some(r) = lookup(ENV_MAX_RETRIES) {
            self.max_retries = r
                .parse()
                .map_err(|_| GatewayError::Config(format!("{ENV_MAX_RETRIES}={r:?} is not a count")))?;
        }
        if let Some(token) = lookup(ENV_BEARER_TOKEN) {
            self.bearer_token = Some(token);
        }
        Ok(())
    }

    pub fn from_env() -> Result<Self, GatewayError> {
        let mut c = RemoteConfig::default();
        c.apply_env(|k| std::env::var(k).ok())?;
        Ok(c)
    }

    pub fn check(&self) -> Result<(), GatewayError> {
        if self.endpoint_url.is_empty() {
            return Err(GatewayError::Config(format!("no endpoint URL (set {ENV_ENDPOINT_URL})")));
        }
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return Err(GatewayError::Config(format!("timeout {} s must be positive", self.timeout_s)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("timed out: {0}")]
    Timeout(String),
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
}

/// Sends one JSON POST and returns the 2xx response body.
pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        body: &Value,
        timeout: Duration,
        bearer_token: Option<&str>,
    ) -> Result<String, TransportError>;
}

/// Blocking HTTP client.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new() -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(HttpTransport { client })
    }
}

impl Transport for HttpTransport {
    fn post_json(
        &self,
        url: &str,
        body: &Value,
        timeout: Duration,
        bearer_token: Option<&str>,
    ) -> Result<String, TransportError> {
        let mut req = self.client.post(url).timeout(timeout).json(body);
        if let Some(token) = bearer_token {
            req = req.bearer_auth(token);
        }
        let classify = |e: reqwest::Error| {
            if e.is_timeout() {
                TransportError::Timeout(e.to_string())
            } else {
                TransportError::Connect(e.to_string())
            }
        };
        let resp = req.send().map_err(classify)?;
        let status = resp.status();
        let text = resp.text().map_err(classify)?;
        if !status.is_success() {
            return Err(TransportError::Status {
                status: status.as_u16(),
                body: text,
            });
        }
        Ok(text)
    }
}

pub struct RemoteBackend {
    id: String,
    config: RemoteConfig,
    transport: Box<dyn Transport>,
}

impl RemoteBackend {
    pub fn new(id: impl Into<String>, config: RemoteConfig, transport: Box<dyn Transport>) -> Result<Self, GatewayError> {
        config.check()?;
        Ok(RemoteBackend {
            id: id.into(),
            config,
            transport,
        })
    }

    pub fn http(id: impl Into<String>, config: RemoteConfig) -> Result<Self, GatewayError> {
        Self::new(id, config, Box::new(HttpTransport::new()?))
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    /// The JSON body sent for `request`.
    pub fn body(&self, request: &GenerationRequest, profile: &PromptProfile) -> Result<Value, GatewayError> {
        let mut body = json!({ "prompt": profile.render(request) });
        match &request.input {
            RequestInput::Text(t) => body["text_input"] = Value::String(t.clone()),
            RequestInput::Frames(dir) => {
                let path = if dir.is_dir() { dir.join("frameset.json") } else { dir.clone() };
                let text = fs::read_to_string(&path)
                    .map_err(|e| GatewayError::InvalidRequest(format!("{}: {e}", path.display())))?;
                let manifest: Value = serde_json::from_str(&text)
                    .map_err(|e| GatewayError::InvalidRequest(format!("{}: {e}", path.display())))?;
                body["media_manifest"] = manifest;
            }
        }
        Ok(body)
    }

    fn unavailable(&self, message: String) -> GatewayError {
        GatewayError::BackendUnavailable {
            backend: self.id.clone(),
            message,
        }
    }
}

fn reply_text(body: &str) -> Result<String, String> {
    let v: Value = serde_json::from_str(body).map_err(|e| format!("not JSON: {e}"))?;
    match v.get("text") {
        Some(Value::String(s)) if !s.trim().is_empty() => Ok(s.trim().to_string()),
        Some(Value::String(_)) => Err("empty text field".into()),
        Some(_) => Err("text field is not a string".into()),
        None => Err("no text field".into()),
    }
}

impl Backend for RemoteBackend {
    fn id(&self) -> &str {
        &self.id
    }

    /// Retries timeouts only, with exponential backoff; every other failure
    /// is returned at once.
    fn generate(&self, request: &GenerationRequest, profile: &PromptProfile) -> Result<String, GatewayError> {
        let body = self.body(request, profile)?;
        let timeout = Duration::from_secs_f64(self.config.timeout_s);
        let mut attempt = 0;
        loop {
            match self
                .transport
                .post_json(&self.config.endpoint_url, &body, timeout, self.config.bearer_token.as_deref())
            {
                Ok(reply) => {
                    return reply_text(&reply).map_err(|message| GatewayError::MalformedResponse {
                        backend: self.id.clone(),
                        message,
                    })
                }
                Err(TransportError::Timeout(m)) if attempt < self.config.max_retries => {
                    let wait = self.config.backoff_base_s * 2f64.powi(attempt as i32);
                    log::warn!("{}: {m}; retry {} in {wait} s", self.id, attempt + 1);
                    thread::sleep(Duration::from_secs_f64(wait));
                    attempt += 1;
                }
                Err(e) => return Err(self.unavailable(e.to_string())),
            }
        }
    }
}
