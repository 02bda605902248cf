//! The rules-based generator exposed as a backend.

use shipcast_core::area::AreaRegistry;
use shipcast_core::bulletin::{render_attribute, validate};
use shipcast_core::generator::{DataSummary, Generator};

use crate::{Backend, GatewayError, GenerationRequest, PromptProfile, RequestInput};

pub struct LocalBackend {
    id: String,
    generator: Generator,
    registry: AreaRegistry,
}

impl Default for LocalBackend {
    fn default() -> Self {
        LocalBackend::new("local", Generator::default(), AreaRegistry::builtin())
    }
}

impl LocalBackend {
    pub fn new(id: impl Into<String>, generator: Generator, registry: AreaRegistry) -> Self {
        LocalBackend {
            id: id.into(),
            generator,
            registry,
        }
    }
}

impl Backend for LocalBackend {
    fn id(&self) -> &str {
        &self.id
    }

    /// Reads the area's series from a data summary and renders the requested
    /// attribute sentence. The prompt is not used.
    fn generate(&self, request: &GenerationRequest, _profile: &PromptProfile) -> Result<String, GatewayError> {
        let RequestInput::Text(text) = &request.input else {
            return Err(GatewayError::InvalidRequest(format!(
                "backend {} needs a textual data summary",
                self.id
            )));
        };
        let summary = DataSummary::parse(text).map_err(|e| GatewayError::InvalidRequest(e.to_string()))?;
        let area = self
            .registry
            .get(&request.area)
            .ok_or_else(|| GatewayError::InvalidRequest(format!("unknown area {:?}", request.area)))?;
        let data = summary
            .areas
            .iter()
            .find(|a| a.area.eq_ignore_ascii_case(&area.name))
            .ok_or_else(|| GatewayError::InvalidRequest(format!("data summary has no {}", area.name)))?;
        let bulletin = self
            .generator
            .area_bulletin(&data.series(), area)
            .map_err(|e| GatewayError::InvalidRequest(e.to_string()))?;
        let violations = validate(&bulletin, &self.registry);
        if let Some(v) = violations.first() {
            return Err(GatewayError::MalformedResponse {
                backend: self.id.clone(),
                message: v.to_string(),
            });
        }
        Ok(render_attribute(&bulletin, request.attribute))
    }
}
