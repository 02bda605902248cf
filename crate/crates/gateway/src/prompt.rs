//! Prompt profiles: system guidance, a user template and few-shot examples.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{GatewayError, GenerationRequest, RequestInput};

const DEFAULT_PROFILE: &str = include_str!("../data/prompts/default.toml");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShot {
    pub input: String,
    pub attribute: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptProfile {
    pub id: String,
    pub system: String,
    /// `{area}`, `{attribute}` and `{attribute_title}` are substituted.
    pub user_template: String,
    #[serde(default)]
    pub few_shot: Vec<FewShot>,
}

impl PromptProfile {
    pub fn from_toml(text: &str) -> Result<Self, GatewayError> {
        toml::from_str(text).map_err(|e| GatewayError::Config(format!("prompt profile: {e}")))
    }

    /// Full prompt text for a request. Input data travels separately.
    pub fn render(&self, request: &GenerationRequest) -> String {
        let mut out = self.system.trim().to_string();
        for (i, ex) in self.few_shot.iter().enumerate() {
            out.push_str(&format!(
                "\n\nExample {} ({}):\n{}\nAnswer: {}",
                i + 1,
                ex.attribute,
                ex.input.trim(),
                ex.output.trim()
            ));
        }
        let user = self
            .user_template
            .replace("{area}", &request.area)
            .replace("{attribute}", request.attribute.as_str())
            .replace("{attribute_title}", &request.attribute.title().to_lowercase());
        out.push_str("\n\n");
        out.push_str(user.trim());
        if matches!(request.input, RequestInput::Frames(_)) {
            out.push_str("\nThe attached frames show the attribute hour by hour.");
        }
        out
    }
}

/// Profiles by id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PromptProfiles {
    profiles: BTreeMap<String, PromptProfile>,
}

impl PromptProfiles {
    pub fn builtin() -> Self {
        let mut p = PromptProfiles::default();
        p.insert(PromptProfile::from_toml(DEFAULT_PROFILE).expect("built-in profile parses"));
        p
    }

    pub fn insert(&mut self, profile: PromptProfile) {
        self.profiles.insert(profile.id.clone(), profile);
    }

    /// Adds every `*.toml` profile in `dir`.
    pub fn load_dir(&mut self, dir: &Path) -> Result<(), GatewayError> {
        let entries = fs::read_dir(dir).map_err(|e| GatewayError::Config(format!("{}: {e}", dir.display())))?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        paths.sort();
        for path in paths {
            let text = fs::read_to_string(&path).map_err(|e| GatewayError::Config(format!("{}: {e}", path.display())))?;
            self.insert(PromptProfile::from_toml(&text)?);
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&PromptProfile, GatewayError> {
        self.profiles
            .get(id)
            .ok_or_else(|| GatewayError::UnknownProfile(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.profiles.keys().map(String::as_str)
    }
}
