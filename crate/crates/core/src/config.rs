//! One TOML document holding every tunable. Missing tables and keys fall
//! back to defaults.
//!
//! ```toml
//! [world]
//! done_required = true
//! [world.kinematics]
//! step_len = 0.1
//!
//! [agent]
//! kind = "classic"
//! [agent.localizer]
//! kind = "scanmatch"
//!
//! [suite]
//! parallel = 8
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::AgentConfig;
use crate::harness::{ScenarioGenConfig, WorldConfig};
use crate::world::GeneratorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub parallel: usize,
    pub seed: u64,
    pub trajectories: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            parallel: 1,
            seed: 0,
            trajectories: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct NavbenchConfig {
    pub world: WorldConfig,
    pub agent: AgentConfig,
    pub suite: SuiteConfig,
    pub generator: GeneratorConfig,
    pub scenarios: ScenarioGenConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid: {0}")]
    Invalid(String),
}

impl NavbenchConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.agent.validate().map_err(ConfigError::Invalid)?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
