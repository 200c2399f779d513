//! File-backed settings shared by the command line and the service.
//!
//! Precedence is flags, then the config file, then built-in defaults.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::DEFAULT_SMOOTHING;
use crate::pipeline::{DescriptorConfig, GraspPlanConfig};
use crate::protocol::ProtocolConfig;
use crate::view_selection::EntropyMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerSettings {
    pub addr: SocketAddr,
    /// Category directories served as the session dataset.
    pub dataset: Option<PathBuf>,
    /// Point clouds served under `/objects`.
    pub objects: Option<PathBuf>,
}

impl Default for ServerSettings {
    fn default() -> Self {
        ServerSettings {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            dataset: None,
            objects: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub seed: u64,
    pub smoothing: f64,
    pub entropy: EntropyMode,
    pub descriptor: DescriptorConfig,
    pub grasp: GraspPlanConfig,
    pub protocol: ProtocolConfig,
    pub server: ServerSettings,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            seed: 0,
            smoothing: DEFAULT_SMOOTHING,
            entropy: EntropyMode::Depth,
            descriptor: DescriptorConfig::default(),
            grasp: GraspPlanConfig::default(),
            protocol: ProtocolConfig::default(),
            server: ServerSettings::default(),
        }
    }
}

impl Settings {
    /// Parses TOML or JSON, chosen by extension (`.json` is JSON, anything
    /// else TOML). Missing keys keep their defaults.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("settings serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.smoothing > 0.0) {
            return Err(Error::invalid("smoothing must be positive"));
        }
        self.descriptor.setup.validate()?;
        self.grasp.setup.validate()?;
        self.grasp.grasp.validate()?;
        self.protocol.validate()
    }
}
