//! Hub configuration file.
//!
//! ```json
//! {"port": 7878, "tick_hz": 60, "policy": {"duration": 1.0},
//!  "ruleset_path": "rules.default.json", "content_library_path": "library.jsonl"}
//! ```
//!
//! Relative paths resolve against the directory holding the config file.

use std::path::{Path, PathBuf};

use crossdrop_core::{load_library, load_ruleset, ConfigError, CoreError, DSelectionConfig, DTransferPolicy};
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, EngineConfig};

pub const DEFAULT_PORT: u16 = 7878;
pub const DEFAULT_TICK_HZ: u32 = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubConfig {
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_tick_hz")]
    pub tick_hz: u32,
    #[serde(default)]
    pub policy: DTransferPolicy,
    pub ruleset_path: PathBuf,
    pub content_library_path: PathBuf,
    #[serde(default)]
    pub selection: DSelectionConfig,
    /// Seconds without traffic before a session is dropped.
    #[serde(default = "default_session_timeout")]
    pub session_timeout: Option<f64>,
}

fn default_port() -> u16 {
    DEFAULT_PORT
}

fn default_tick_hz() -> u32 {
    DEFAULT_TICK_HZ
}

fn default_session_timeout() -> Option<f64> {
    Some(30.0)
}

impl HubConfig {
    /// Reads and validates a config file, resolving relative paths.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(path, format!("cannot read hub config: {e}")))?;
        let mut cfg: HubConfig = serde_json::from_str(&text).map_err(|e| ConfigError::from_json(path, &e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.ruleset_path = base.join(&cfg.ruleset_path);
        cfg.content_library_path = base.join(&cfg.content_library_path);
        cfg.validate(path)?;
        Ok(cfg)
    }

    fn validate(&self, path: &Path) -> Result<(), ConfigError> {
        if self.tick_hz == 0 {
            return Err(ConfigError::new(path, "tick_hz must be positive"));
        }
        self.policy
            .validate()
            .map_err(|e| ConfigError::new(path, format!("policy: {e}")))?;
        self.selection
            .validate()
            .map_err(|e| ConfigError::new(path, format!("selection: {e}")))?;
        if let Some(t) = self.session_timeout {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError::new(path, "session_timeout must be positive"));
            }
        }
        Ok(())
    }

    /// Loads the ruleset and content library and builds a fresh engine.
    pub fn build_engine(&self) -> Result<Engine, CoreError> {
        let rules = load_ruleset(&self.ruleset_path)?;
        let contents = load_library(&self.content_library_path)?;
        Ok(Engine::with_contents(
            contents,
            EngineConfig {
                policy: self.policy,
                selection: self.selection,
                rules,
                session_timeout: self.session_timeout,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hub.json");
        std::fs::write(&path, r#"{"ruleset_path":"r.json","content_library_path":"lib.jsonl","policy":{"duration":0.5}}"#).unwrap();
        let cfg = HubConfig::load(&path).unwrap();
        assert_eq!(cfg.port, DEFAULT_PORT);
        assert_eq!(cfg.tick_hz, 60);
        assert_eq!(cfg.policy.duration, 0.5);
        assert_eq!(cfg.ruleset_path, dir.path().join("r.json"));
    }

    #[test]
    fn bad_values_are_config_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hub.json");
        std::fs::write(&path, "{\"tick_hz\":0,\"ruleset_path\":\"r\",\"content_library_path\":\"l\"}").unwrap();
        assert!(HubConfig::load(&path).unwrap_err().message.contains("tick_hz"));
        std::fs::write(&path, "{\n\"port\": \"x\"}").unwrap();
        assert_eq!(HubConfig::load(&path).unwrap_err().location.map(|l| l.0), Some(2));
    }
}
