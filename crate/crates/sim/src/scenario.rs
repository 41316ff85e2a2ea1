//! Scenario files.
//!
//! ```json
//! {"name": "demo", "content_library": "lib.jsonl", "ruleset": "rules.json",
//!  "displays": [...], "script": [{"at": 0.5, "event": {"PlaceCommand": {...}}}],
//!  "end_time": 2.0}
//! ```
//!
//! Paths resolve against the scenario file's directory.

use std::path::{Path, PathBuf};

use crossdrop_core::{ConfigError, DDisplayProfile, DTransferPolicy};
use crossdrop_hub::Message;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    /// Seconds from the start of the run.
    pub at: f64,
    /// Sent by the operator, except `RegisterDisplay`, which opens a new display session.
    pub event: Message,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub content_library: PathBuf,
    pub ruleset: PathBuf,
    pub displays: Vec<DDisplayProfile>,
    pub script: Vec<ScriptEntry>,
    pub end_time: f64,
    /// Transfer policy for the run; the hub default when omitted.
    #[serde(default)]
    pub policy: DTransferPolicy,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(path, format!("cannot read scenario: {e}")))?;
        let mut s: Scenario = serde_json::from_str(&text).map_err(|e| ConfigError::from_json(path, &e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        s.content_library = base.join(&s.content_library);
        s.ruleset = base.join(&s.ruleset);
        s.validate().map_err(|m| ConfigError::new(path, m))?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.end_time >= 0.0 && self.end_time.is_finite()) {
            return Err("end_time must be finite and >= 0".into());
        }
        let mut last = 0.0;
        for (i, e) in self.script.iter().enumerate() {
            if !(e.at >= last && e.at.is_finite()) {
                return Err(format!("script entry {i}: `at` must be >= 0 and sorted"));
            }
            last = e.at;
        }
        if last > self.end_time {
            return Err(format!("end_time {} is before the last event at {last}", self.end_time));
        }
        self.policy.validate().map_err(|e| format!("policy: {e}"))
    }
}
