use std::path::Path;
use std::time::Duration;

use moodspring_core::control::ControlConfig;
use moodspring_core::valence::ValenceMapping;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClockMode {
    /// Milliseconds since the Unix epoch.
    #[default]
    Wall,
    /// Milliseconds of audio consumed by the session; reproducible.
    Stream,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowConfig {
    pub window_secs: f64,
    pub hop_secs: f64,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            window_secs: 3.0,
            hop_secs: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AsrConfig {
    pub timeout_ms: u64,
    /// Endpoint descriptor; `MOODSPRING_ASR` takes precedence.
    pub endpoint: Option<String>,
}

impl Default for AsrConfig {
    fn default() -> Self {
        Self {
            timeout_ms: 800,
            endpoint: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionConfig {
    pub clock: ClockMode,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            clock: ClockMode::Wall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ValenceSection {
    /// Labels counted as pleasant; the rest are unpleasant.
    pub pleasant: ValenceMapping,
}

/// Contents of the TOML service config file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub control: ControlConfig,
    pub valence: ValenceSection,
    pub window: WindowConfig,
    pub asr: AsrConfig,
    pub session: SessionConfig,
}

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| ServiceError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.control.validate()?;
        let w = &self.window;
        if !(w.hop_secs > 0.0 && w.hop_secs <= w.window_secs && w.window_secs.is_finite()) {
            return Err(ServiceError::Config(format!(
                "need 0 < hop_secs ({}) <= window_secs ({})",
                w.hop_secs, w.window_secs
            )));
        }
        if self.asr.timeout_ms == 0 {
            return Err(ServiceError::Config("asr.timeout_ms must be positive".into()));
        }
        Ok(())
    }

    pub fn mapping(&self) -> &ValenceMapping {
        &self.valence.pleasant
    }

    pub fn asr_timeout(&self) -> Duration {
        Duration::from_millis(self.asr.timeout_ms)
    }

    /// Window and hop in samples at `rate`.
    pub fn window_samples(&self, rate: u32) -> (usize, usize) {
        let r = f64::from(rate);
        (
            (self.window.window_secs * r).round() as usize,
            ((self.window.hop_secs * r).round() as usize).max(1),
        )
    }
}
