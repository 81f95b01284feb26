//! WebSocket wire frames.

use base64::Engine;
use moodspring_core::control::ControlSignal;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Result, ServiceError};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClientFrame {
    Text {
        text: String,
    },
    Audio {
        rate: u32,
        pcm16_b64: String,
    },
    Config {
        #[serde(default)]
        session_id: Option<String>,
        /// Overrides merged onto the server's control settings.
        #[serde(default)]
        control: Option<Map<String, Value>>,
    },
}

impl ClientFrame {
    pub fn parse(raw: &str) -> Result<Self> {
        serde_json::from_str(raw).map_err(|e| ServiceError::MalformedFrame(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ServerFrame {
    Control(ControlSignal<f64>),
    Error { code: String, message: String },
    Warning { code: String, message: String },
}

impl ServerFrame {
    pub fn error(e: &ServiceError) -> Self {
        ServerFrame::Error {
            code: e.code().into(),
            message: e.to_string(),
        }
    }

    pub fn warning(code: &str, message: impl Into<String>) -> Self {
        ServerFrame::Warning {
            code: code.into(),
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("server frame serializes")
    }
}

/// Base64 little-endian PCM-16 to samples.
pub fn decode_pcm16(b64: &str) -> Result<Vec<i16>> {
    let bytes = base64::engine::general_purpose::STANDARD
        .decode(b64)
        .map_err(|e| ServiceError::MalformedFrame(format!("pcm16_b64 is not base64: {e}")))?;
    if bytes.len() % 2 != 0 {
        return Err(ServiceError::MalformedFrame("pcm16_b64 holds an odd number of bytes".into()));
    }
    Ok(bytes.chunks_exact(2).map(|b| i16::from_le_bytes([b[0], b[1]])).collect())
}

pub fn encode_pcm16(samples: &[i16]) -> String {
    let bytes: Vec<u8> = samples.iter().flat_map(|s| s.to_le_bytes()).collect();
    base64::engine::general_purpose::STANDARD.encode(bytes)
}
