//! Pluggable speech recognition behind a one-clip-in, JSON-out contract.

use std::future::Future;
use std::io::Cursor;
use std::pin::Pin;
use std::process::Stdio;
use std::sync::Arc;
use std::time::Duration;

use moodspring_core::data::write_wav_pcm16_to;
use moodspring_core::dsp::AudioClip;
use serde::Deserialize;
use thiserror::Error;
use tokio::io::AsyncWriteExt;

pub const ASR_ENV: &str = "MOODSPRING_ASR";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsrError {
    #[error("asr transport failed: {0}")]
    Transport(String),
    #[error("asr returned an unusable response: {0}")]
    BadResponse(String),
}

pub type AsrFuture<'a> = Pin<Box<dyn Future<Output = Result<String, AsrError>> + Send + 'a>>;

/// Takes one WAV clip and yields its transcription.
pub trait AsrClient: Send + Sync {
    fn transcribe(&self, wav: Vec<u8>) -> AsrFuture<'_>;
}

#[derive(Deserialize)]
struct AsrResponse {
    text: String,
}

fn parse_response(bytes: &[u8]) -> Result<String, AsrError> {
    serde_json::from_slice::<AsrResponse>(bytes)
        .map(|r| r.text)
        .map_err(|e| AsrError::BadResponse(e.to_string()))
}

pub fn encode_wav(clip: &AudioClip<f64>) -> Vec<u8> {
    let mut buf = Cursor::new(Vec::new());
    write_wav_pcm16_to(clip, &mut buf).expect("in-memory WAV encoding");
    buf.into_inner()
}

/// Fixed transcription after an optional delay; for tests and demos.
#[derive(Debug, Clone)]
pub struct StubAsr {
    pub text: String,
    pub delay: Duration,
}

impl StubAsr {
    pub fn new(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            delay: Duration::ZERO,
        }
    }

    pub fn stalling(text: impl Into<String>, delay: Duration) -> Self {
        Self {
            text: text.into(),
            delay,
        }
    }
}

impl AsrClient for StubAsr {
    fn transcribe(&self, _wav: Vec<u8>) -> AsrFuture<'_> {
        Box::pin(async move {
            if !self.delay.is_zero() {
                tokio::time::sleep(self.delay).await;
            }
            Ok(self.text.clone())
        })
    }
}

/// Runs a command per clip: the WAV path goes to its stdin, the JSON reply
/// comes back on stdout.
#[derive(Debug, Clone)]
pub struct SubprocessAsr {
    pub program: String,
    pub args: Vec<String>,
}

impl AsrClient for SubprocessAsr {
    fn transcribe(&self, wav: Vec<u8>) -> AsrFuture<'_> {
        Box::pin(async move {
            let transport = |e: std::io::Error| AsrError::Transport(e.to_string());
            let file = tempfile::Builder::new().suffix(".wav").tempfile().map_err(transport)?;
            tokio::fs::write(file.path(), &wav).await.map_err(transport)?;
            let mut child = tokio::process::Command::new(&self.program)
                .args(&self.args)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::null())
                .kill_on_drop(true)
                .spawn()
                .map_err(transport)?;
            let mut stdin = child.stdin.take().expect("piped stdin");
            let line = format!("{}\n", file.path().display());
            stdin.write_all(line.as_bytes()).await.map_err(transport)?;
            drop(stdin);
            let out = child.wait_with_output().await.map_err(transport)?;
            if !out.status.success() {
                return Err(AsrError::Transport(format!("asr command exited with {}", out.status)));
            }
            parse_response(&out.stdout)
        })
    }
}

/// POSTs the WAV bytes to a URL and reads `{"text": ...}` back.
#[derive(Debug, Clone)]
pub struct HttpAsr {
    pub url: String,
    client: reqwest::Client,
}

impl HttpAsr {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            client: reqwest::Client::new(),
        }
    }
}

impl AsrClient for HttpAsr {
    fn transcribe(&self, wav: Vec<u8>) -> AsrFuture<'_> {
        Box::pin(async move {
            let transport = |e: reqwest::Error| AsrError::Transport(e.to_string());
            let resp = self
                .client
                .post(&self.url)
                .header("content-type", "audio/wav")
                .body(wav)
                .send()
                .await
                .map_err(transport)?;
            if !resp.status().is_success() {
                return Err(AsrError::Transport(format!("http status {}", resp.status())));
            }
            parse_response(&resp.bytes().await.map_err(transport)?)
        })
    }
}

/// Parses an endpoint descriptor:
/// `stub:<text>`, `exec:<program> [args...]`, `http://...`/`https://...`,
/// or `none`/empty for no recognizer.
pub fn from_descriptor(descriptor: &str) -> Result<Option<Arc<dyn AsrClient>>, String> {
    let d = descriptor.trim();
    if d.is_empty() || d == "none" {
        return Ok(None);
    }
    if let Some(text) = d.strip_prefix("stub:") {
        return Ok(Some(Arc::new(StubAsr::new(text))));
    }
    if let Some(cmd) = d.strip_prefix("exec:") {
        let mut parts = cmd.split_whitespace().map(str::to_owned);
        let program = parts.next().ok_or("exec descriptor names no program")?;
        return Ok(Some(Arc::new(SubprocessAsr {
            program,
            args: parts.collect(),
        })));
    }
    if d.starts_with("http://") || d.starts_with("https://") {
        return Ok(Some(Arc::new(HttpAsr::new(d))));
    }
    Err(format!("unrecognized asr descriptor `{d}`"))
}

/// Environment variable first, then the config file entry.
pub fn resolve(config_endpoint: Option<&str>) -> Result<Option<Arc<dyn AsrClient>>, String> {
    match std::env::var(ASR_ENV) {
        Ok(v) => from_descriptor(&v),
        Err(_) => config_endpoint.map_or(Ok(None), from_descriptor),
    }
}
