//! Per-connection pipeline state: text and audio branches, fusion, control.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use moodspring_core::control::{ControlConfig, ControlSignal, ControlState};
use moodspring_core::data::Modality;
use moodspring_core::dsp::{resample, AudioClip, CANONICAL_RATE};
use serde_json::{Map, Value};

use crate::asr::{encode_wav, AsrClient};
use crate::config::{ClockMode, ServiceConfig};
use crate::error::{Result, ServiceError};
use crate::modelset::ModelSet;
use crate::protocol::{decode_pcm16, ClientFrame, ServerFrame};

/// Fusion input for a classifier that has not produced anything yet.
pub const NEUTRAL_P: f64 = 0.5;

static NEXT_SESSION: AtomicU64 = AtomicU64::new(1);

/// Canonical-rate samples from `start` onwards plus the tick schedule.
struct AudioBuffer {
    samples: Vec<f64>,
    start: u64,
    received: u64,
    next_tick: u64,
    window: usize,
    hop: usize,
}

impl AudioBuffer {
    fn new(window: usize, hop: usize) -> Self {
        Self {
            samples: Vec::new(),
            start: 0,
            received: 0,
            next_tick: window as u64,
            window,
            hop,
        }
    }

    fn push(&mut self, samples: &[f64]) {
        self.samples.extend_from_slice(samples);
        self.received += samples.len() as u64;
    }

    /// Next full window, if one is due.
    fn take_window(&mut self) -> Option<(Vec<f64>, u64)> {
        if self.received < self.next_tick {
            return None;
        }
        let end = self.next_tick;
        let lo = (end - self.window as u64 - self.start) as usize;
        let hi = (end - self.start) as usize;
        let window = self.samples[lo..hi].to_vec();
        self.next_tick += self.hop as u64;
        // keep only what the next window needs
        let keep_from = self.next_tick - self.window as u64;
        if keep_from > self.start {
            let drop = ((keep_from - self.start) as usize).min(self.samples.len());
            self.samples.drain(..drop);
            self.start += drop as u64;
        }
        Some((window, end))
    }
}

struct Live {
    id: String,
    control: ControlState<f64>,
    slots: Vec<f64>,
    audio: AudioBuffer,
}

pub struct Session {
    models: Arc<ModelSet>,
    cfg: Arc<ServiceConfig>,
    asr: Option<Arc<dyn AsrClient>>,
    live: Option<Live>,
}

impl Session {
    pub fn new(models: Arc<ModelSet>, cfg: Arc<ServiceConfig>, asr: Option<Arc<dyn AsrClient>>) -> Self {
        Self {
            models,
            cfg,
            asr,
            live: None,
        }
    }

    pub fn id(&self) -> Option<&str> {
        self.live.as_ref().map(|l| l.id.as_str())
    }

    pub fn is_initialized(&self) -> bool {
        self.live.is_some()
    }

    /// Current fusion inputs, one per classifier.
    pub fn slots(&self) -> Option<&[f64]> {
        self.live.as_ref().map(|l| l.slots.as_slice())
    }

    /// Initializes the session, or updates control settings of a live one.
    pub fn configure(&mut self, session_id: Option<String>, overrides: Option<Map<String, Value>>) -> Result<()> {
        let base = match &self.live {
            Some(l) => l.control.config().clone(),
            None => self.cfg.control.clone(),
        };
        let control = merge_control(&base, overrides)?;
        match &mut self.live {
            Some(live) => {
                live.control.set_config(control)?;
                if let Some(id) = session_id {
                    live.id = id;
                }
            }
            None => {
                self.models.fusion()?;
                let (window, hop) = self.cfg.window_samples(CANONICAL_RATE);
                self.live = Some(Live {
                    id: session_id
                        .unwrap_or_else(|| format!("session-{}", NEXT_SESSION.fetch_add(1, Ordering::Relaxed))),
                    control: ControlState::new(control)?,
                    slots: vec![NEUTRAL_P; self.models.len()],
                    audio: AudioBuffer::new(window, hop),
                });
            }
        }
        Ok(())
    }

    fn live(&mut self) -> Result<&mut Live> {
        self.live.as_mut().ok_or(ServiceError::SessionNotFound)
    }

    fn timestamp(&self, stream_samples: u64) -> u64 {
        match self.cfg.session.clock {
            ClockMode::Stream => stream_samples * 1000 / u64::from(CANONICAL_RATE),
            ClockMode::Wall => SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_millis() as u64),
        }
    }

    fn run_text_branch(&mut self, text: &str) -> Result<()> {
        let mapping = self.cfg.mapping().clone();
        let mut updates = Vec::new();
        for (i, c) in self.models.classifiers.iter().enumerate() {
            if c.modality() == Modality::Text {
                updates.push((i, c.p_pleasant(&c.featurizer.text(text)?, &mapping)?));
            }
        }
        let live = self.live()?;
        for (i, p) in updates {
            live.slots[i] = p;
        }
        Ok(())
    }

    fn emit(&mut self, stream_samples: u64) -> Result<ControlSignal<f64>> {
        let ts = self.timestamp(stream_samples);
        let fusion = self.models.fusion()?;
        let live = self.live.as_mut().ok_or(ServiceError::SessionNotFound)?;
        let p = fusion.fuse(&live.slots)?;
        Ok(live.control.push(p, ts))
    }

    pub fn handle_text(&mut self, text: &str) -> Result<ControlSignal<f64>> {
        let received = self.live()?.audio.received;
        if !self.models.has_modality(Modality::Text) {
            return Err(ServiceError::Config("model set has no text classifiers".into()));
        }
        self.run_text_branch(text)?;
        self.emit(received)
    }

    /// Buffers a chunk and runs every window it completes.
    pub async fn handle_audio_chunk(&mut self, pcm: &[i16], rate: u32) -> Result<Vec<ServerFrame>> {
        self.live()?;
        if rate == 0 {
            return Err(moodspring_core::Error::InvalidInput("audio rate must be positive".into()).into());
        }
        if pcm.is_empty() {
            return Ok(Vec::new());
        }
        let clip = resample(&AudioClip::<f64>::from_pcm16(pcm, rate)?, CANONICAL_RATE)?;
        self.live()?.audio.push(&clip.samples);

        let mut frames = Vec::new();
        while let Some((window, end)) = self.live()?.audio.take_window() {
            self.tick(window, end, &mut frames).await?;
        }
        Ok(frames)
    }

    async fn tick(&mut self, window: Vec<f64>, end: u64, frames: &mut Vec<ServerFrame>) -> Result<()> {
        let clip = AudioClip {
            samples: window,
            sample_rate: CANONICAL_RATE,
        };
        let deadline = tokio::time::Instant::now() + self.cfg.asr_timeout();
        let asr_task = match &self.asr {
            Some(asr) if self.models.has_modality(Modality::Text) => {
                let asr = Arc::clone(asr);
                let wav = encode_wav(&clip);
                Some(tokio::spawn(async move { asr.transcribe(wav).await }))
            }
            _ => None,
        };

        let mapping = self.cfg.mapping().clone();
        let mut updates = Vec::new();
        for (i, c) in self.models.classifiers.iter().enumerate() {
            if c.modality() == Modality::Audio {
                updates.push((i, c.p_pleasant(&c.featurizer.audio(&clip)?, &mapping)?));
            }
        }
        let live = self.live()?;
        for (i, p) in updates {
            live.slots[i] = p;
        }

        if let Some(mut task) = asr_task {
            match tokio::time::timeout_at(deadline, &mut task).await {
                Ok(Ok(Ok(text))) => self.run_text_branch(&text)?,
                Ok(Ok(Err(e))) => frames.push(ServerFrame::warning("AsrError", e.to_string())),
                Ok(Err(e)) => frames.push(ServerFrame::warning("AsrError", e.to_string())),
                Err(_) => {
                    task.abort();
                    frames.push(ServerFrame::warning(
                        "AsrTimeout",
                        format!(
                            "no transcription within {} ms; audio-only fusion for this tick",
                            self.cfg.asr.timeout_ms
                        ),
                    ));
                }
            }
        }
        frames.push(ServerFrame::Control(self.emit(end)?));
        Ok(())
    }

    /// Parses and dispatches one raw client frame. Failures become error
    /// frames; the session stays usable.
    pub async fn handle_frame(&mut self, raw: &str) -> Vec<ServerFrame> {
        let result = match ClientFrame::parse(raw) {
            Err(e) => Err(e),
            Ok(ClientFrame::Config { session_id, control }) => self.configure(session_id, control).map(|()| Vec::new()),
            Ok(ClientFrame::Text { text }) => self.handle_text(&text).map(|s| vec![ServerFrame::Control(s)]),
            Ok(ClientFrame::Audio { rate, pcm16_b64 }) => match decode_pcm16(&pcm16_b64) {
                Ok(pcm) => self.handle_audio_chunk(&pcm, rate).await,
                Err(e) => Err(e),
            },
        };
        result.unwrap_or_else(|e| vec![ServerFrame::error(&e)])
    }
}

fn merge_control(base: &ControlConfig, overrides: Option<Map<String, Value>>) -> Result<ControlConfig> {
    let Some(overrides) = overrides else {
        return Ok(base.clone());
    };
    let Value::Object(mut merged) = serde_json::to_value(base).expect("control config serializes") else {
        unreachable!("control config is an object");
    };
    for (k, v) in overrides {
        if !merged.contains_key(&k) {
            return Err(ServiceError::MalformedFrame(format!("unknown control setting `{k}`")));
        }
        merged.insert(k, v);
    }
    let cfg: ControlConfig =
        serde_json::from_value(Value::Object(merged)).map_err(|e| ServiceError::MalformedFrame(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buffer_schedules_window_then_hops() {
        let mut b = AudioBuffer::new(30, 10);
        let mut ticks = Vec::new();
        for chunk in 0..10 {
            b.push(&[chunk as f64; 5]);
            while let Some((w, end)) = b.take_window() {
                assert_eq!(w.len(), 30);
                assert_eq!(w[29], ((end - 1) / 5) as f64);
                ticks.push(end);
            }
        }
        assert_eq!(ticks, [30, 40, 50]);
        assert!(b.samples.len() <= 30);
    }

    #[test]
    fn big_chunk_runs_several_windows() {
        let mut b = AudioBuffer::new(3, 1);
        b.push(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let mut got = Vec::new();
        while let Some((w, _)) = b.take_window() {
            got.push(w);
        }
        assert_eq!(got, vec![vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0], vec![2.0, 3.0, 4.0]]);
    }

    #[test]
    fn control_overrides() {
        let base = ControlConfig::default();
        let mut m = Map::new();
        m.insert("ema_alpha".into(), Value::from(0.5));
        assert_eq!(merge_control(&base, Some(m)).unwrap().ema_alpha, 0.5);
        let mut m = Map::new();
        m.insert("bogus".into(), Value::from(1));
        assert!(merge_control(&base, Some(m)).is_err());
        let mut m = Map::new();
        m.insert("ema_alpha".into(), Value::from(7));
        assert!(merge_control(&base, Some(m)).is_err());
    }
}
