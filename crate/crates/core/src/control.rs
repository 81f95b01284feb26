//! Animation control signals derived from fused valence probabilities.
//!
//! The smoothed probability drives timing (tempo, season phase) and an
//! entropy-based confidence drives brightness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::valence::{valence_class, Valence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControlConfig {
    pub ema_alpha: f64,
    /// Season cycles per minute at full probability.
    pub base_tempo: f64,
    pub tempo_floor: f64,
    pub brightness_floor: f64,
    pub tick_interval_ms: u64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        Self {
            ema_alpha: 0.2,
            base_tempo: 1.0,
            tempo_floor: 0.05,
            brightness_floor: 0.3,
            tick_interval_ms: 500,
        }
    }
}

impl ControlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ema_alpha > 0.0 && self.ema_alpha <= 1.0) {
            return Err(Error::Config(format!("ema_alpha {} not in (0, 1]", self.ema_alpha)));
        }
        if !(self.base_tempo > 0.0 && self.base_tempo.is_finite()) {
            return Err(Error::Config("base_tempo must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.tempo_floor) {
            return Err(Error::Config("tempo_floor must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.brightness_floor) {
            return Err(Error::Config("brightness_floor must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Wire unit sent to visual clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ControlSignal<T> {
    pub valence: Valence,
    pub p_smoothed: T,
    pub confidence: T,
    pub tempo: T,
    pub brightness: T,
    pub season_phase: T,
    pub seq: u64,
    pub timestamp: u64,
}

/// Exponential moving average step `(1 - alpha) * prev + alpha * new`; a
/// missing `prev` (first observation) counts as 0.5.
pub fn step<T: Scalar>(prev: Option<T>, new: T, alpha: f64) -> T {
    let prev = prev.unwrap_or_else(|| T::lit(0.5));
    let a = T::lit(alpha);
    let p = (T::one() - a) * prev + a * new;
    p.max(T::zero()).min(T::one())
}

/// `1 - H(p) / ln 2` with `H` the natural-log binary entropy.
pub fn confidence<T: Scalar>(p: T) -> T {
    let xlnx = |x: T| if x > T::zero() { x * x.ln() } else { T::zero() };
    let h = -(xlnx(p) + xlnx(T::one() - p));
    (T::one() - h / T::LN_2()).max(T::zero()).min(T::one())
}

pub fn make_control<T: Scalar>(
    p_smoothed: T,
    cfg: &ControlConfig,
    prev: Option<&ControlSignal<T>>,
    timestamp: u64,
) -> ControlSignal<T> {
    let p = p_smoothed.max(T::zero()).min(T::one());
    let valence = valence_class(p);
    let conf = confidence(p);
    let floor = T::lit(cfg.brightness_floor);
    let brightness = floor + (T::one() - floor) * conf;
    let drive = match valence {
        Valence::Pleasant => p,
        Valence::Unpleasant => T::one() - p,
    };
    let tempo = T::lit(cfg.base_tempo) * drive.max(T::lit(cfg.tempo_floor));

    let advance = tempo * T::lit(cfg.tick_interval_ms as f64 / 60_000.0);
    let start = prev.map_or(T::zero(), |s| s.season_phase);
    let mut season_phase = (start + advance).fract();
    if season_phase < T::zero() || season_phase >= T::one() {
        season_phase = T::zero();
    }

    ControlSignal {
        valence,
        p_smoothed: p,
        confidence: conf,
        tempo,
        brightness,
        season_phase,
        seq: prev.map_or(1, |s| s.seq + 1),
        timestamp,
    }
}

/// Per-session smoothing state and last emitted signal.
#[derive(Debug, Clone)]
pub struct ControlState<T> {
    cfg: ControlConfig,
    smoothed: Option<T>,
    last: Option<ControlSignal<T>>,
}

impl<T: Scalar> ControlState<T> {
    pub fn new(cfg: ControlConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            smoothed: None,
            last: None,
        })
    }

    pub fn config(&self) -> &ControlConfig {
        &self.cfg
    }

    /// Swaps the configuration, keeping the smoother and sequence counter.
    pub fn set_config(&mut self, cfg: ControlConfig) -> Result<()> {
        cfg.validate()?;
        self.cfg = cfg;
        Ok(())
    }

    pub fn last(&self) -> Option<&ControlSignal<T>> {
        self.last.as_ref()
    }

    /// Folds a fused probability into the smoother and emits the next signal.
    pub fn push(&mut self, p_fused: T, timestamp: u64) -> ControlSignal<T> {
        let p = step(self.smoothed, p_fused, self.cfg.ema_alpha);
        self.smoothed = Some(p);
        let signal = make_control(p, &self.cfg, self.last.as_ref(), timestamp);
        self.last = Some(signal.clone());
        signal
    }
}
