//! Real-time emotion valence engine: audio and text features, per-modality
//! classifiers, fairness-aware decision fusion and animation control signals.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the bottom of this file fix the precision for callers that do not care.

pub mod control;
pub mod data;
pub mod dsp;
mod error;
mod features;
pub mod fusion;
mod labels;
pub mod models;
mod scalar;
pub mod textfeat;
pub mod valence;

pub use error::{Error, Result};
pub use features::{FeatureKind, FeatureVector};
pub use labels::{EmotionLabel, Group};
pub use scalar::{argmax, log_sum_exp, sigmoid, softplus, Scalar};

pub type AudioClipF64 = dsp::AudioClip<f64>;
pub type AudioClipF32 = dsp::AudioClip<f32>;
pub type FeatureVectorF64 = FeatureVector<f64>;
pub type FeatureVectorF32 = FeatureVector<f32>;
pub type TrainedModelF64 = models::TrainedModel<f64>;
pub type TrainedModelF32 = models::TrainedModel<f32>;
pub type FusionModelF64 = fusion::FusionModel<f64>;
pub type FusionModelF32 = fusion::FusionModel<f32>;
pub type ControlSignalF64 = control::ControlSignal<f64>;
pub type ControlSignalF32 = control::ControlSignal<f32>;
