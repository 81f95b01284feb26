#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use moodspring::asr::{AsrClient, StubAsr};
use moodspring::config::{ClockMode, ServiceConfig};
use moodspring::modelset::ModelSet;
use moodspring::session::Session;
use moodspring::training::{train_classifier, train_fusion_pair, TrainOptions};
use moodspring_core::data::{save_manifest, write_wav_pcm16, Manifest, ManifestRow, Modality};
use moodspring_core::dsp::AudioClip;
use moodspring_core::fusion::FusionConfig;
use moodspring_core::models::ModelKind;
use moodspring_core::{EmotionLabel, Group};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TEXTS: [(&str, EmotionLabel); 12] = [
    ("what a lovely sunny day", EmotionLabel::Happy),
    ("i love this lovely song", EmotionLabel::Happy),
    ("such a wonderful happy morning", EmotionLabel::Happy),
    ("the flowers are bright and beautiful", EmotionLabel::Happy),
    ("we laughed and danced all night", EmotionLabel::Happy),
    ("a warm and joyful welcome home", EmotionLabel::Happy),
    ("i feel so sad and alone", EmotionLabel::Sad),
    ("this is a sad and gloomy day", EmotionLabel::Sad),
    ("tears and sorrow everywhere", EmotionLabel::Sad),
    ("the cold rain will never stop", EmotionLabel::Sad),
    ("everything is lost and broken", EmotionLabel::Sad),
    ("a dark and lonely winter night", EmotionLabel::Sad),
];

/// Tone with a little noise: high pitch for happy, low for sad.
pub fn tone(emotion: EmotionLabel, secs: f64, rate: u32, seed: u64) -> AudioClip<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = match emotion {
        EmotionLabel::Happy => 1200.0,
        _ => 180.0,
    };
    let freq = base * rng.random_range(0.9..1.1);
    let n = (secs * f64::from(rate)) as usize;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / f64::from(rate);
            0.4 * (2.0 * std::f64::consts::PI * freq * t).sin() + rng.random_range(-0.02..0.02)
        })
        .collect();
    AudioClip::new(samples, rate).unwrap()
}

pub fn to_pcm16(clip: &AudioClip<f64>) -> Vec<i16> {
    clip.samples
        .iter()
        .map(|s| (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16)
        .collect()
}

/// Writes WAV files and a manifest of text and audio rows under `dir`.
pub fn write_corpus(dir: &Path) -> PathBuf {
    let mut rows = Vec::new();
    for (i, (text, emotion)) in TEXTS.iter().enumerate() {
        rows.push(ManifestRow {
            id: format!("t{i:02}"),
            source: (*text).to_owned(),
            emotion: *emotion,
            group: if i % 2 == 0 { Group::A } else { Group::B },
            modality: Modality::Text,
        });
    }
    std::fs::create_dir_all(dir.join("wav")).unwrap();
    for i in 0..16u64 {
        let emotion = if i % 2 == 0 { EmotionLabel::Happy } else { EmotionLabel::Sad };
        let name = format!("wav/a{i:02}.wav");
        let rate = if i % 4 == 1 || i % 4 == 2 { 8_000 } else { 16_000 };
        write_wav_pcm16(&tone(emotion, 1.5, rate, i), dir.join(&name)).unwrap();
        rows.push(ManifestRow {
            id: format!("a{i:02}"),
            source: name,
            emotion,
            group: if i % 4 < 2 { Group::A } else { Group::B },
            modality: Modality::Audio,
        });
    }
    let path = dir.join("manifest.csv");
    save_manifest(&Manifest::new(rows).unwrap(), &path).unwrap();
    path
}

/// Text MNB + audio GNB with trained fusion, saved under `dir/models`.
pub fn build_models(dir: &Path) -> (ModelSet, PathBuf) {
    let manifest = moodspring_core::data::load_manifest(write_corpus(dir)).unwrap();
    let text = train_classifier(&manifest, &TrainOptions::new(Modality::Text, ModelKind::MultinomialNb)).unwrap();
    let audio = train_classifier(&manifest, &TrainOptions::new(Modality::Audio, ModelKind::GaussianNb)).unwrap();
    let mut set = ModelSet::new(vec![text, audio]);
    let cfg = ServiceConfig::default();
    let fusion = FusionConfig {
        lambda: 1.0,
        epochs: 300,
        ..FusionConfig::default()
    };
    train_fusion_pair(&manifest, &mut set, cfg.mapping(), &fusion).unwrap();
    let models_dir = dir.join("models");
    set.save_dir(&models_dir).unwrap();
    (set, models_dir)
}

pub fn stream_config() -> ServiceConfig {
    let mut cfg = ServiceConfig::default();
    cfg.session.clock = ClockMode::Stream;
    cfg
}

pub fn stub(text: &str) -> Option<Arc<dyn AsrClient>> {
    Some(Arc::new(StubAsr::new(text)))
}

pub fn stalling(text: &str, delay: Duration) -> Option<Arc<dyn AsrClient>> {
    Some(Arc::new(StubAsr::stalling(text, delay)))
}

pub fn session(models: &Arc<ModelSet>, cfg: ServiceConfig, asr: Option<Arc<dyn AsrClient>>) -> Session {
    Session::new(Arc::clone(models), Arc::new(cfg), asr)
}
