use std::path::Path;

use crate::error::{Error, Result};
use crate::labels::{EmotionLabel, Group};

/// Fields decoded from a RAVDESS file name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RavdessInfo {
    pub emotion: EmotionLabel,
    pub actor: u8,
    pub group: Group,
}

/// Decodes `MM-VV-EE-II-SS-RR-AA.wav`. Odd actors map to group A (male),
/// even actors to group B (female).
pub fn parse_ravdess_filename(name: &str) -> Result<RavdessInfo> {
    let file = Path::new(name)
        .file_name()
        .and_then(|f| f.to_str())
        .unwrap_or(name);
    let bad = |why: &str| Error::format(format!("`{name}` is not a RAVDESS file name: {why}"));
    let stem = file
        .strip_suffix(".wav")
        .ok_or_else(|| bad("expected a .wav extension"))?;
    let fields: Vec<&str> = stem.split('-').collect();
    if fields.len() != 7 {
        return Err(bad("expected 7 dash-separated fields"));
    }
    let mut codes = [0u8; 7];
    for (code, f) in codes.iter_mut().zip(&fields) {
        if f.len() != 2 || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("fields must be two digits"));
        }
        *code = f.parse().expect("two ascii digits");
    }
    let [modality, channel, emotion, intensity, statement, repetition, actor] = codes;
    let in_range = |v: u8, hi: u8| (1..=hi).contains(&v);
    if !in_range(modality, 3)
        || !in_range(channel, 2)
        || !in_range(intensity, 2)
        || !in_range(statement, 2)
        || !in_range(repetition, 2)
    {
        return Err(bad("code out of range"));
    }
    let emotion = emotion
        .checked_sub(1)
        .and_then(|i| EmotionLabel::from_index(usize::from(i)))
        .ok_or_else(|| bad("emotion code must be 01-08"))?;
    if !in_range(actor, 24) {
        return Err(bad("actor must be 01-24"));
    }
    let group = if actor % 2 == 1 { Group::A } else { Group::B };
    Ok(RavdessInfo {
        emotion,
        actor,
        group,
    })
}
