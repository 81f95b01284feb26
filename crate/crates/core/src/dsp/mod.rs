//! Audio front end: resampling, MFCC frames and clip-level pooling.

mod mfcc;
mod pool;

pub use mfcc::{
    compute_mfcc, dct2_orthonormal, frame_count, hz_to_mel, magnitude_spectrum, mel_to_hz,
    MelFilterbank, MfccConfig, MfccExtractor,
};
pub use pool::{pool, pool_with, PoolOptions};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pipeline-internal sample rate in Hz.
pub const CANONICAL_RATE: u32 = 16_000;

/// Mono PCM audio normalized to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T> {
    pub samples: Vec<T>,
    pub sample_rate: u32,
}

impl<T: Scalar> AudioClip<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Decodes signed 16-bit PCM, scaling by 1/32768.
    pub fn from_pcm16(pcm: &[i16], sample_rate: u32) -> Result<Self> {
        let scale = T::lit(1.0 / 32768.0);
        Self::new(
            pcm.iter().map(|&s| T::lit(f64::from(s)) * scale).collect(),
            sample_rate,
        )
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }
}

/// Linear-interpolation resampler.
///
/// Output length is `round(len * dst_rate / src_rate)`; output sample `i`
/// reads the input at position `i * src_rate / dst_rate`, clamped to the last
/// input sample.
pub fn resample<T: Scalar>(clip: &AudioClip<T>, dst_rate: u32) -> Result<AudioClip<T>> {
    if clip.is_empty() {
        return Err(Error::invalid("cannot resample an empty clip"));
    }
    if dst_rate == 0 {
        return Err(Error::invalid("destination rate must be positive"));
    }
    if dst_rate == clip.sample_rate {
        return Ok(clip.clone());
    }
    let src = u64::from(clip.sample_rate);
    let dst = u64::from(dst_rate);
    let len = clip.samples.len() as u64;
    // round-half-up of len * dst / src in integer arithmetic
    let out_len = ((2 * len * dst + src) / (2 * src)) as usize;
    let last = clip.samples.len() - 1;
    let samples = (0..out_len as u64)
        .map(|i| {
            let num = i * src;
            let idx = (num / dst) as usize;
            if idx >= last {
                return clip.samples[last];
            }
            let frac = T::lit((num % dst) as f64 / dst as f64);
            let a = clip.samples[idx];
            let b = clip.samples[idx + 1];
            a + (b - a) * frac
        })
        .collect();
    Ok(AudioClip {
        samples,
        sample_rate: dst_rate,
    })
}
