use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::AudioClip;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// MFCC analysis parameters. Sample counts assume the 16 kHz pipeline rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MfccConfig {
    pub frame_len: usize,
    pub hop: usize,
    pub n_fft: usize,
    pub n_mels: usize,
    pub n_mfcc: usize,
    pub pre_emphasis: f64,
    pub fmin: f64,
    /// Upper filterbank edge in Hz; `None` means Nyquist.
    pub fmax: Option<f64>,
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            frame_len: 400,
            hop: 160,
            n_fft: 512,
            n_mels: 26,
            n_mfcc: 13,
            pre_emphasis: 0.97,
            fmin: 0.0,
            fmax: None,
            log_floor: 1e-10,
        }
    }
}

impl MfccConfig {
    pub fn fmax_for(&self, sample_rate: u32) -> f64 {
        self.fmax.unwrap_or(f64::from(sample_rate) / 2.0)
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        if !(0 < self.hop && self.hop <= self.frame_len && self.frame_len <= self.n_fft) {
            return Err(Error::Config(format!(
                "need 0 < hop ({}) <= frame_len ({}) <= n_fft ({})",
                self.hop, self.frame_len, self.n_fft
            )));
        }
        if !(0 < self.n_mfcc && self.n_mfcc <= self.n_mels) {
            return Err(Error::Config(format!(
                "need 0 < n_mfcc ({}) <= n_mels ({})",
                self.n_mfcc, self.n_mels
            )));
        }
        let fmax = self.fmax_for(sample_rate);
        if !(self.fmin >= 0.0 && self.fmin < fmax && fmax <= f64::from(sample_rate) / 2.0) {
            return Err(Error::Config(format!(
                "need 0 <= fmin ({}) < fmax ({fmax}) <= Nyquist",
                self.fmin
            )));
        }
        if self.log_floor.is_nan() || self.log_floor <= 0.0 {
            return Err(Error::Config("log_floor must be positive".into()));
        }
        Ok(())
    }
}

/// HTK mel scale.
pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Number of full frames; trailing partial frames are dropped.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len < frame_len || hop == 0 {
        0
    } else {
        1 + (len - frame_len) / hop
    }
}

/// Triangular filters evaluated at FFT bin frequencies.
#[derive(Debug, Clone)]
pub struct MelFilterbank<T> {
    weights: Vec<Vec<T>>,
    centers_hz: Vec<f64>,
}

impl<T: Scalar> MelFilterbank<T> {
    pub fn new(n_mels: usize, n_fft: usize, sample_rate: u32, fmin: f64, fmax: f64) -> Self {
        let (mel_lo, mel_hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
        let edges: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_mels + 1) as f64))
            .collect();
        let n_bins = n_fft / 2 + 1;
        let bin_hz = f64::from(sample_rate) / n_fft as f64;
        let weights = (0..n_mels)
            .map(|m| {
                let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
                (0..n_bins)
                    .map(|k| {
                        let f = k as f64 * bin_hz;
                        let w = if f <= lo || f >= hi {
                            0.0
                        } else if f <= center {
                            (f - lo) / (center - lo)
                        } else {
                            (hi - f) / (hi - center)
                        };
                        T::lit(w)
                    })
                    .collect()
            })
            .collect();
        Self {
            weights,
            centers_hz: edges[1..=n_mels].to_vec(),
        }
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    pub fn weights(&self) -> &[Vec<T>] {
        &self.weights
    }

    pub fn apply(&self, spectrum: &[T]) -> Vec<T> {
        self.weights
            .iter()
            .map(|row| row.iter().zip(spectrum).map(|(&w, &s)| w * s).sum())
            .collect()
    }
}

/// Orthonormal DCT-II, first `n_out` coefficients.
pub fn dct2_orthonormal<T: Scalar>(x: &[T], n_out: usize) -> Vec<T> {
    let basis = dct_basis::<T>(x.len(), n_out);
    dct_with_basis(x, &basis)
}

fn dct_basis<T: Scalar>(n: usize, n_out: usize) -> Vec<Vec<T>> {
    let nf = n as f64;
    (0..n_out)
        .map(|k| {
            let scale = if k == 0 {
                (1.0 / nf).sqrt()
            } else {
                (2.0 / nf).sqrt()
            };
            (0..n)
                .map(|i| {
                    T::lit(scale * (std::f64::consts::PI * k as f64 * (2 * i + 1) as f64 / (2.0 * nf)).cos())
                })
                .collect()
        })
        .collect()
}

fn dct_with_basis<T: Scalar>(x: &[T], basis: &[Vec<T>]) -> Vec<T> {
    let Some(&x0) = x.first() else {
        return vec![T::zero(); basis.len()];
    };
    basis
        .iter()
        .enumerate()
        .map(|(k, row)| {
            if k == 0 {
                row.iter().zip(x).map(|(&b, &v)| b * v).sum()
            } else {
                // rows k >= 1 sum to zero, so offsetting by x[0] leaves the
                // value unchanged and maps constant inputs to exact zeros
                row.iter().zip(x).map(|(&b, &v)| b * (v - x0)).sum()
            }
        })
        .collect()
}

/// Magnitudes of the first `n_fft / 2 + 1` DFT bins of `frame`, zero-padded
/// to `n_fft`.
pub fn magnitude_spectrum<T: Scalar>(frame: &[T], n_fft: usize) -> Vec<T> {
    let fft = FftPlanner::new().plan_fft_forward(n_fft);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n_fft];
    magnitudes_into(fft.as_ref(), frame, &mut buf)
}

fn magnitudes_into<T: Scalar>(fft: &dyn Fft<T>, frame: &[T], buf: &mut [Complex<T>]) -> Vec<T> {
    for (slot, i) in buf.iter_mut().zip(0..) {
        *slot = Complex::new(frame.get(i).copied().unwrap_or_else(T::zero), T::zero());
    }
    fft.process(buf);
    buf[..buf.len() / 2 + 1].iter().map(|c| c.norm()).collect()
}

/// Reusable MFCC front end for one sample rate.
pub struct MfccExtractor<T: Scalar> {
    cfg: MfccConfig,
    sample_rate: u32,
    window: Vec<T>,
    filterbank: MelFilterbank<T>,
    dct: Vec<Vec<T>>,
    fft: Arc<dyn Fft<T>>,
}

impl<T: Scalar> std::fmt::Debug for MfccExtractor<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MfccExtractor")
            .field("cfg", &self.cfg)
            .field("sample_rate", &self.sample_rate)
            .finish_non_exhaustive()
    }
}

impl<T: Scalar> MfccExtractor<T> {
    pub fn new(cfg: MfccConfig, sample_rate: u32) -> Result<Self> {
        cfg.validate(sample_rate)?;
        let n = cfg.frame_len;
        let window = (0..n)
            .map(|i| {
                let w = if n == 1 {
                    1.0
                } else {
                    0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()
                };
                T::lit(w)
            })
            .collect();
        let filterbank = MelFilterbank::new(
            cfg.n_mels,
            cfg.n_fft,
            sample_rate,
            cfg.fmin,
            cfg.fmax_for(sample_rate),
        );
        let dct = dct_basis(cfg.n_mels, cfg.n_mfcc);
        let fft = FftPlanner::new().plan_fft_forward(cfg.n_fft);
        Ok(Self {
            cfg,
            sample_rate,
            window,
            filterbank,
            dct,
            fft,
        })
    }

    pub fn config(&self) -> &MfccConfig {
        &self.cfg
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn filterbank(&self) -> &MelFilterbank<T> {
        &self.filterbank
    }

    fn check_clip(&self, clip: &AudioClip<T>) -> Result<()> {
        if clip.sample_rate != self.sample_rate {
            return Err(Error::invalid(format!(
                "clip rate {} Hz does not match extractor rate {} Hz",
                clip.sample_rate, self.sample_rate
            )));
        }
        if clip.len() < self.cfg.frame_len {
            return Err(Error::TooShort {
                len: clip.len(),
                needed: self.cfg.frame_len,
            });
        }
        Ok(())
    }

    /// Per-frame mel filterbank energies (before the log), `T x n_mels`.
    pub fn mel_energies(&self, clip: &AudioClip<T>) -> Result<Vec<Vec<T>>> {
        self.check_clip(clip)?;
        let alpha = T::lit(self.cfg.pre_emphasis);
        let x = &clip.samples;
        let emphasized: Vec<T> = std::iter::once(x[0])
            .chain(x.windows(2).map(|w| w[1] - alpha * w[0]))
            .collect();

        let n_frames = frame_count(x.len(), self.cfg.frame_len, self.cfg.hop);
        let mut buf = vec![Complex::new(T::zero(), T::zero()); self.cfg.n_fft];
        let mut frame = vec![T::zero(); self.cfg.frame_len];
        Ok((0..n_frames)
            .map(|t| {
                let start = t * self.cfg.hop;
                let seg = &emphasized[start..start + self.cfg.frame_len];
                for ((dst, &s), &w) in frame.iter_mut().zip(seg).zip(&self.window) {
                    *dst = s * w;
                }
                let mags = magnitudes_into(self.fft.as_ref(), &frame, &mut buf);
                self.filterbank.apply(&mags)
            })
            .collect())
    }

    /// MFCC matrix, `T x n_mfcc`.
    pub fn compute(&self, clip: &AudioClip<T>) -> Result<Vec<Vec<T>>> {
        let floor = T::lit(self.cfg.log_floor);
        Ok(self
            .mel_energies(clip)?
            .into_iter()
            .map(|energies| {
                let logs: Vec<T> = energies.into_iter().map(|e| e.max(floor).ln()).collect();
                dct_with_basis(&logs, &self.dct)
            })
            .collect())
    }
}

/// One-shot MFCC computation; see [`MfccExtractor`] for repeated use.
pub fn compute_mfcc<T: Scalar>(clip: &AudioClip<T>, cfg: &MfccConfig) -> Result<Vec<Vec<T>>> {
    MfccExtractor::new(cfg.clone(), clip.sample_rate)?.compute(clip)
}
