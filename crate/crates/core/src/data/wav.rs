use std::io::{Read, Seek, Write};
use std::path::Path;

use crate::dsp::AudioClip;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Reads 16-bit PCM WAV, keeping the first channel only.
pub fn read_wav_from<T: Scalar, R: Read>(reader: R) -> Result<AudioClip<T>> {
    let mut wav = hound::WavReader::new(reader).map_err(|e| Error::format(format!("bad WAV: {e}")))?;
    let spec = wav.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(Error::format(format!(
            "only 16-bit PCM WAV is supported, got {} bits {:?}",
            spec.bits_per_sample, spec.sample_format
        )));
    }
    let channels = usize::from(spec.channels.max(1));
    let pcm = wav
        .samples::<i16>()
        .step_by(channels)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::format(format!("bad WAV samples: {e}")))?;
    AudioClip::from_pcm16(&pcm, spec.sample_rate)
}

pub fn read_wav<T: Scalar>(path: impl AsRef<Path>) -> Result<AudioClip<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::format(format!("cannot open {}: {e}", path.display())))?;
    read_wav_from(std::io::BufReader::new(file))
}

/// Writes mono 16-bit PCM, clipping samples to [-1, 1).
pub fn write_wav_pcm16_to<T: Scalar, W: Write + Seek>(clip: &AudioClip<T>, writer: W) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let err = |e: hound::Error| Error::format(format!("cannot write WAV: {e}"));
    let mut w = hound::WavWriter::new(writer, spec).map_err(err)?;
    for &s in &clip.samples {
        let v = (s.as_f64() * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        w.write_sample(v).map_err(err)?;
    }
    w.finalize().map_err(err)
}

pub fn write_wav_pcm16<T: Scalar>(clip: &AudioClip<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path)
        .map_err(|e| Error::format(format!("cannot create {}: {e}", path.display())))?;
    write_wav_pcm16_to(clip, std::io::BufWriter::new(file))
}
