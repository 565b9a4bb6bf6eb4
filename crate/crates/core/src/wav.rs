//! RIFF/WAVE reading and writing.

use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use crate::error::{GesiError, Result};
use crate::resample::resample;
use crate::signal::{Waveform, INTERNAL_RATE};

/// Reads PCM 8/16/24/32-bit or IEEE float32 WAV files, normalized to ±1.0.
pub fn load_wave(path: impl AsRef<Path>) -> Result<Waveform> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| GesiError::io(path, e))?;
    let reader = WavReader::new(std::io::BufReader::new(file))?;
    let spec = reader.spec();
    if !(1..=2).contains(&spec.channels) {
        return Err(GesiError::UnsupportedFormat(format!(
            "{}: {} channels",
            path.display(),
            spec.channels
        )));
    }
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()?,
        (SampleFormat::Int, bits @ (8 | 16 | 24 | 32)) => {
            let scale = 1.0 / (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 * scale))
                .collect::<std::result::Result<_, _>>()?
        }
        (fmt, bits) => {
            return Err(GesiError::UnsupportedFormat(format!(
                "{}: {bits}-bit {fmt:?}",
                path.display()
            )))
        }
    };
    if samples.is_empty() {
        return Err(GesiError::EmptyAudio);
    }
    Waveform::new(samples, spec.sample_rate, spec.channels)
}

/// Loads a file for analysis: downmixed to mono and resampled to 48 kHz.
pub fn load_for_analysis(path: impl AsRef<Path>) -> Result<Waveform> {
    let w = load_wave(path)?;
    let mono = w.to_mono();
    resample(&mono, INTERNAL_RATE)
}

/// Encoding used by [`save_wave_as`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Float32,
    Pcm16,
    Pcm24,
    Pcm32,
}

/// Writes float32 at the waveform's own sample rate.
pub fn save_wave(path: impl AsRef<Path>, w: &Waveform) -> Result<()> {
    save_wave_as(path, w, WavEncoding::Float32)
}

pub fn save_wave_as(path: impl AsRef<Path>, w: &Waveform, encoding: WavEncoding) -> Result<()> {
    let (bits, format) = match encoding {
        WavEncoding::Float32 => (32, SampleFormat::Float),
        WavEncoding::Pcm16 => (16, SampleFormat::Int),
        WavEncoding::Pcm24 => (24, SampleFormat::Int),
        WavEncoding::Pcm32 => (32, SampleFormat::Int),
    };
    let spec = WavSpec {
        channels: w.channels(),
        sample_rate: w.sample_rate(),
        bits_per_sample: bits,
        sample_format: format,
    };
    let mut writer = WavWriter::create(path.as_ref(), spec)?;
    match format {
        SampleFormat::Float => {
            for &s in w.samples() {
                writer.write_sample(s as f32)?;
            }
        }
        SampleFormat::Int => {
            let full = (1i64 << (bits - 1)) as f64;
            for &s in w.samples() {
                let v = (s * full).round().clamp(-full, full - 1.0) as i32;
                writer.write_sample(v)?;
            }
        }
    }
    writer.finalize()?;
    Ok(())
}
