use rand::Rng;

use crate::error::{GesiError, Result};
use crate::signal::{rms, Waveform};

#[derive(Debug, Clone)]
pub struct Mixture {
    pub mixture: Waveform,
    /// The scaled noise segment that was added.
    pub noise: Waveform,
    pub noise_offset: usize,
    pub noise_gain: f64,
}

/// Adds a random segment of `noise`, scaled so speech RMS over noise RMS is `snr_db`.
pub fn mix_snr(speech: &Waveform, noise: &Waveform, snr_db: f64, rng: &mut impl Rng) -> Result<Mixture> {
    if !speech.is_mono() || !noise.is_mono() {
        return Err(GesiError::invalid("mixing expects mono signals"));
    }
    if speech.sample_rate() != noise.sample_rate() {
        return Err(GesiError::invalid(format!(
            "speech at {} Hz, noise at {} Hz",
            speech.sample_rate(),
            noise.sample_rate()
        )));
    }
    if !snr_db.is_finite() {
        return Err(GesiError::invalid("SNR must be finite"));
    }
    let n = speech.frames();
    if noise.frames() < n {
        return Err(GesiError::TooShort(format!(
            "noise has {} samples, speech needs {n}",
            noise.frames()
        )));
    }
    let offset = rng.random_range(0..=noise.frames() - n);
    let seg = &noise.samples()[offset..offset + n];
    let (sr, nr) = (rms(speech.samples()), rms(seg));
    if sr == 0.0 || nr == 0.0 {
        return Err(GesiError::Degenerate("silent speech or noise segment".into()));
    }
    let gain = sr / nr * 10f64.powf(-snr_db / 20.0);
    let scaled: Vec<f64> = seg.iter().map(|v| v * gain).collect();
    let mixed: Vec<f64> = speech.samples().iter().zip(&scaled).map(|(s, v)| s + v).collect();
    Ok(Mixture {
        mixture: Waveform::mono(mixed, speech.sample_rate())?,
        noise: Waveform::mono(scaled, speech.sample_rate())?,
        noise_offset: offset,
        noise_gain: gain,
    })
}
