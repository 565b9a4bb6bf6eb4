//! Synthetic speech-like material for tests and corpus-free babble.
//!
//! Vowels are a glottal pulse train with a declining F0 contour, shaped by a
//! −12 dB/octave source tilt and three parallel formant resonators.
//! Consonants are short bandpass noise bursts.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};
use crate::filters::Biquad;
use crate::signal::{db_to_amplitude, rms, Waveform};

/// (F1, F2, F3) in Hz for /a i u e o/.
const VOWELS: [[f64; 3]; 5] = [
    [730.0, 1090.0, 2440.0],
    [270.0, 2290.0, 3010.0],
    [300.0, 870.0, 2240.0],
    [530.0, 1840.0, 2480.0],
    [570.0, 840.0, 2410.0],
];
const FORMANT_BW_HZ: [f64; 3] = [80.0, 100.0, 120.0];
const FORMANT_GAIN: [f64; 3] = [1.0, 0.5, 0.25];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeechLikeSpec {
    pub duration_s: f64,
    pub f0_hz: f64,
    pub rms_dbfs: f64,
    pub sample_rate: u32,
    /// Silence kept at both ends.
    pub edge_silence_s: f64,
}

impl Default for SpeechLikeSpec {
    fn default() -> Self {
        Self {
            duration_s: 1.0,
            f0_hz: 120.0,
            rms_dbfs: -26.0,
            sample_rate: crate::signal::INTERNAL_RATE,
            edge_silence_s: 0.05,
        }
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn one_pole(x: &mut [f64], cutoff_hz: f64, fs: f64) {
    let c = 1.0 - (-2.0 * std::f64::consts::PI * cutoff_hz / fs).exp();
    let mut y = 0.0;
    for v in x.iter_mut() {
        y += c * (*v - y);
        *v = y;
    }
}

fn vowel(rng: &mut impl Rng, n: usize, f0: f64, fs: f64) -> Vec<f64> {
    let formants = VOWELS[rng.random_range(0..VOWELS.len())];
    let drop = rng.random_range(0.05..0.2);
    let mut src = vec![0.0; n];
    let mut phase = rng.random_range(0.0..1.0);
    for (i, s) in src.iter_mut().enumerate() {
        let f = f0 * (1.0 - drop * i as f64 / n as f64);
        phase += f / fs;
        if phase >= 1.0 {
            phase -= 1.0;
            *s = 1.0;
        }
    }
    one_pole(&mut src, 150.0, fs);
    one_pole(&mut src, 300.0, fs);
    let mut out = vec![0.0; n];
    for k in 0..3 {
        let mut bp = Biquad::bandpass(formants[k], formants[k] / FORMANT_BW_HZ[k], fs);
        for (o, &s) in out.iter_mut().zip(&src) {
            *o += FORMANT_GAIN[k] * bp.process(s);
        }
    }
    normalize_unit(&mut out);
    super::apply_ramps(&mut out, (0.02 * fs) as usize);
    out
}

fn normalize_unit(x: &mut [f64]) {
    let r = rms(x);
    if r > 0.0 {
        x.iter_mut().for_each(|v| *v /= r);
    }
}

fn consonant(rng: &mut impl Rng, n: usize, fs: f64) -> Vec<f64> {
    let center = rng.random_range(2000.0..6000.0f64).min(0.4 * fs);
    let mut bp = Biquad::bandpass(center, 2.0, fs);
    let mut out: Vec<f64> = (0..n).map(|_| bp.process(gaussian(rng))).collect();
    normalize_unit(&mut out);
    super::apply_ramps(&mut out, (0.005 * fs) as usize);
    out
}

/// Syllable sequence filling `spec.duration_s`, RMS-normalized over the whole signal.
pub fn speech_like_word(spec: &SpeechLikeSpec, rng: &mut impl Rng) -> Result<Waveform> {
    let fs = spec.sample_rate as f64;
    if !(spec.f0_hz >= 50.0 && spec.f0_hz <= 500.0) {
        return Err(GesiError::invalid(format!("F0 {} Hz outside [50, 500]", spec.f0_hz)));
    }
    if !(spec.duration_s > 2.0 * spec.edge_silence_s + 0.15) || spec.edge_silence_s < 0.0 {
        return Err(GesiError::invalid("duration too short for one syllable"));
    }
    if spec.rms_dbfs > 0.0 {
        return Err(GesiError::invalid("RMS level above 0 dBFS"));
    }
    let n = (spec.duration_s * fs).round() as usize;
    let edge = (spec.edge_silence_s * fs).round() as usize;
    let mut x = vec![0.0; n];
    let mut pos = edge;
    let end = n - edge;
    while pos < end {
        let mut syl = Vec::new();
        if rng.random_bool(0.7) {
            let len = (rng.random_range(0.03..0.08) * fs) as usize;
            let c = consonant(rng, len, fs);
            syl.extend(c.iter().map(|v| v * 0.3));
        }
        let f0 = spec.f0_hz * rng.random_range(0.9..1.1);
        let len = (rng.random_range(0.12..0.25) * fs) as usize;
        syl.extend(vowel(rng, len, f0, fs));
        let take = syl.len().min(end - pos);
        x[pos..pos + take].copy_from_slice(&syl[..take]);
        if take < syl.len() {
            super::apply_ramps(&mut x[pos..pos + take], (0.005 * fs) as usize);
        }
        pos += take + (rng.random_range(0.02..0.06) * fs) as usize;
    }
    let g = db_to_amplitude(spec.rms_dbfs) / rms(&x).max(1e-30);
    x.iter_mut().for_each(|v| *v *= g);
    Waveform::mono(x, spec.sample_rate)
}

/// Stationary Gaussian noise with a long-term speech-like spectrum:
/// highpass near 100 Hz and a −6 dB/octave roll-off above 500 Hz.
pub fn speech_shaped_noise(duration_s: f64, rms_dbfs: f64, sample_rate: u32, rng: &mut impl Rng) -> Result<Waveform> {
    if !(duration_s > 0.0) {
        return Err(GesiError::invalid("noise duration must be positive"));
    }
    let fs = sample_rate as f64;
    let n = (duration_s * fs).round() as usize;
    let mut x: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
    one_pole(&mut x, 500.0, fs);
    let mut lowpassed = x.clone();
    one_pole(&mut lowpassed, 100.0, fs);
    x.iter_mut().zip(&lowpassed).for_each(|(v, l)| *v -= l);
    let g = db_to_amplitude(rms_dbfs) / rms(&x).max(1e-30);
    x.iter_mut().for_each(|v| *v *= g);
    Waveform::mono(x, sample_rate)
}
