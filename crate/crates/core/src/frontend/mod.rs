//! Hearing-loss-aware auditory front end.
//!
//! Each channel runs a fixed 4th-order gammatone bandpass, half-wave
//! rectification, a 150 Hz envelope lowpass, decimation to the envelope
//! rate, and finally a level-dependent gain stage that models the
//! cochlear amplifier:
//!
//! ```text
//! gain_db = (g_max - hl_active) * clamp((L_high - L) / (L_high - L_low), 0, 1) - hl_passive
//! ```
//!
//! where `L` is the smoothed channel level in dB SPL. Normal hearing gets the
//! full 30 dB of compressive gain at low levels; active loss removes part of
//! it, passive loss is a flat attenuation.

mod audiogram;
mod erb;
mod gammatone;

pub use audiogram::{
    split_hearing_loss, Audiogram, ListenerProfile, AUDIOGRAM_FREQS_HZ, HL_70YR, HL_80YR, MAX_ACTIVE_GAIN_DB,
};
pub use erb::{erb_bandwidth, erb_number, erb_number_to_hz};
pub use gammatone::GammatoneChannel;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};
use crate::filters::Biquad;
use crate::signal::{SplScale, Waveform};

/// Level at and below which the full active gain applies (dB SPL).
pub const LEVEL_LOW_DB: f64 = 30.0;
/// Level at and above which no active gain applies (dB SPL).
pub const LEVEL_HIGH_DB: f64 = 100.0;

/// Channel layout of the gammatone bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterbankSpec {
    pub n_channels: usize,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
}

impl Default for FilterbankSpec {
    fn default() -> Self {
        Self {
            n_channels: 100,
            f_min_hz: 100.0,
            f_max_hz: 8000.0,
        }
    }
}

impl FilterbankSpec {
    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        if self.n_channels == 0 {
            return Err(GesiError::invalid("filterbank needs at least one channel"));
        }
        if !(self.f_min_hz > 0.0 && self.f_min_hz < self.f_max_hz) {
            return Err(GesiError::invalid(format!(
                "filterbank range {}..{} Hz is empty",
                self.f_min_hz, self.f_max_hz
            )));
        }
        if self.f_max_hz > sample_rate / 2.0 {
            return Err(GesiError::invalid(format!(
                "filterbank top {} Hz exceeds Nyquist {} Hz",
                self.f_max_hz,
                sample_rate / 2.0
            )));
        }
        Ok(())
    }

    /// Peak frequencies, equally spaced on the ERB-number scale.
    pub fn peak_freqs(&self) -> Vec<f64> {
        let lo = erb_number(self.f_min_hz).expect("positive f_min");
        let hi = erb_number(self.f_max_hz).expect("positive f_max");
        if self.n_channels == 1 {
            return vec![erb_number_to_hz((lo + hi) / 2.0)];
        }
        let step = (hi - lo) / (self.n_channels - 1) as f64;
        (0..self.n_channels)
            .map(|i| erb_number_to_hz(lo + step * i as f64))
            .collect()
    }
}

/// Envelope extraction and gain-stage settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSettings {
    pub env_rate_hz: u32,
    pub lowpass_hz: f64,
    pub level_smoothing_s: f64,
    /// Diagnostic switch: skip the level-dependent gain stage entirely.
    pub bypass_gain: bool,
}

impl Default for EnvelopeSettings {
    fn default() -> Self {
        Self {
            env_rate_hz: 2000,
            lowpass_hz: 150.0,
            level_smoothing_s: 0.016,
            bypass_gain: false,
        }
    }
}

/// Per-channel envelope trajectories, channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationEnvelope {
    env: Vec<f64>,
    n_channels: usize,
    n_frames: usize,
    env_rate_hz: u32,
    peak_freqs: Vec<f64>,
}

impl ExcitationEnvelope {
    pub fn new(env: Vec<f64>, n_channels: usize, env_rate_hz: u32, peak_freqs: Vec<f64>) -> Result<Self> {
        if n_channels == 0 || !env.len().is_multiple_of(n_channels) || peak_freqs.len() != n_channels {
            return Err(GesiError::invalid("envelope dimensions are inconsistent"));
        }
        if env.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(GesiError::invalid("envelope values must be finite and nonnegative"));
        }
        let n_frames = env.len() / n_channels;
        Ok(Self {
            env,
            n_channels,
            n_frames,
            env_rate_hz,
            peak_freqs,
        })
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn env_rate_hz(&self) -> u32 {
        self.env_rate_hz
    }

    pub fn peak_freqs(&self) -> &[f64] {
        &self.peak_freqs
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.env[i * self.n_frames..(i + 1) * self.n_frames]
    }

    pub fn values(&self) -> &[f64] {
        &self.env
    }

    pub fn channel_means(&self) -> Vec<f64> {
        (0..self.n_channels)
            .map(|i| {
                let c = self.channel(i);
                if c.is_empty() {
                    0.0
                } else {
                    c.iter().sum::<f64>() / c.len() as f64
                }
            })
            .collect()
    }
}

/// Gain in dB applied at a smoothed channel level `level_db_spl`.
pub fn channel_gain_db(level_db_spl: f64, hl_active_db: f64, hl_passive_db: f64) -> f64 {
    let c = ((LEVEL_HIGH_DB - level_db_spl) / (LEVEL_HIGH_DB - LEVEL_LOW_DB)).clamp(0.0, 1.0);
    (MAX_ACTIVE_GAIN_DB - hl_active_db) * c - hl_passive_db
}

/// Runs the front end with default envelope settings.
pub fn analyze(
    w: &Waveform,
    profile: &ListenerProfile,
    spec: &FilterbankSpec,
    level: &SplScale,
) -> Result<ExcitationEnvelope> {
    analyze_with(w, profile, spec, &EnvelopeSettings::default(), level)
}

pub fn analyze_with(
    w: &Waveform,
    profile: &ListenerProfile,
    spec: &FilterbankSpec,
    settings: &EnvelopeSettings,
    level: &SplScale,
) -> Result<ExcitationEnvelope> {
    if !w.is_mono() {
        return Err(GesiError::invalid("front end expects a mono waveform"));
    }
    if w.is_empty() {
        return Err(GesiError::EmptyAudio);
    }
    let fs = w.sample_rate() as f64;
    spec.validate(fs)?;
    if settings.env_rate_hz == 0 || !w.sample_rate().is_multiple_of(settings.env_rate_hz) {
        return Err(GesiError::invalid(format!(
            "envelope rate {} Hz must divide the sample rate {} Hz",
            settings.env_rate_hz,
            w.sample_rate()
        )));
    }
    let hop = (w.sample_rate() / settings.env_rate_hz) as usize;
    let n_frames = w.frames() / hop;
    let peaks = spec.peak_freqs();
    let x = w.samples();

    let channels: Vec<Vec<f64>> = peaks
        .par_iter()
        .map(|&fp| {
            let mut env = channel_envelope(x, fp, fs, settings.lowpass_hz, hop, n_frames);
            if !settings.bypass_gain {
                let (active, passive) = profile.loss_at(fp);
                apply_gain_stage(&mut env, active, passive, settings, level);
            }
            env
        })
        .collect();

    ExcitationEnvelope::new(channels.concat(), peaks.len(), settings.env_rate_hz, peaks)
}

fn channel_envelope(x: &[f64], fp: f64, fs: f64, lowpass_hz: f64, hop: usize, n_frames: usize) -> Vec<f64> {
    let mut gt = GammatoneChannel::new(fp, 1.019 * erb_bandwidth(fp), fs);
    let mut lp = Biquad::lowpass(lowpass_hz, fs);
    let mut env = Vec::with_capacity(n_frames);
    for (n, &s) in x.iter().enumerate() {
        let y = lp.process(gt.process(s).max(0.0));
        if n % hop == 0 && env.len() < n_frames {
            env.push(y.max(0.0));
        }
    }
    env
}

/// Half-wave-rectified sinusoid of amplitude A has mean A / π; its RMS is A / √2.
const ENVELOPE_TO_RMS: f64 = std::f64::consts::PI / std::f64::consts::SQRT_2;

fn apply_gain_stage(env: &mut [f64], hl_active: f64, hl_passive: f64, settings: &EnvelopeSettings, level: &SplScale) {
    let Some(&first) = env.first() else {
        return;
    };
    let coef = 1.0 - (-1.0 / (settings.level_smoothing_s * settings.env_rate_hz as f64)).exp();
    let mut smoothed = first;
    for v in env.iter_mut() {
        smoothed += coef * (*v - smoothed);
        let l = level.spl_of_rms(smoothed * ENVELOPE_TO_RMS);
        let g = channel_gain_db(l, hl_active, hl_passive);
        *v = (*v * 10f64.powf(g / 20.0)).max(0.0);
    }
}
