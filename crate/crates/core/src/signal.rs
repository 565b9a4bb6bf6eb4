//! Sample buffers, level measurement and SPL calibration.

use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};

/// Sample rate used by every analysis stage.
pub const INTERNAL_RATE: u32 = 48_000;

/// Level reported for an all-zero signal.
pub const SILENCE_DB: f64 = -200.0;

/// Interleaved audio samples at full scale ±1.0.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
    channels: u16,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32, channels: u16) -> Result<Self> {
        if sample_rate == 0 {
            return Err(GesiError::invalid("sample rate must be positive"));
        }
        if !(1..=2).contains(&channels) {
            return Err(GesiError::UnsupportedFormat(format!(
                "{channels} channels (only mono and stereo are supported)"
            )));
        }
        if !samples.len().is_multiple_of(channels as usize) {
            return Err(GesiError::invalid(
                "sample count is not a multiple of the channel count",
            ));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(GesiError::invalid("waveform contains NaN or infinite samples"));
        }
        Ok(Self {
            samples,
            sample_rate,
            channels,
        })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::new(samples, sample_rate, 1)
    }

    pub fn stereo(left: &[f64], right: &[f64], sample_rate: u32) -> Result<Self> {
        if left.len() != right.len() {
            return Err(GesiError::LengthMismatch {
                left: left.len(),
                right: right.len(),
            });
        }
        let samples = left.iter().zip(right).flat_map(|(&l, &r)| [l, r]).collect();
        Self::new(samples, sample_rate, 2)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channels(&self) -> u16 {
        self.channels
    }

    pub fn is_mono(&self) -> bool {
        self.channels == 1
    }

    /// Number of sample frames (samples per channel).
    pub fn frames(&self) -> usize {
        self.samples.len() / self.channels as usize
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.frames() as f64 / self.sample_rate as f64
    }

    /// De-interleaved copy of one channel.
    pub fn channel(&self, index: usize) -> Vec<f64> {
        let ch = self.channels as usize;
        assert!(index < ch, "channel {index} out of range");
        self.samples.iter().skip(index).step_by(ch).copied().collect()
    }

    /// Average of all channels. Mono input is returned unchanged.
    pub fn to_mono(&self) -> Waveform {
        if self.channels == 1 {
            return self.clone();
        }
        let ch = self.channels as f64;
        let samples = self
            .samples
            .chunks_exact(self.channels as usize)
            .map(|frame| frame.iter().sum::<f64>() / ch)
            .collect();
        Waveform {
            samples,
            sample_rate: self.sample_rate,
            channels: 1,
        }
    }

    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Waveform {
        debug_assert_eq!(samples.len() % self.channels as usize, 0);
        Waveform {
            samples,
            sample_rate: self.sample_rate,
            channels: self.channels,
        }
    }
}

pub fn rms(samples: &[f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    (samples.iter().map(|s| s * s).sum::<f64>() / samples.len() as f64).sqrt()
}

/// Converts a linear RMS value to dB, mapping zero to [`SILENCE_DB`].
pub fn amplitude_to_db(value: f64) -> f64 {
    if value > 0.0 {
        (20.0 * value.log10()).max(SILENCE_DB)
    } else {
        SILENCE_DB
    }
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

/// RMS level relative to digital full scale.
pub fn rms_db(w: &Waveform) -> f64 {
    amplitude_to_db(rms(w.samples()))
}

pub fn apply_gain_db(w: &Waveform, gain_db: f64) -> Waveform {
    let g = db_to_amplitude(gain_db);
    w.with_samples(w.samples().iter().map(|s| s * g).collect())
}

/// SPL assigned to the reference signal's RMS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelCalibration {
    pub ref_spl_db: f64,
}

impl Default for LevelCalibration {
    fn default() -> Self {
        Self { ref_spl_db: 65.0 }
    }
}

impl LevelCalibration {
    pub fn new(ref_spl_db: f64) -> Result<Self> {
        if !(ref_spl_db > 0.0 && ref_spl_db < 130.0) {
            return Err(GesiError::invalid(format!(
                "reference SPL {ref_spl_db} dB outside (0, 130)"
            )));
        }
        Ok(Self { ref_spl_db })
    }

    /// Fixes the digital-to-SPL mapping so that `reference` sits at
    /// `ref_spl_db`. Any signal analyzed with the returned scale keeps its
    /// level difference to the reference.
    pub fn anchor(&self, reference: &Waveform) -> Result<SplScale> {
        let level = rms_db(reference);
        if level <= SILENCE_DB {
            return Err(GesiError::Degenerate(
                "reference waveform is silent; cannot anchor SPL".into(),
            ));
        }
        Ok(SplScale {
            unit_rms_spl_db: self.ref_spl_db - level,
        })
    }
}

/// Absolute level scale: the SPL that a unit-RMS digital signal represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplScale {
    pub unit_rms_spl_db: f64,
}

impl SplScale {
    pub fn new(unit_rms_spl_db: f64) -> Self {
        Self { unit_rms_spl_db }
    }

    pub fn spl_of_rms(&self, rms_value: f64) -> f64 {
        amplitude_to_db(rms_value) + self.unit_rms_spl_db
    }

    /// Linear RMS amplitude of a signal at `spl_db`.
    pub fn rms_for_spl(&self, spl_db: f64) -> f64 {
        db_to_amplitude(spl_db - self.unit_rms_spl_db)
    }
}
