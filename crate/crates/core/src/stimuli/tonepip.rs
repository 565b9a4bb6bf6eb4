use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};
use crate::signal::{db_to_amplitude, rms, Waveform, INTERNAL_RATE};

pub const TONE_PIP_FREQS_HZ: [f64; 4] = [500.0, 1000.0, 2000.0, 4000.0];
/// SPL (dB) of the 0 dB HL threshold at each tone-pip frequency.
pub const ZERO_HL_SPL_DB: [f64; 4] = [13.5, 7.5, 9.0, 12.0];

/// Lowest pip level accepted, in dBFS RMS.
const LEVEL_FLOOR_DBFS: f64 = -130.0;

pub fn zero_hl_spl_db(freq_hz: f64) -> Option<f64> {
    TONE_PIP_FREQS_HZ
        .iter()
        .position(|&f| f == freq_hz)
        .map(|i| ZERO_HL_SPL_DB[i])
}

/// Mean and sample (n − 1) standard deviation of the threshold SPLs.
pub fn zero_hl_spl_stats() -> (f64, f64) {
    let n = ZERO_HL_SPL_DB.len() as f64;
    let mean = ZERO_HL_SPL_DB.iter().sum::<f64>() / n;
    let var = ZERO_HL_SPL_DB.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipDirection {
    Descending,
    Ascending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TonePipSpec {
    pub freq_hz: f64,
    pub n_pips: usize,
    pub step_db: f64,
    pub ref_tone_dur_s: f64,
    pub direction: PipDirection,
    pub pip_dur_ms: f64,
    pub ramp_ms: f64,
    pub onset_interval_ms: f64,
    /// Silence between the reference tone and the first pip.
    pub gap_s: f64,
    pub sample_rate: u32,
}

impl Default for TonePipSpec {
    fn default() -> Self {
        Self {
            freq_hz: 1000.0,
            n_pips: 15,
            step_db: -5.0,
            ref_tone_dur_s: 1.0,
            direction: PipDirection::Descending,
            pip_dur_ms: 50.0,
            ramp_ms: 10.0,
            onset_interval_ms: 250.0,
            gap_s: 0.5,
            sample_rate: INTERNAL_RATE,
        }
    }
}

impl TonePipSpec {
    pub fn validate(&self) -> Result<()> {
        if !TONE_PIP_FREQS_HZ.contains(&self.freq_hz) {
            return Err(GesiError::invalid(format!(
                "tone-pip frequency {} Hz not in {:?}",
                self.freq_hz, TONE_PIP_FREQS_HZ
            )));
        }
        if self.n_pips < 2 {
            return Err(GesiError::invalid("need at least two pips"));
        }
        if !(self.step_db.abs() > 0.0) {
            return Err(GesiError::invalid("pip step must be nonzero"));
        }
        if self.freq_hz >= self.sample_rate as f64 / 2.0 {
            return Err(GesiError::invalid("tone frequency at or above Nyquist"));
        }
        if !(self.pip_dur_ms > 2.0 * self.ramp_ms && self.ramp_ms >= 0.0) {
            return Err(GesiError::invalid("pip must be longer than its two ramps"));
        }
        if self.onset_interval_ms < self.pip_dur_ms {
            return Err(GesiError::invalid("onset interval shorter than a pip"));
        }
        if !(self.ref_tone_dur_s > 0.0 && self.gap_s >= 0.0) {
            return Err(GesiError::invalid("reference tone and gap durations must be positive"));
        }
        Ok(())
    }

    /// Level of pip `k` (0-based) for a sequence starting at `start_dbfs`.
    pub fn pip_level(&self, start_dbfs: f64, k: usize) -> f64 {
        let span = self.step_db.abs() * (self.n_pips - 1) as f64;
        let offset = self.step_db.abs() * k as f64;
        match self.direction {
            PipDirection::Descending => start_dbfs - offset,
            PipDirection::Ascending => start_dbfs - span + offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipEvent {
    pub onset_s: f64,
    pub dur_s: f64,
    pub level_dbfs: f64,
}

#[derive(Debug, Clone)]
pub struct TonePipSequence {
    pub waveform: Waveform,
    /// Reference tone first, then the pips in presentation order.
    pub events: Vec<PipEvent>,
}

impl TonePipSequence {
    /// Measured RMS (dBFS) over each event's span.
    pub fn measured_levels(&self) -> Vec<f64> {
        let fs = self.waveform.sample_rate() as f64;
        let x = self.waveform.samples();
        self.events
            .iter()
            .map(|e| {
                let s = (e.onset_s * fs).round() as usize;
                let n = (e.dur_s * fs).round() as usize;
                20.0 * rms(&x[s..s + n]).log10()
            })
            .collect()
    }
}

fn tone(freq: f64, n: usize, fs: f64, ramp: usize, rms_dbfs: f64) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n)
        .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / fs).sin())
        .collect();
    super::apply_ramps(&mut x, ramp);
    let g = db_to_amplitude(rms_dbfs) / rms(&x);
    x.iter_mut().for_each(|v| *v *= g);
    x
}

/// Reference tone followed by the pip staircase. Levels are RMS over each event.
pub fn gen_tone_pips(spec: &TonePipSpec, start_level_dbfs: f64) -> Result<TonePipSequence> {
    spec.validate()?;
    if !(start_level_dbfs <= 0.0) {
        return Err(GesiError::invalid(format!(
            "start level {start_level_dbfs} dBFS above 0"
        )));
    }
    let lowest = start_level_dbfs - spec.step_db.abs() * (spec.n_pips - 1) as f64;
    if lowest < LEVEL_FLOOR_DBFS {
        return Err(GesiError::invalid(format!(
            "quietest pip at {lowest} dBFS is below the {LEVEL_FLOOR_DBFS} dBFS floor"
        )));
    }
    let fs = spec.sample_rate as f64;
    let samples = |s: f64| (s * fs).round() as usize;
    let ramp = samples(spec.ramp_ms / 1e3);
    let ref_n = samples(spec.ref_tone_dur_s);
    let pip_n = samples(spec.pip_dur_ms / 1e3);
    let step_n = samples(spec.onset_interval_ms / 1e3);
    let first_pip = ref_n + samples(spec.gap_s);
    let total = first_pip + step_n * (spec.n_pips - 1) + pip_n + samples(spec.gap_s);
    let mut x = vec![0.0; total];

    let mut events = Vec::with_capacity(spec.n_pips + 1);
    x[..ref_n].copy_from_slice(&tone(spec.freq_hz, ref_n, fs, ramp, start_level_dbfs));
    events.push(PipEvent {
        onset_s: 0.0,
        dur_s: ref_n as f64 / fs,
        level_dbfs: start_level_dbfs,
    });
    for k in 0..spec.n_pips {
        let level = spec.pip_level(start_level_dbfs, k);
        let s = first_pip + k * step_n;
        x[s..s + pip_n].copy_from_slice(&tone(spec.freq_hz, pip_n, fs, ramp, level));
        events.push(PipEvent {
            onset_s: s as f64 / fs,
            dur_s: pip_n as f64 / fs,
            level_dbfs: level,
        });
    }
    Ok(TonePipSequence {
        waveform: Waveform::mono(x, spec.sample_rate)?,
        events,
    })
}
