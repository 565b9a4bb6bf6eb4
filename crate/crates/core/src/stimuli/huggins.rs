use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};
use crate::signal::{db_to_amplitude, rms, Waveform, INTERNAL_RATE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HugginsSpec {
    pub fc_hz: f64,
    /// Half-width of the phase-shifted band as a fraction of `fc_hz`.
    pub bw_frac: f64,
    pub dur_s: f64,
    /// Width of each linear phase transition as a fraction of the band width.
    pub transition_frac: f64,
    pub rms_dbfs: f64,
    pub sample_rate: u32,
    pub n_trials: usize,
    pub n_intervals: usize,
    pub gap_s: f64,
}

impl Default for HugginsSpec {
    fn default() -> Self {
        Self {
            fc_hz: 600.0,
            bw_frac: 0.06,
            dur_s: 1.0,
            transition_frac: 0.1,
            rms_dbfs: -20.0,
            sample_rate: INTERNAL_RATE,
            n_trials: 6,
            n_intervals: 3,
            gap_s: 0.5,
        }
    }
}

impl HugginsSpec {
    pub fn validate(&self) -> Result<()> {
        let nyq = self.sample_rate as f64 / 2.0;
        if !(self.fc_hz > 0.0 && self.bw_frac > 0.0 && self.bw_frac < 1.0) {
            return Err(GesiError::invalid("Huggins band needs fc > 0 and 0 < bw_frac < 1"));
        }
        if self.fc_hz * (1.0 + self.bw_frac) >= nyq {
            return Err(GesiError::invalid("Huggins band extends past Nyquist"));
        }
        if !(self.dur_s > 0.0) || !(0.0..=1.0).contains(&self.transition_frac) {
            return Err(GesiError::invalid("invalid Huggins duration or transition width"));
        }
        if self.n_intervals < 2 || self.n_trials == 0 {
            return Err(GesiError::invalid("need at least one trial of two or more intervals"));
        }
        Ok(())
    }

    /// Interaural phase shift applied at `f` Hz.
    pub fn phase_at(&self, f: f64) -> f64 {
        let lo = self.fc_hz * (1.0 - self.bw_frac);
        let hi = self.fc_hz * (1.0 + self.bw_frac);
        let half = 0.5 * self.transition_frac * (hi - lo);
        let ramp = |x: f64| {
            if half > 0.0 {
                ((x + half) / (2.0 * half)).clamp(0.0, 1.0)
            } else if x >= 0.0 {
                1.0
            } else {
                0.0
            }
        };
        std::f64::consts::PI * ramp(f - lo).min(ramp(hi - f))
    }
}

fn white(n: usize, rms_dbfs: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let g = db_to_amplitude(rms_dbfs) / rms(&x);
    x.iter_mut().for_each(|v| *v *= g);
    x
}

/// White noise on the left; the right copy is phase-shifted by up to π in the band.
pub fn gen_huggins(spec: &HugginsSpec, rng: &mut impl Rng) -> Result<Waveform> {
    spec.validate()?;
    let n = (spec.dur_s * spec.sample_rate as f64).round() as usize;
    let left = white(n, spec.rms_dbfs, rng);
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> = left.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let bin_hz = spec.sample_rate as f64 / n as f64;
    for k in 1..=n / 2 {
        let phi = spec.phase_at(k as f64 * bin_hz);
        if phi != 0.0 {
            let rot = Complex::from_polar(1.0, phi);
            buf[k] *= rot;
            if n - k != k {
                buf[n - k] *= rot.conj();
            }
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let right: Vec<f64> = buf.iter().map(|c| c.re / n as f64).collect();
    Waveform::stereo(&left, &right, spec.sample_rate)
}

#[derive(Debug, Clone)]
pub struct HugginsTrial {
    /// Intervals separated by silence, one stereo file per trial.
    pub waveform: Waveform,
    /// Zero-based index of the interval carrying the dichotic pitch.
    pub target_interval: usize,
}

#[derive(Debug, Clone)]
pub struct HugginsBundle {
    pub trials: Vec<HugginsTrial>,
}

impl HugginsBundle {
    pub fn answer_key(&self) -> Vec<usize> {
        self.trials.iter().map(|t| t.target_interval).collect()
    }
}

/// Forced-choice trials: one Huggins interval, the others diotic noise.
pub fn huggins_bundle(spec: &HugginsSpec, seed: u64) -> Result<HugginsBundle> {
    spec.validate()?;
    let mut rng = super::rng(seed);
    let n = (spec.dur_s * spec.sample_rate as f64).round() as usize;
    let gap = (spec.gap_s * spec.sample_rate as f64).round() as usize;
    let mut trials = Vec::with_capacity(spec.n_trials);
    for _ in 0..spec.n_trials {
        let target = rng.random_range(0..spec.n_intervals);
        let (mut l, mut r) = (Vec::new(), Vec::new());
        for k in 0..spec.n_intervals {
            if k > 0 {
                l.extend(std::iter::repeat_n(0.0, gap));
                r.extend(std::iter::repeat_n(0.0, gap));
            }
            if k == target {
                let hp = gen_huggins(spec, &mut rng)?;
                l.extend(hp.channel(0));
                r.extend(hp.channel(1));
            } else {
                let x = white(n, spec.rms_dbfs, &mut rng);
                l.extend_from_slice(&x);
                r.extend_from_slice(&x);
            }
        }
        trials.push(HugginsTrial {
            waveform: Waveform::stereo(&l, &r, spec.sample_rate)?,
            target_interval: target,
        });
    }
    Ok(HugginsBundle { trials })
}
