//! Band-limited sample-rate conversion.
//!
//! Kaiser-windowed sinc interpolation. The lowpass cutoff sits at 0.475 of
//! the lower rate with a transition band of 0.05 of the lower rate and
//! ~90 dB stopband, so the passband up to 0.45 of the lower rate is flat to
//! well under 0.01 dB.

use crate::error::{GesiError, Result};
use crate::signal::Waveform;

const STOPBAND_DB: f64 = 90.0;
const CUTOFF_FRACTION: f64 = 0.475;
const TRANSITION_FRACTION: f64 = 0.05;
/// Above this many polyphase branches the kernel is evaluated on the fly.
const MAX_TABLE_PHASES: u64 = 1024;

pub fn resample(w: &Waveform, target_rate: u32) -> Result<Waveform> {
    if target_rate == 0 {
        return Err(GesiError::invalid("target sample rate must be positive"));
    }
    let source_rate = w.sample_rate();
    if source_rate == target_rate {
        return Ok(w.clone());
    }
    let resampler = Resampler::new(source_rate, target_rate);
    let ch = w.channels() as usize;
    let outputs: Vec<Vec<f64>> = (0..ch).map(|c| resampler.process(&w.channel(c))).collect();
    let frames = outputs[0].len();
    let mut interleaved = Vec::with_capacity(frames * ch);
    for i in 0..frames {
        for out in &outputs {
            interleaved.push(out[i]);
        }
    }
    Waveform::new(interleaved, target_rate, w.channels())
}

/// Converts between two fixed rates; reusable across signals.
#[derive(Debug, Clone)]
pub struct Resampler {
    up: u64,
    down: u64,
    source_rate: f64,
    cutoff_hz: f64,
    half_width_s: f64,
    beta: f64,
    table: Option<PhaseTable>,
}

#[derive(Debug, Clone)]
struct PhaseTable {
    first_offset: i64,
    taps: usize,
    coeffs: Vec<f64>,
}

impl Resampler {
    pub fn new(source_rate: u32, target_rate: u32) -> Self {
        let g = gcd(source_rate as u64, target_rate as u64);
        let up = target_rate as u64 / g;
        let down = source_rate as u64 / g;
        let low = source_rate.min(target_rate) as f64;
        let cutoff_hz = CUTOFF_FRACTION * low;
        // Kaiser length estimate in samples of the lower rate.
        let taps_at_low_rate = (STOPBAND_DB - 7.95) / (2.285 * 2.0 * std::f64::consts::PI * TRANSITION_FRACTION);
        let half_width_s = 0.5 * taps_at_low_rate.ceil() / low;
        let beta = 0.1102 * (STOPBAND_DB - 8.7);
        let mut r = Self {
            up,
            down,
            source_rate: source_rate as f64,
            cutoff_hz,
            half_width_s,
            beta,
            table: None,
        };
        if up <= MAX_TABLE_PHASES {
            r.table = Some(r.build_table());
        }
        r
    }

    fn kernel(&self, t: f64) -> f64 {
        if t.abs() >= self.half_width_s {
            return 0.0;
        }
        let x = 2.0 * self.cutoff_hz * t;
        let sinc = if x.abs() < 1e-12 {
            1.0
        } else {
            (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x)
        };
        let ratio = t / self.half_width_s;
        let window = bessel_i0(self.beta * (1.0 - ratio * ratio).max(0.0).sqrt()) / bessel_i0(self.beta);
        2.0 * self.cutoff_hz / self.source_rate * sinc * window
    }

    fn build_table(&self) -> PhaseTable {
        let reach = (self.half_width_s * self.source_rate).ceil() as i64 + 1;
        let first_offset = -reach;
        let taps = (2 * reach + 1) as usize;
        let mut coeffs = Vec::with_capacity(self.up as usize * taps);
        for phase in 0..self.up {
            let frac = phase as f64 / self.up as f64;
            for k in 0..taps as i64 {
                let offset = first_offset + k;
                let t = (frac - offset as f64) / self.source_rate;
                coeffs.push(self.kernel(t));
            }
        }
        PhaseTable {
            first_offset,
            taps,
            coeffs,
        }
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        ((input_len as u128 * self.up as u128 + self.down as u128 / 2) / self.down as u128) as usize
    }

    pub fn process(&self, input: &[f64]) -> Vec<f64> {
        let n_out = self.output_len(input.len());
        let len = input.len() as i64;
        let mut out = Vec::with_capacity(n_out);
        for n in 0..n_out as u64 {
            // Output sample n sits at input position n * down / up.
            let pos = n * self.down;
            let base = (pos / self.up) as i64;
            let phase = pos % self.up;
            let acc = match &self.table {
                Some(tab) => {
                    let row = &tab.coeffs[phase as usize * tab.taps..(phase as usize + 1) * tab.taps];
                    let start = base + tab.first_offset;
                    let lo = (-start).max(0) as usize;
                    let hi = ((len - start).max(0) as usize).min(tab.taps);
                    let mut acc = 0.0;
                    for k in lo..hi {
                        acc += row[k] * input[(start + k as i64) as usize];
                    }
                    acc
                }
                None => {
                    let frac = phase as f64 / self.up as f64;
                    let reach = (self.half_width_s * self.source_rate).ceil() as i64 + 1;
                    let mut acc = 0.0;
                    for offset in -reach..=reach {
                        let idx = base + offset;
                        if idx < 0 || idx >= len {
                            continue;
                        }
                        let t = (frac - offset as f64) / self.source_rate;
                        acc += self.kernel(t) * input[idx as usize];
                    }
                    acc
                }
            };
            out.push(acc);
        }
        out
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{rms, rms_db};
    use std::f64::consts::PI;

    fn tone(freq: f64, sr: u32, seconds: f64) -> Waveform {
        let n = (seconds * sr as f64) as usize;
        Waveform::mono(
            (0..n).map(|i| (2.0 * PI * freq * i as f64 / sr as f64).sin()).collect(),
            sr,
        )
        .unwrap()
    }

    fn interior_rms_db(w: &Waveform) -> f64 {
        let s = w.samples();
        let margin = s.len() / 10;
        20.0 * rms(&s[margin..s.len() - margin]).log10()
    }

    #[test]
    fn tone_survives_downsampling() {
        let w = tone(1000.0, 48_000, 1.0);
        let out = resample(&w, 10_000).unwrap();
        assert_eq!(out.sample_rate(), 10_000);
        assert!((interior_rms_db(&out) - interior_rms_db(&w)).abs() < 0.1);
    }

    #[test]
    fn passthrough_is_identical() {
        let w = tone(1000.0, 44_100, 0.1);
        assert_eq!(resample(&w, 44_100).unwrap(), w);
    }

    #[test]
    fn length_follows_ratio() {
        let w = Waveform::mono(vec![0.0; 480], 48_000).unwrap();
        let out = resample(&w, 10_000).unwrap();
        assert!((out.frames() as i64 - 100).abs() <= 1);
        let w = Waveform::mono(vec![0.0; 44_100], 44_100).unwrap();
        assert!((resample(&w, 48_000).unwrap().frames() as i64 - 48_000).abs() <= 1);
    }

    #[test]
    fn round_trip_preserves_tone_level() {
        let w = tone(1000.0, 48_000, 1.0);
        let back = resample(&resample(&w, 10_000).unwrap(), 48_000).unwrap();
        assert!((rms_db(&back) - rms_db(&w)).abs() < 0.2);
    }

    #[test]
    fn passband_ripple_is_small() {
        // 0.45 of the lower rate, 10 kHz -> 4.5 kHz.
        for &f in &[100.0, 1000.0, 3000.0, 4400.0] {
            let w = tone(f, 48_000, 0.5);
            let out = resample(&w, 10_000).unwrap();
            assert!((interior_rms_db(&out) - interior_rms_db(&w)).abs() < 0.1, "{f} Hz");
        }
    }

    #[test]
    fn stopband_rejects_aliases() {
        let w = tone(7000.0, 48_000, 0.5);
        let out = resample(&w, 10_000).unwrap();
        assert!(interior_rms_db(&out) < -60.0);
    }

    #[test]
    fn irregular_ratio_uses_direct_kernel() {
        let w = tone(500.0, 44_101, 0.2);
        let out = resample(&w, 48_000).unwrap();
        assert!((interior_rms_db(&out) - interior_rms_db(&w)).abs() < 0.1);
    }

    #[test]
    fn stereo_channels_stay_interleaved() {
        let l: Vec<f64> = tone(300.0, 48_000, 0.1).into_samples();
        let r: Vec<f64> = l.iter().map(|v| -v).collect();
        let out = resample(&Waveform::stereo(&l, &r, 48_000).unwrap(), 16_000).unwrap();
        let (ol, or) = (out.channel(0), out.channel(1));
        for (a, b) in ol.iter().zip(&or) {
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_target_rejected() {
        let w = tone(500.0, 8000, 0.01);
        assert!(resample(&w, 0).is_err());
    }
}
