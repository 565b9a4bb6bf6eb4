//! IIR modulation filterbank applied to channel envelopes.
//!
//! Channel 0 is a 3rd-order Butterworth lowpass that keeps the envelope DC
//! (absolute level). The remaining channels are 2nd-order bandpass filters
//! with constant Q, fed with the mean-removed envelope.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};
use crate::filters::{Biquad, Cascade};
use crate::frontend::ExcitationEnvelope;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfbSpec {
    /// First entry is the lowpass cutoff, the rest are bandpass centers.
    pub center_freqs_hz: Vec<f64>,
    pub q_factor: f64,
    pub lowpass_order: usize,
}

impl Default for MfbSpec {
    fn default() -> Self {
        Self {
            center_freqs_hz: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            q_factor: 1.0,
            lowpass_order: 3,
        }
    }
}

impl MfbSpec {
    pub fn n_bands(&self) -> usize {
        self.center_freqs_hz.len()
    }

    pub fn validate(&self, env_rate_hz: f64) -> Result<()> {
        let c = &self.center_freqs_hz;
        if c.is_empty() {
            return Err(GesiError::invalid("modulation filterbank needs at least one band"));
        }
        if c[0] <= 0.0 || c.windows(2).any(|p| p[1] <= p[0]) {
            return Err(GesiError::invalid(
                "modulation center frequencies must be positive and increasing",
            ));
        }
        if self.q_factor <= 0.0 {
            return Err(GesiError::invalid("modulation filter Q must be positive"));
        }
        if self.lowpass_order != 3 {
            return Err(GesiError::invalid("only a 3rd-order modulation lowpass is supported"));
        }
        let top = c[c.len() - 1];
        if env_rate_hz < 4.0 * top {
            return Err(GesiError::invalid(format!(
                "envelope rate {env_rate_hz} Hz is below 4x the top modulation band ({top} Hz)"
            )));
        }
        Ok(())
    }

    fn build(&self, env_rate_hz: f64) -> (Cascade, Vec<Biquad>) {
        let lp = Cascade::butterworth3_lowpass(self.center_freqs_hz[0], env_rate_hz);
        let bps = self.center_freqs_hz[1..]
            .iter()
            .map(|&fc| Biquad::bandpass(fc, self.q_factor, env_rate_hz))
            .collect();
        (lp, bps)
    }

    /// Magnitude response of band `j` at `freq_hz`.
    pub fn band_magnitude(&self, j: usize, freq_hz: f64, env_rate_hz: f64) -> f64 {
        let (lp, bps) = self.build(env_rate_hz);
        if j == 0 {
            lp.magnitude(freq_hz, env_rate_hz)
        } else {
            bps[j - 1].magnitude(freq_hz, env_rate_hz)
        }
    }
}

/// Signed modulation-filter outputs, laid out `[channel][band][frame]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationTensor {
    data: Vec<f64>,
    n_channels: usize,
    n_bands: usize,
    n_frames: usize,
    env_rate_hz: u32,
    peak_freqs: Vec<f64>,
    mfb_centers: Vec<f64>,
}

impl ModulationTensor {
    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_bands(&self) -> usize {
        self.n_bands
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

    pub fn mfb_centers(&self) -> &[f64] {
        &self.mfb_centers
    }

    pub fn series(&self, channel: usize, band: usize) -> &[f64] {
        let start = (channel * self.n_bands + band) * self.n_frames;
        &self.data[start..start + self.n_frames]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// Keeps only the first `frames` frames of every series.
    pub fn truncated(&self, frames: usize) -> ModulationTensor {
        let frames = frames.min(self.n_frames);
        let mut data = Vec::with_capacity(self.n_channels * self.n_bands * frames);
        for c in 0..self.n_channels {
            for b in 0..self.n_bands {
                data.extend_from_slice(&self.series(c, b)[..frames]);
            }
        }
        ModulationTensor {
            data,
            n_frames: frames,
            peak_freqs: self.peak_freqs.clone(),
            mfb_centers: self.mfb_centers.clone(),
            ..*self
        }
    }

    /// Plain-text dump: header line then one row per (channel, band).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["channel", "peak_hz", "band", "mod_hz", "values"])?;
        for c in 0..self.n_channels {
            for b in 0..self.n_bands {
                let joined = self
                    .series(c, b)
                    .iter()
                    .map(|v| format!("{v:.9e}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                w.write_record([
                    c.to_string(),
                    format!("{:.3}", self.peak_freqs[c]),
                    b.to_string(),
                    format!("{}", self.mfb_centers[b]),
                    joined,
                ])?;
            }
        }
        w.flush().map_err(|e| GesiError::io("<tensor csv>", e))?;
        Ok(())
    }
}

/// All bands for one envelope series, concatenated band after band.
fn filter_series(lp: &Cascade, bps: &[Biquad], env: &[f64]) -> Vec<f64> {
    let n = env.len();
    let mut out = Vec::with_capacity((bps.len() + 1) * n);
    let mut low = env.to_vec();
    lp.clone().process_slice(&mut low);
    out.extend_from_slice(&low);
    let mean = if n > 0 { env.iter().sum::<f64>() / n as f64 } else { 0.0 };
    let centered: Vec<f64> = env.iter().map(|v| v - mean).collect();
    for bp in bps {
        let mut band = centered.clone();
        bp.clone().process_slice(&mut band);
        out.extend_from_slice(&band);
    }
    out
}

pub fn mfb_filter(e: &ExcitationEnvelope, spec: &MfbSpec) -> Result<ModulationTensor> {
    let rate = e.env_rate_hz() as f64;
    spec.validate(rate)?;
    let (lp, bps) = spec.build(rate);
    let n_frames = e.n_frames();
    let n_bands = spec.n_bands();
    let per_channel: Vec<Vec<f64>> = (0..e.n_channels())
        .into_par_iter()
        .map(|c| filter_series(&lp, &bps, e.channel(c)))
        .collect();

    Ok(ModulationTensor {
        data: per_channel.concat(),
        n_channels: e.n_channels(),
        n_bands,
        n_frames,
        env_rate_hz: e.env_rate_hz(),
        peak_freqs: e.peak_freqs().to_vec(),
        mfb_centers: spec.center_freqs_hz.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn envelope(values: Vec<f64>) -> ExcitationEnvelope {
        ExcitationEnvelope::new(values, 1, 2000, vec![1000.0]).unwrap()
    }

    fn rms(s: &[f64]) -> f64 {
        (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt()
    }

    #[test]
    fn constant_envelope_steady_state() {
        let e = envelope(vec![1.0; 2000 * 8]);
        let m = mfb_filter(&e, &MfbSpec::default()).unwrap();
        let low = m.series(0, 0);
        assert!((low[low.len() - 1] - 1.0).abs() < 1e-6);
        for b in 1..7 {
            let s = m.series(0, b);
            assert!(s[4000..].iter().all(|v| v.abs() < 1e-3));
        }
    }

    #[test]
    fn four_hz_modulation_passes_its_band_only() {
        let n = 2000 * 10;
        let e = envelope(
            (0..n)
                .map(|i| 1.0 + 0.5 * (2.0 * PI * 4.0 * i as f64 / 2000.0).sin())
                .collect(),
        );
        let m = mfb_filter(&e, &MfbSpec::default()).unwrap();
        let tail = |b: usize| rms(&m.series(0, b)[n / 2..]);
        let input_rms = 0.5 / 2f64.sqrt();
        let gain4 = 20.0 * (tail(2) / input_rms).log10();
        let gain64 = 20.0 * (tail(6) / input_rms).log10();
        assert!(gain4.abs() < 1.0, "4 Hz band gain {gain4} dB");
        assert!(gain64 <= -20.0, "64 Hz band gain {gain64} dB");
    }

    #[test]
    fn zero_envelope_gives_zero_tensor() {
        let e = envelope(vec![0.0; 1000]);
        let m = mfb_filter(&e, &MfbSpec::default()).unwrap();
        assert!(m.values().iter().all(|&v| v == 0.0));
        assert_eq!((m.n_channels(), m.n_bands(), m.n_frames()), (1, 7, 1000));
    }

    #[test]
    fn rejects_low_envelope_rate() {
        let e = ExcitationEnvelope::new(vec![0.0; 100], 1, 200, vec![1000.0]).unwrap();
        assert!(mfb_filter(&e, &MfbSpec::default()).is_err());
    }

    #[test]
    fn bandwidth_matches_q() {
        // Swept-sine magnitude search for the -3 dB points of each bandpass.
        let spec = MfbSpec::default();
        for (j, &fc) in spec.center_freqs_hz.iter().enumerate().skip(1) {
            let peak = spec.band_magnitude(j, fc, 2000.0);
            let target = peak / 2f64.sqrt();
            let find = |mut lo: f64, mut hi: f64, rising: bool| {
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let above = spec.band_magnitude(j, mid, 2000.0) > target;
                    if above == rising {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                0.5 * (lo + hi)
            };
            let f_lo = find(1e-3, fc, true);
            let f_hi = find(fc, 999.0, false);
            let bw = f_hi - f_lo;
            assert!((bw - fc / spec.q_factor).abs() <= 0.1 * fc, "band {fc}: {bw}");
        }
    }

    #[test]
    fn impulse_responses_decay() {
        let n = 2000 * 40;
        let mut imp = vec![0.0; n];
        imp[0] = 1.0;
        let spec = MfbSpec::default();
        let (lp, bps) = spec.build(2000.0);
        let mut responses = Vec::new();
        let mut r = imp.clone();
        lp.clone().process_slice(&mut r);
        responses.push(r);
        for bp in &bps {
            let mut r = imp.clone();
            bp.clone().process_slice(&mut r);
            responses.push(r);
        }
        for r in responses {
            let total: f64 = r.iter().map(|v| v * v).sum();
            let late: f64 = r[2000 * 30..].iter().map(|v| v * v).sum();
            assert!(late < 1e-10 * total);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]
        #[test]
        fn linear_in_envelope(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let e1: Vec<f64> = (0..600).map(|_| rng.random::<f64>()).collect();
            let e2: Vec<f64> = (0..600).map(|_| rng.random::<f64>() - 0.5).collect();
            let (lp, bps) = MfbSpec::default().build(2000.0);
            let m1 = filter_series(&lp, &bps, &e1);
            let m2 = filter_series(&lp, &bps, &e2);
            let combo: Vec<f64> = e1.iter().zip(&e2).map(|(x, y)| a * x + b * y).collect();
            let m = filter_series(&lp, &bps, &combo);
            for ((v, v1), v2) in m.iter().zip(&m1).zip(&m2) {
                let expect = a * v1 + b * v2;
                proptest::prop_assert!((v - expect).abs() <= 1e-9 * (a * v1).abs().max((b * v2).abs()).max(1e-9));
            }
        }
    }
}
