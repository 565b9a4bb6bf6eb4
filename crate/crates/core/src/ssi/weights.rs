use serde::{Deserialize, Serialize};

use super::F0Track;
use crate::error::{GesiError, Result};

pub const DEFAULT_H_MAX: f64 = 3.0;

/// How raw per-frame weights are scaled across channels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightNormalization {
    /// Divide by the channel mean so weights average to one at every frame.
    #[default]
    MeanOne,
    /// Divide by the channel sum, as the weighting formula is printed.
    SumOne,
}

/// `min(f_p / (h_max · F0), 1)`.
#[inline]
pub fn raw_ssi_weight(peak_hz: f64, f0_hz: f64, h_max: f64) -> f64 {
    (peak_hz / (h_max * f0_hz)).min(1.0)
}

/// Channel-major `n_channels × n_frames` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    w: Vec<f64>,
    n_channels: usize,
    n_frames: usize,
    h_max: f64,
    normalization: WeightNormalization,
}

impl WeightMatrix {
    /// All-ones weights.
    pub fn uniform(n_channels: usize, n_frames: usize) -> Self {
        Self {
            w: vec![1.0; n_channels * n_frames],
            n_channels,
            n_frames,
            h_max: 0.0,
            normalization: WeightNormalization::MeanOne,
        }
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn normalization(&self) -> WeightNormalization {
        self.normalization
    }

    pub fn channel(&self, i: usize) -> &[f64] {
        &self.w[i * self.n_frames..(i + 1) * self.n_frames]
    }

    pub fn get(&self, i: usize, frame: usize) -> f64 {
        self.w[i * self.n_frames + frame]
    }

    pub fn is_uniform(&self) -> bool {
        let first = self.w.first().copied().unwrap_or(1.0);
        self.w.iter().all(|&v| v == first)
    }
}

/// Weights for channels at `peak_freqs_hz` on an envelope grid of `n_frames`
/// frames at `env_rate_hz`. F0 is held from the nearest track frame.
pub fn ssi_weights(
    f0: &F0Track,
    peak_freqs_hz: &[f64],
    h_max: f64,
    env_rate_hz: f64,
    n_frames: usize,
    normalization: WeightNormalization,
) -> Result<WeightMatrix> {
    if !(h_max > 0.0 && h_max.is_finite()) {
        return Err(GesiError::invalid(format!("h_max must be positive, got {h_max}")));
    }
    if !(env_rate_hz > 0.0) {
        return Err(GesiError::invalid("envelope rate must be positive"));
    }
    if f0.is_empty() {
        return Err(GesiError::invalid("empty F0 track"));
    }
    if peak_freqs_hz.iter().any(|&f| !(f > 0.0)) {
        return Err(GesiError::invalid("peak frequencies must be positive"));
    }
    let n_ch = peak_freqs_hz.len();
    let mut w = vec![0.0; n_ch * n_frames];
    let mut column = vec![0.0; n_ch];
    for t in 0..n_frames {
        let f = f0.f0_at(t as f64 / env_rate_hz);
        for (c, &fp) in column.iter_mut().zip(peak_freqs_hz) {
            *c = raw_ssi_weight(fp, f, h_max);
        }
        let total: f64 = column.iter().sum();
        let scale = match normalization {
            WeightNormalization::MeanOne => n_ch as f64 / total,
            WeightNormalization::SumOne => 1.0 / total,
        };
        for (i, &c) in column.iter().enumerate() {
            w[i * n_frames + t] = c * scale;
        }
    }
    Ok(WeightMatrix {
        w,
        n_channels: n_ch,
        n_frames,
        h_max,
        normalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::FilterbankSpec;
    use proptest::prelude::*;

    fn constant_track(f0: f64) -> F0Track {
        F0Track::from_pairs((0..100).map(|k| (k as f64 * 0.01, f0))).unwrap()
    }

    #[test]
    fn raw_weight_examples() {
        assert!((raw_ssi_weight(150.0, 100.0, 3.0) - 0.5).abs() < 1e-15);
        assert_eq!(raw_ssi_weight(300.0, 100.0, 3.0), 1.0);
        assert_eq!(raw_ssi_weight(4000.0, 100.0, 3.0), 1.0);
        assert_eq!(raw_ssi_weight(100.0, super::super::UNVOICED_F0_HZ, 3.0), 1.0);
    }

    #[test]
    fn unvoiced_frames_give_exact_ones() {
        let track = constant_track(0.0);
        let peaks = FilterbankSpec::default().peak_freqs();
        let w = ssi_weights(&track, &peaks, 3.0, 2000.0, 300, WeightNormalization::MeanOne).unwrap();
        assert!(w.is_uniform());
        assert_eq!(w.get(0, 0), 1.0);
    }

    #[test]
    fn female_downweights_more_channels() {
        let peaks = FilterbankSpec::default().peak_freqs();
        let count_below = |f0: f64| peaks.iter().filter(|&&p| raw_ssi_weight(p, f0, 3.0) < 1.0).count();
        let (male, female) = (count_below(100.0), count_below(200.0));
        assert!(female > male);
        assert_eq!(male, peaks.iter().filter(|&&p| p < 300.0).count());
        assert_eq!(female, peaks.iter().filter(|&&p| p < 600.0).count());
    }

    #[test]
    fn mean_one_and_monotone() {
        let peaks = FilterbankSpec::default().peak_freqs();
        let w = ssi_weights(
            &constant_track(180.0),
            &peaks,
            3.0,
            2000.0,
            50,
            WeightNormalization::MeanOne,
        )
        .unwrap();
        for t in 0..50 {
            let col: Vec<f64> = (0..peaks.len()).map(|i| w.get(i, t)).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            assert!((mean - 1.0).abs() < 1e-9);
            assert!(col.windows(2).all(|p| p[0] <= p[1]));
            assert!(col.iter().all(|&v| v > 0.0 && v <= peaks.len() as f64));
        }
    }

    #[test]
    fn sum_one_mode() {
        let peaks = [150.0, 300.0, 600.0];
        let w = ssi_weights(
            &constant_track(100.0),
            &peaks,
            3.0,
            100.0,
            4,
            WeightNormalization::SumOne,
        )
        .unwrap();
        assert!((w.get(0, 0) - 0.2).abs() < 1e-12);
        assert!((w.get(2, 3) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_h_max() {
        let t = constant_track(100.0);
        assert!(ssi_weights(&t, &[100.0], 0.0, 2000.0, 10, WeightNormalization::MeanOne).is_err());
        assert!(ssi_weights(&t, &[100.0], -1.0, 2000.0, 10, WeightNormalization::MeanOne).is_err());
    }

    #[test]
    fn nearest_frame_hold() {
        let track = F0Track::from_pairs([(0.0, 100.0), (0.01, 400.0)]).unwrap();
        let w = ssi_weights(&track, &[150.0, 3000.0], 3.0, 1000.0, 20, WeightNormalization::SumOne).unwrap();
        // Frame 5 (5 ms) ties toward the earlier track frame.
        assert!((w.get(0, 5) - 0.5 / 1.5).abs() < 1e-12);
        assert!((w.get(0, 6) - 0.125 / 1.125).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn tiny_h_max_is_uniform(f0 in 70.0f64..400.0, h in 1e-6f64..1e-3) {
            let peaks = FilterbankSpec::default().peak_freqs();
            let w = ssi_weights(&constant_track(f0), &peaks, h, 2000.0, 8, WeightNormalization::MeanOne).unwrap();
            for i in 0..peaks.len() {
                prop_assert!((w.get(i, 3) - 1.0).abs() < 1e-12);
            }
        }
    }
}
