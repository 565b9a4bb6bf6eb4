//! Extended cosine similarity, metric aggregation and the reference/test pipeline.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};
use crate::frontend::{analyze_with, EnvelopeSettings, FilterbankSpec, ListenerProfile};
use crate::modulation::{mfb_filter, MfbSpec, ModulationTensor};
use crate::resample::resample;
use crate::signal::{LevelCalibration, SplScale, Waveform, INTERNAL_RATE};
use crate::ssi::{estimate_f0, ssi_weights, F0Track, WeightMatrix, WeightNormalization, DEFAULT_H_MAX};
use crate::SCHEMA_VERSION;

pub const DEFAULT_RHO: f64 = 0.5;
/// Maximum relative duration difference between reference and test.
pub const DURATION_TOLERANCE: f64 = 0.05;

const RHO_INTERCEPT: f64 = 0.50;
const RHO_SLOPE: f64 = 0.02;
const NPIP_MAX: f64 = 15.0;
const PIP_STEP_DB: f64 = 5.0;

/// `ρ = 0.50 + 0.02 (15 − N̄pip)`, clamped to `[0, 1]`.
pub fn rho_from_npip(npip_mean: f64) -> Result<f64> {
    if !(1.0..=NPIP_MAX).contains(&npip_mean) {
        return Err(GesiError::invalid(format!(
            "mean pip count {npip_mean} outside [1, 15]"
        )));
    }
    Ok((RHO_INTERCEPT + RHO_SLOPE * (NPIP_MAX - npip_mean)).clamp(0.0, 1.0))
}

/// Sensation margin in dB: `5 (N̄pip − 1)`.
pub fn sensation_margin(npip_mean: f64) -> Result<f64> {
    if !(npip_mean >= 1.0) || !npip_mean.is_finite() {
        return Err(GesiError::invalid(format!("mean pip count {npip_mean} below 1")));
    }
    Ok(PIP_STEP_DB * (npip_mean - 1.0))
}

/// One similarity value. `degenerate` marks a zero-energy input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub value: f64,
    pub degenerate: bool,
}

/// `Σ w m_r m_t / ((Σ m_r²)^ρ (Σ m_t²)^(1−ρ))`. Weights apply to the numerator only.
pub fn extended_cosine_similarity(m_r: &[f64], m_t: &[f64], w: Option<&[f64]>, rho: f64) -> Result<Similarity> {
    if m_r.len() != m_t.len() {
        return Err(GesiError::LengthMismatch {
            left: m_r.len(),
            right: m_t.len(),
        });
    }
    if let Some(w) = w {
        if w.len() != m_r.len() {
            return Err(GesiError::LengthMismatch {
                left: m_r.len(),
                right: w.len(),
            });
        }
    }
    if m_r.is_empty() {
        return Err(GesiError::invalid("similarity needs at least one frame"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(GesiError::invalid(format!("rho {rho} outside [0, 1]")));
    }
    let (mut er, mut et, mut num) = (0.0, 0.0, 0.0);
    match w {
        Some(w) => {
            for ((&r, &t), &wt) in m_r.iter().zip(m_t).zip(w) {
                er += r * r;
                et += t * t;
                num += wt * r * t;
            }
        }
        None => {
            for (&r, &t) in m_r.iter().zip(m_t) {
                er += r * r;
                et += t * t;
                num += r * t;
            }
        }
    }
    if er == 0.0 || et == 0.0 {
        return Ok(Similarity {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Similarity {
        value: num / (er.powf(rho) * et.powf(1.0 - rho)),
        degenerate: false,
    })
}

/// `d = (1 / MN) Σ_i Σ_j w_j S_ij` for a row-major `n × m` matrix.
pub fn aggregate_metric(s: &[f64], n: usize, m: usize, band_weights: &[f64]) -> Result<f64> {
    if s.len() != n * m || band_weights.len() != m || n == 0 || m == 0 {
        return Err(GesiError::invalid(format!(
            "similarity matrix {} entries, expected {n}x{m} with {m} band weights (got {})",
            s.len(),
            band_weights.len()
        )));
    }
    let total: f64 = s
        .chunks_exact(m)
        .map(|row| row.iter().zip(band_weights).map(|(v, w)| v * w).sum::<f64>())
        .sum();
    Ok(total / (n * m) as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GesiConfig {
    /// Explicit ρ; when absent it comes from the listener's pip count, else 0.5.
    pub rho: Option<f64>,
    pub h_max: f64,
    pub filterbank: FilterbankSpec,
    pub envelope: EnvelopeSettings,
    pub mfb: MfbSpec,
    /// Per-band weights `w_j`; `None` means all ones.
    pub mfb_weights: Option<Vec<f64>>,
    pub weight_normalization: WeightNormalization,
    /// Externally computed reference F0, used instead of the built-in tracker.
    #[serde(skip)]
    pub f0_override: Option<F0Track>,
}

impl Default for GesiConfig {
    fn default() -> Self {
        Self {
            rho: None,
            h_max: DEFAULT_H_MAX,
            filterbank: FilterbankSpec::default(),
            envelope: EnvelopeSettings::default(),
            mfb: MfbSpec::default(),
            mfb_weights: None,
            weight_normalization: WeightNormalization::MeanOne,
            f0_override: None,
        }
    }
}

impl GesiConfig {
    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = Some(rho);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(rho) = self.rho {
            if !(0.0..=1.0).contains(&rho) {
                return Err(GesiError::invalid(format!("rho {rho} outside [0, 1]")));
            }
        }
        if !(self.h_max > 0.0 && self.h_max.is_finite()) {
            return Err(GesiError::invalid(format!(
                "h_max must be positive, got {}",
                self.h_max
            )));
        }
        self.filterbank.validate(INTERNAL_RATE as f64)?;
        self.mfb.validate(self.envelope.env_rate_hz as f64)?;
        if let Some(w) = &self.mfb_weights {
            if w.len() != self.mfb.n_bands() {
                return Err(GesiError::invalid(format!(
                    "{} modulation band weights for {} bands",
                    w.len(),
                    self.mfb.n_bands()
                )));
            }
            if w.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                return Err(GesiError::invalid(
                    "modulation band weights must be finite and nonnegative",
                ));
            }
        }
        Ok(())
    }

    pub fn band_weights(&self) -> Vec<f64> {
        self.mfb_weights
            .clone()
            .unwrap_or_else(|| vec![1.0; self.mfb.n_bands()])
    }

    /// Explicit ρ, else derived from the profile's pip count, else 0.5.
    pub fn resolve_rho(&self, profile: &ListenerProfile) -> Result<f64> {
        match (self.rho, profile.npip_mean) {
            (Some(r), _) => Ok(r),
            (None, Some(n)) => rho_from_npip(n),
            (None, None) => Ok(DEFAULT_RHO),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    /// Row-major `n_channels × m_channels` similarities.
    pub s: Vec<f64>,
    pub n_channels: usize,
    pub m_channels: usize,
    pub d: f64,
    pub rho_used: f64,
    pub frames_compared: usize,
    pub degenerate_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub schema_version: u32,
    pub d: f64,
    pub rho: f64,
    pub n_channels: usize,
    pub m_channels: usize,
    pub frames: usize,
}

impl MetricResult {
    pub fn s_at(&self, i: usize, j: usize) -> f64 {
        self.s[i * self.m_channels + j]
    }

    pub fn summary(&self) -> MetricSummary {
        MetricSummary {
            schema_version: SCHEMA_VERSION,
            d: self.d,
            rho: self.rho_used,
            n_channels: self.n_channels,
            m_channels: self.m_channels,
            frames: self.frames_compared,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary())?)
    }

    /// One row per auditory channel, one column per modulation band.
    pub fn write_s_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["channel".to_string()];
        header.extend((0..self.m_channels).map(|j| format!("band{j}")));
        w.write_record(&header)?;
        for i in 0..self.n_channels {
            let mut row = vec![i.to_string()];
            row.extend((0..self.m_channels).map(|j| format!("{:.12}", self.s_at(i, j))));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| GesiError::io("<similarity csv>", e))?;
        Ok(())
    }

    pub fn save_s_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| GesiError::io(path, e))?;
        self.write_s_csv(file)
    }
}

/// Compares two modulation tensors frame-for-frame over their common length.
pub fn similarity_matrix(
    reference: &ModulationTensor,
    test: &ModulationTensor,
    weights: &WeightMatrix,
    band_weights: &[f64],
    rho: f64,
) -> Result<MetricResult> {
    if reference.n_channels() != test.n_channels() || reference.n_bands() != test.n_bands() {
        return Err(GesiError::invalid("reference and test tensors have different shapes"));
    }
    if weights.n_channels() != reference.n_channels() {
        return Err(GesiError::invalid("weight matrix channel count differs from tensors"));
    }
    let t = reference.n_frames().min(test.n_frames());
    if t == 0 {
        return Err(GesiError::TooShort("no envelope frames to compare".into()));
    }
    if weights.n_frames() < t {
        return Err(GesiError::invalid("weight matrix shorter than the compared frames"));
    }
    let (n, m) = (reference.n_channels(), reference.n_bands());
    let rows: Vec<Vec<Similarity>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let w = &weights.channel(i)[..t];
            (0..m)
                .map(|j| {
                    extended_cosine_similarity(&reference.series(i, j)[..t], &test.series(i, j)[..t], Some(w), rho)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<Similarity> = rows.into_iter().flatten().collect();
    let degenerate_cells = cells.iter().filter(|c| c.degenerate).count();
    if degenerate_cells > 0 {
        log::debug!("{degenerate_cells} of {} similarity cells had a silent input", n * m);
    }
    let s: Vec<f64> = cells.iter().map(|c| c.value).collect();
    let d = aggregate_metric(&s, n, m, band_weights)?;
    Ok(MetricResult {
        s,
        n_channels: n,
        m_channels: m,
        d,
        rho_used: rho,
        frames_compared: t,
        degenerate_cells,
    })
}

fn to_internal_rate(w: &Waveform, what: &str) -> Result<Waveform> {
    if !w.is_mono() {
        return Err(GesiError::invalid(format!("{what} waveform must be mono")));
    }
    if w.is_empty() {
        return Err(GesiError::EmptyAudio);
    }
    resample(w, INTERNAL_RATE)
}

/// Reference-side analysis, reusable across many test signals.
#[derive(Debug, Clone)]
pub struct PreparedReference {
    config: GesiConfig,
    scale: SplScale,
    duration_s: f64,
    tensor: ModulationTensor,
    f0: F0Track,
    weights: WeightMatrix,
}

impl PreparedReference {
    pub fn new(reference: &Waveform, config: &GesiConfig, cal: &LevelCalibration) -> Result<Self> {
        config.validate()?;
        let reference = to_internal_rate(reference, "reference")?;
        let scale = cal.anchor(&reference)?;
        let env = analyze_with(
            &reference,
            &ListenerProfile::normal_hearing(),
            &config.filterbank,
            &config.envelope,
            &scale,
        )?;
        let tensor = mfb_filter(&env, &config.mfb)?;
        let f0 = match &config.f0_override {
            Some(track) => track.clone(),
            None => estimate_f0(&reference)?,
        };
        let weights = ssi_weights(
            &f0,
            env.peak_freqs(),
            config.h_max,
            env.env_rate_hz() as f64,
            env.n_frames(),
            config.weight_normalization,
        )?;
        Ok(Self {
            config: config.clone(),
            scale,
            duration_s: reference.duration_s(),
            tensor,
            f0,
            weights,
        })
    }

    pub fn config(&self) -> &GesiConfig {
        &self.config
    }

    pub fn scale(&self) -> SplScale {
        self.scale
    }

    pub fn f0(&self) -> &F0Track {
        &self.f0
    }

    pub fn weights(&self) -> &WeightMatrix {
        &self.weights
    }

    pub fn tensor(&self) -> &ModulationTensor {
        &self.tensor
    }

    /// Test-side modulation tensor on the reference's level scale.
    pub fn analyze_test(&self, test: &Waveform, profile: &ListenerProfile) -> Result<ModulationTensor> {
        let test = to_internal_rate(test, "test")?;
        let dt = test.duration_s();
        if (dt - self.duration_s).abs() > DURATION_TOLERANCE * self.duration_s {
            return Err(GesiError::DurationMismatch {
                reference_s: self.duration_s,
                test_s: dt,
            });
        }
        let env = analyze_with(
            &test,
            profile,
            &self.config.filterbank,
            &self.config.envelope,
            &self.scale,
        )?;
        mfb_filter(&env, &self.config.mfb)
    }

    /// ρ resolved from the stored configuration and `profile`.
    pub fn predict(&self, test: &Waveform, profile: &ListenerProfile) -> Result<MetricResult> {
        let rho = self.config.resolve_rho(profile)?;
        self.predict_with_rho(test, profile, rho)
    }

    pub fn predict_with_rho(&self, test: &Waveform, profile: &ListenerProfile, rho: f64) -> Result<MetricResult> {
        let tensor = self.analyze_test(test, profile)?;
        similarity_matrix(&self.tensor, &tensor, &self.weights, &self.config.band_weights(), rho)
    }
}

/// Full intrusive prediction for one reference/test pair.
pub fn gesi_predict(
    reference: &Waveform,
    test: &Waveform,
    profile: &ListenerProfile,
    config: &GesiConfig,
    cal: &LevelCalibration,
) -> Result<MetricResult> {
    PreparedReference::new(reference, config, cal)?.predict(test, profile)
}
