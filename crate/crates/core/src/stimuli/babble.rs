use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};
use crate::signal::{db_to_amplitude, Waveform, INTERNAL_RATE};
use crate::wav::load_for_analysis;

use super::{speech_like_word, SpeechLikeSpec};

const MIN_SOURCE_S: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BabbleSpec {
    pub n_tracks: usize,
    pub duration_s: f64,
    pub seed: u64,
    pub peak_dbfs: f64,
    pub sample_rate: u32,
}

impl Default for BabbleSpec {
    fn default() -> Self {
        Self {
            n_tracks: 32,
            duration_s: 300.0,
            seed: 0,
            peak_dbfs: -1.0,
            sample_rate: INTERNAL_RATE,
        }
    }
}

/// Every `.wav` under `dir` (sorted by name), mono at the internal rate.
pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Vec<Waveform>> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| GesiError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(GesiError::invalid(format!("no .wav files in {}", dir.display())));
    }
    paths.iter().map(load_for_analysis).collect()
}

/// Speech-like words with varied F0 and length, standing in for a word corpus.
pub fn synthetic_corpus(n_words: usize, seed: u64) -> Result<Vec<Waveform>> {
    let mut rng = super::rng(seed);
    (0..n_words)
        .map(|_| {
            let spec = SpeechLikeSpec {
                duration_s: rng.random_range(0.5..1.0),
                f0_hz: rng.random_range(100.0..250.0),
                edge_silence_s: 0.02,
                ..SpeechLikeSpec::default()
            };
            speech_like_word(&spec, &mut rng)
        })
        .collect()
}

fn build_track(sources: &[Waveform], n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut track = Vec::with_capacity(n + 48_000);
    while track.len() < n {
        track.extend_from_slice(sources[rng.random_range(0..sources.len())].samples());
    }
    track.truncate(n);
    let offset = rng.random_range(0..n);
    track.rotate_left(offset);
    track
}

/// Sum of `n_tracks` independent random word concatenations, each circularly
/// shifted by a random start, normalized to `peak_dbfs`.
pub fn gen_babble(spec: &BabbleSpec, sources: &[Waveform]) -> Result<Waveform> {
    if spec.n_tracks < 2 {
        return Err(GesiError::invalid("babble needs at least two tracks"));
    }
    if !(spec.duration_s > 0.0) || spec.peak_dbfs > 0.0 {
        return Err(GesiError::invalid(
            "babble duration must be positive and peak at most 0 dBFS",
        ));
    }
    if sources.is_empty() {
        return Err(GesiError::invalid("babble source set is empty"));
    }
    if sources
        .iter()
        .any(|s| !s.is_mono() || s.sample_rate() != spec.sample_rate || s.is_empty())
    {
        return Err(GesiError::invalid(format!(
            "babble sources must be nonempty mono at {} Hz",
            spec.sample_rate
        )));
    }
    let total: f64 = sources.iter().map(Waveform::duration_s).sum();
    if total < MIN_SOURCE_S {
        return Err(GesiError::TooShort(format!(
            "{total:.1} s of source audio; need {MIN_SOURCE_S} s"
        )));
    }
    let n = (spec.duration_s * spec.sample_rate as f64).round() as usize;
    let mut rng = super::rng(spec.seed);
    let mut sum = vec![0.0; n];
    for _ in 0..spec.n_tracks {
        let track = build_track(sources, n, &mut rng);
        sum.iter_mut().zip(&track).for_each(|(s, t)| *s += t);
    }
    let peak = sum.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Err(GesiError::Degenerate("babble sources are silent".into()));
    }
    let g = db_to_amplitude(spec.peak_dbfs) / peak;
    sum.iter_mut().for_each(|v| *v *= g);
    Waveform::mono(sum, spec.sample_rate)
}
