#![allow(dead_code)]

use gesi_core::signal::Waveform;
use gesi_core::stimuli::{gen_babble, mix_snr, speech_like_word, synthetic_corpus, BabbleSpec, SpeechLikeSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn babble(seconds: f64, seed: u64) -> Waveform {
    let corpus = synthetic_corpus(30, seed).unwrap();
    gen_babble(
        &BabbleSpec {
            duration_s: seconds,
            seed,
            ..BabbleSpec::default()
        },
        &corpus,
    )
    .unwrap()
}

/// Seeded word with a trial-dependent F0.
pub fn word(trial: u64) -> Waveform {
    let spec = SpeechLikeSpec {
        f0_hz: 100.0 + 15.0 * (trial % 8) as f64,
        ..SpeechLikeSpec::default()
    };
    speech_like_word(&spec, &mut rng(100 + trial)).unwrap()
}

pub fn mixture(word: &Waveform, noise: &Waveform, snr_db: f64, trial: u64) -> Waveform {
    mix_snr(word, noise, snr_db, &mut rng(200 + trial)).unwrap().mixture
}
