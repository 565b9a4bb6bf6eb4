//! Generators for the listening-test material: tone-pip staircases, babble,
//! SNR mixtures, Huggins-pitch headphone checks and synthetic speech.

mod babble;
mod huggins;
mod mix;
mod synth;
mod tonepip;

pub use babble::{gen_babble, load_corpus, synthetic_corpus, BabbleSpec};
pub use huggins::{gen_huggins, huggins_bundle, HugginsBundle, HugginsSpec, HugginsTrial};
pub use mix::{mix_snr, Mixture};
pub use synth::{speech_like_word, speech_shaped_noise, SpeechLikeSpec};
pub use tonepip::{
    gen_tone_pips, zero_hl_spl_db, zero_hl_spl_stats, PipDirection, PipEvent, TonePipSequence, TonePipSpec,
    TONE_PIP_FREQS_HZ, ZERO_HL_SPL_DB,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Raised-cosine fade applied in place to both ends.
pub(crate) fn apply_ramps(x: &mut [f64], ramp: usize) {
    let ramp = ramp.min(x.len() / 2);
    let n = x.len();
    for k in 0..ramp {
        let g = 0.5 - 0.5 * (std::f64::consts::PI * (k as f64 + 0.5) / ramp as f64).cos();
        x[k] *= g;
        x[n - 1 - k] *= g;
    }
}
