use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::Serialize;
use serde_json::json;

use gesi_core::error::{GesiError, Result};
use gesi_core::stimuli::{
    gen_babble, gen_tone_pips, huggins_bundle, load_corpus, synthetic_corpus, BabbleSpec, HugginsSpec, PipDirection,
    TonePipSpec,
};
use gesi_core::wav::save_wave;
use gesi_core::SCHEMA_VERSION;

#[derive(Subcommand, Debug)]
pub enum StimuliCommand {
    /// Reference tone followed by a −5 dB staircase of pips.
    Tonepips(TonePipArgs),
    /// Multi-talker babble from a word corpus.
    Babble(BabbleArgs),
    /// Three-interval Huggins-pitch screening trials.
    Huggins(HugginsArgs),
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TonePipArgs {
    #[arg(long, default_value_t = 1000.0)]
    freq: f64,
    /// Level of the reference tone and first pip.
    #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
    start_dbfs: f64,
    /// Present the staircase quietest first.
    #[arg(long)]
    ascending: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
pub struct BabbleArgs {
    /// Directory of word WAV files; synthetic words are used when absent.
    #[arg(long, env = "GESI_CORPUS_DIR")]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 300.0)]
    duration: f64,
    #[arg(long, default_value_t = 32)]
    tracks: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
pub struct HugginsArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 600.0)]
    fc: f64,
    #[arg(long, default_value_t = 0.06)]
    bw_frac: f64,
    #[arg(long, default_value_t = 1.0)]
    dur: f64,
    #[command(flatten)]
    out: OutArgs,
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| GesiError::io(dir, e))
}

fn write_sidecar(path: &Path, kind: &str, body: impl Serialize) -> Result<()> {
    let mut v = serde_json::to_value(body)?;
    v["schema_version"] = json!(SCHEMA_VERSION);
    v["kind"] = json!(kind);
    std::fs::write(path, serde_json::to_string_pretty(&v)?).map_err(|e| GesiError::io(path, e))
}

pub fn run(cmd: &StimuliCommand) -> Result<u8> {
    match cmd {
        StimuliCommand::Tonepips(a) => tonepips(a),
        StimuliCommand::Babble(a) => babble(a),
        StimuliCommand::Huggins(a) => huggins(a),
    }
    .map(|()| 0)
}

fn tonepips(a: &TonePipArgs) -> Result<()> {
    let spec = TonePipSpec {
        freq_hz: a.freq,
        direction: if a.ascending {
            PipDirection::Ascending
        } else {
            PipDirection::Descending
        },
        ..TonePipSpec::default()
    };
    let seq = gen_tone_pips(&spec, a.start_dbfs)?;
    prepare_dir(&a.out.out)?;
    let stem = format!("tonepips_{}hz", a.freq);
    let wav = a.out.out.join(format!("{stem}.wav"));
    save_wave(&wav, &seq.waveform)?;
    write_sidecar(
        &a.out.out.join(format!("{stem}.json")),
        "tonepips",
        json!({
            "spec": spec,
            "start_dbfs": a.start_dbfs,
            "events": seq.events,
            "measured_dbfs": seq.measured_levels(),
            "chosen_parameters": ["pip_dur_ms", "ramp_ms", "onset_interval_ms", "gap_s"],
            "wav": wav.file_name().map(|n| n.to_string_lossy().into_owned()),
        }),
    )?;
    println!("{} events written to {}", seq.events.len(), wav.display());
    Ok(())
}

fn babble(a: &BabbleArgs) -> Result<()> {
    let spec = BabbleSpec {
        n_tracks: a.tracks,
        duration_s: a.duration,
        seed: a.seed,
        ..BabbleSpec::default()
    };
    let (sources, corpus) = match &a.corpus {
        Some(dir) => (load_corpus(dir)?, dir.display().to_string()),
        None => {
            log::warn!("no corpus directory given; using synthetic words");
            (synthetic_corpus(64, a.seed)?, "synthetic".to_string())
        }
    };
    let noise = gen_babble(&spec, &sources)?;
    prepare_dir(&a.out.out)?;
    let wav = a.out.out.join(format!("babble_seed{}.wav", a.seed));
    save_wave(&wav, &noise)?;
    write_sidecar(
        &a.out.out.join(format!("babble_seed{}.json", a.seed)),
        "babble",
        json!({
            "spec": spec,
            "corpus": corpus,
            "n_source_words": sources.len(),
            "duration_s": noise.duration_s(),
        }),
    )?;
    println!("{:.1} s of babble written to {}", noise.duration_s(), wav.display());
    Ok(())
}

fn huggins(a: &HugginsArgs) -> Result<()> {
    let spec = HugginsSpec {
        fc_hz: a.fc,
        bw_frac: a.bw_frac,
        dur_s: a.dur,
        ..HugginsSpec::default()
    };
    let bundle = huggins_bundle(&spec, a.seed)?;
    prepare_dir(&a.out.out)?;
    let mut files = Vec::new();
    for (k, trial) in bundle.trials.iter().enumerate() {
        let name = format!("huggins_trial{:02}.wav", k + 1);
        save_wave(a.out.out.join(&name), &trial.waveform)?;
        files.push(name);
    }
    write_sidecar(
        &a.out.out.join("huggins.json"),
        "huggins",
        json!({
            "spec": spec,
            "seed": a.seed,
            "files": files,
            "answer_key": bundle.answer_key(),
            "phase_profile": "linear transition to a pi shift across the band edges",
        }),
    )?;
    println!("{} trials written to {}", files.len(), a.out.out.display());
    Ok(())
}
