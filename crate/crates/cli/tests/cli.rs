use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gesi_core::eval::SNR_SET_DB;
use gesi_core::frontend::ListenerProfile;
use gesi_core::mapping::{sigmoid_si, GESI_PARAMS};
use gesi_core::signal::{apply_gain_db, LevelCalibration, Waveform};
use gesi_core::stimuli::{
    gen_babble, mix_snr, speech_like_word, speech_shaped_noise, synthetic_corpus, BabbleSpec, SpeechLikeSpec,
};
use gesi_core::wav::save_wave;
use gesi_core::{GesiConfig, PreparedReference};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn gesi(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gesi"))
        .args(args)
        .current_dir(cwd)
        .env_remove("GESI_CORPUS_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr_json(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stderr);
    let line = text
        .lines()
        .rev()
        .find(|l| l.starts_with('{'))
        .expect("error JSON on stderr");
    serde_json::from_str(line).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn write(dir: &Path, name: &str, w: &Waveform) -> PathBuf {
    let p = dir.join(name);
    save_wave(&p, w).unwrap();
    p
}

#[test]
fn predict_identity_prints_one() {
    let dir = tempfile::tempdir().unwrap();
    let x = speech_shaped_noise(1.0, -26.0, 48_000, &mut rng(1)).unwrap();
    write(dir.path(), "ref.wav", &x);
    let o = gesi(
        &["predict", "ref.wav", "ref.wav", "--profile", "nh", "--rho", "0.5"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    assert!(stdout(&o).contains("d = 1.000000"), "{}", stdout(&o));
}

#[test]
fn predict_npip_sets_rho_and_json_is_versioned() {
    let dir = tempfile::tempdir().unwrap();
    let w = speech_like_word(&SpeechLikeSpec::default(), &mut rng(2)).unwrap();
    write(dir.path(), "ref.wav", &w);
    write(dir.path(), "low.wav", &apply_gain_db(&w, -20.0));
    let o = gesi(
        &[
            "predict",
            "ref.wav",
            "low.wav",
            "--npip",
            "10",
            "--json",
            "--sigmoid",
            "gesi",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!((v["rho"].as_f64().unwrap() - 0.60).abs() < 1e-12);
    let d = v["d"].as_f64().unwrap();
    assert!((v["si_pct"].as_f64().unwrap() - sigmoid_si(d, &GESI_PARAMS)).abs() < 1e-9);
}

#[test]
fn predict_hearing_loss_lowers_d() {
    let dir = tempfile::tempdir().unwrap();
    let w = speech_like_word(&SpeechLikeSpec::default(), &mut rng(3)).unwrap();
    write(dir.path(), "ref.wav", &w);
    let d_of = |profile: &str| {
        let o = gesi(
            &[
                "predict",
                "ref.wav",
                "ref.wav",
                "--profile",
                profile,
                "--alpha",
                "0.5",
                "--json",
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{o:?}");
        serde_json::from_str::<Value>(stdout(&o).trim()).unwrap()["d"]
            .as_f64()
            .unwrap()
    };
    let (nh, hl) = (d_of("nh"), d_of("80yr"));
    assert!(hl < nh, "80yr {hl} vs nh {nh}");
}

#[test]
fn usage_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = gesi(
        &["predict", "a.wav", "b.wav", "--rho", "0.5", "--npip", "10"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "usage");

    let o = gesi(&["predict", "a.wav", "b.wav"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let v = stderr_json(&o);
    assert_eq!(v["error"]["kind"], "data");
    assert_eq!(v["schema_version"], 1);

    let o = gesi(&["stimuli", "tonepips", "--freq", "700"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = gesi(&["--jobs", "0", "stimuli", "huggins"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

/// One word per SNR, subjective SI generated from the model's own metric
/// at ρ = 0.5 through the GESI sigmoid; per-listener offsets break ties.
fn closed_loop_manifest(dir: &Path, listeners: &[(&str, f64)]) -> PathBuf {
    let corpus = synthetic_corpus(16, 4).unwrap();
    let babble = gen_babble(
        &BabbleSpec {
            duration_s: 12.0,
            n_tracks: 4,
            seed: 4,
            ..BabbleSpec::default()
        },
        &corpus,
    )
    .unwrap();
    let cal = LevelCalibration::default();
    let mut lines = Vec::new();
    for (k, &snr) in SNR_SET_DB.iter().enumerate() {
        let w = speech_like_word(&SpeechLikeSpec::default(), &mut rng(10 + k as u64)).unwrap();
        let m = mix_snr(&w, &babble, snr, &mut rng(20 + k as u64)).unwrap();
        let r = write(dir, &format!("ref{k}.wav"), &w);
        let t = write(dir, &format!("mix{k}.wav"), &m.mixture);
        let d = PreparedReference::new(&w, &GesiConfig::default(), &cal)
            .unwrap()
            .predict_with_rho(&m.mixture, &ListenerProfile::normal_hearing(), 0.5)
            .unwrap()
            .d;
        for &(id, offset) in listeners {
            let si = (sigmoid_si(d, &GESI_PARAMS) + offset * (k as f64 - 2.0)).clamp(0.0, 100.0);
            lines.push(
                serde_json::json!({
                    "listener_id": id,
                    "condition": "unprocessed",
                    "snr_db": snr,
                    "ref_path": r.file_name().unwrap().to_str().unwrap(),
                    "test_path": t.file_name().unwrap().to_str().unwrap(),
                    "subjective_si_pct": si,
                })
                .to_string(),
            );
        }
    }
    let path = dir.join("manifest.jsonl");
    std::fs::write(&path, lines.join("\n")).unwrap();
    path
}

#[test]
fn evaluate_closed_loop_and_failures() {
    let dir = tempfile::tempdir().unwrap();
    closed_loop_manifest(dir.path(), &[("L1", 0.0)]);
    let o = gesi(
        &["evaluate", "manifest.jsonl", "--scheme", "eval1", "--out", "rep"],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("unprocessed") && text.contains("0.00"), "{text}");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(v["rmse"][0]["rmse"].as_f64().unwrap() < 1e-6);
    let csv = std::fs::read_to_string(dir.path().join("rep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);

    // Break one row: the rest is still evaluated and the exit code flags it.
    let manifest = std::fs::read_to_string(dir.path().join("manifest.jsonl")).unwrap();
    std::fs::write(
        dir.path().join("broken.jsonl"),
        manifest.replacen("mix2.wav", "gone.wav", 1),
    )
    .unwrap();
    let o = gesi(&["evaluate", "broken.jsonl", "--out", "broken"], dir.path());
    assert_eq!(o.status.code(), Some(4), "{o:?}");
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("broken.json")).unwrap()).unwrap();
    assert_eq!(v["row_errors"].as_array().unwrap().len(), 1);
    assert_eq!(v["cells"].as_array().unwrap().len(), 4);

    let all_gone = manifest.replace("mix", "gone");
    std::fs::write(dir.path().join("gone.jsonl"), all_gone).unwrap();
    let o = gesi(&["evaluate", "gone.jsonl", "--out", "gone"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn evaluate_compare_prints_ttest() {
    let dir = tempfile::tempdir().unwrap();
    closed_loop_manifest(dir.path(), &[("L1", 0.0), ("L2", 2.0), ("L3", -3.0), ("L4", 5.0)]);
    let o = gesi(
        &[
            "--jobs",
            "2",
            "evaluate",
            "manifest.jsonl",
            "--compare",
            "gesi",
            "stoi",
            "--out",
            "cmp",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let text = stdout(&o);
    let line = text
        .lines()
        .find(|l| l.starts_with("gesi vs stoi"))
        .expect("comparison line");
    assert!(line.contains("t = ") && line.contains("p = "), "{line}");
    assert!(dir.path().join("cmp_gesi.json").exists() && dir.path().join("cmp_stoi.csv").exists());
}

#[test]
fn stimuli_are_deterministic_with_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let o = gesi(
        &[
            "stimuli",
            "tonepips",
            "--freq",
            "1000",
            "--start-dbfs",
            "-10",
            "--out",
            "tp",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{o:?}");
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tp/tonepips_1000hz.json")).unwrap()).unwrap();
    assert_eq!(side["events"].as_array().unwrap().len(), 16);
    assert_eq!(side["schema_version"], 1);

    for run in ["a", "b"] {
        let o = gesi(&["stimuli", "huggins", "--seed", "3", "--out", run], dir.path());
        assert!(o.status.success(), "{o:?}");
        let o = gesi(
            &["stimuli", "babble", "--seed", "7", "--duration", "12", "--out", run],
            dir.path(),
        );
        assert!(o.status.success(), "{o:?}");
    }
    let hug: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/huggins.json")).unwrap()).unwrap();
    assert_eq!(hug["answer_key"].as_array().unwrap().len(), 6);
    for name in [
        "huggins.json",
        "huggins_trial01.wav",
        "babble_seed7.wav",
        "babble_seed7.json",
    ] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/babble_seed7.json")).unwrap()).unwrap();
    assert_eq!(side["corpus"], "synthetic");
    assert!((side["duration_s"].as_f64().unwrap() - 12.0).abs() < 1e-9);
}

#[test]
fn babble_reads_corpus_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("words");
    std::fs::create_dir(&corpus).unwrap();
    for (k, w) in synthetic_corpus(16, 9).unwrap().iter().enumerate() {
        write(&corpus, &format!("w{k:02}.wav"), w);
    }
    let o = Command::new(env!("CARGO_BIN_EXE_gesi"))
        .args([
            "stimuli",
            "babble",
            "--seed",
            "1",
            "--duration",
            "5",
            "--tracks",
            "4",
            "--out",
            "out",
        ])
        .current_dir(dir.path())
        .env("GESI_CORPUS_DIR", &corpus)
        .output()
        .unwrap();
    assert!(o.status.success(), "{o:?}");
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/babble_seed1.json")).unwrap()).unwrap();
    assert_eq!(side["n_source_words"], 16);
    assert_eq!(side["corpus"], corpus.display().to_string());
}
