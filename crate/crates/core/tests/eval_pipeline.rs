mod common;

use std::collections::BTreeMap;
use std::path::Path;

use gesi_core::eval::{
    run_eval, AudioScorer, Condition, EvalOptions, EvaluationReport, Predictor, Scheme, TrialRecord,
};
use gesi_core::frontend::ListenerProfile;
use gesi_core::mapping::{sigmoid_si, GESI_PARAMS};
use gesi_core::signal::{apply_gain_db, LevelCalibration};
use gesi_core::wav::save_wave;
use gesi_core::{GesiConfig, PreparedReference};

use common::{babble, mixture, word};

const SNRS: [f64; 5] = [-3.0, 0.0, 3.0, 6.0, 9.0];

struct Row {
    condition: Condition,
    snr_db: f64,
    word: usize,
    test: String,
    si: f64,
}

fn records(rows: &[Row], listeners: &[(&str, f64)], dir: &Path) -> Vec<TrialRecord> {
    let mut out = Vec::new();
    for &(id, npip) in listeners {
        for r in rows {
            let test = dir.join(&r.test);
            out.push(TrialRecord {
                listener_id: id.into(),
                condition: r.condition,
                snr_db: r.snr_db,
                ref_path: dir.join(format!("ref{}.wav", r.word)),
                test_path: test.clone(),
                noisy_path: Some(test),
                subjective_si_pct: Some(r.si),
                npip_mean: Some(npip),
                huggins_correct: Some(6),
            });
        }
    }
    out
}

fn mean_predicted(report: &EvaluationReport) -> BTreeMap<(Condition, i64), f64> {
    let mut acc: BTreeMap<(Condition, i64), Vec<f64>> = BTreeMap::new();
    for c in &report.cells {
        acc.entry((c.condition, c.snr_db as i64)).or_default().push(c.predicted);
    }
    acc.into_iter()
        .map(|(k, v)| (k, v.iter().sum::<f64>() / v.len() as f64))
        .collect()
}

#[test]
fn eval2_orders_hearing_loss_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let noise = babble(20.0, 21);
    let cal = LevelCalibration::default();
    let nh = ListenerProfile::normal_hearing();
    let mut rows = Vec::new();
    // 4 words × 5 SNRs = 20 seeded trials per condition.
    for w_idx in 0..4 {
        let w = word(40 + w_idx as u64);
        save_wave(dir.path().join(format!("ref{w_idx}.wav")), &w).unwrap();
        let prepared = PreparedReference::new(&w, &GesiConfig::default(), &cal).unwrap();
        for &snr in &SNRS {
            let m = mixture(&w, &noise, snr, 40 + w_idx as u64);
            let name = format!("mix{w_idx}_{snr}.wav");
            save_wave(dir.path().join(&name), &m).unwrap();
            let si = sigmoid_si(prepared.predict_with_rho(&m, &nh, 0.55).unwrap().d, &GESI_PARAMS);
            for condition in [Condition::Unprocessed, Condition::Yr70, Condition::Yr80] {
                rows.push(Row {
                    condition,
                    snr_db: snr,
                    word: w_idx,
                    test: name.clone(),
                    si,
                });
            }
        }
    }
    let recs = records(&rows, &[("P1", 12.5)], dir.path());
    let opts = EvalOptions::new(Scheme::Eval2, Predictor::Gesi);
    let r2 = run_eval(&recs, &opts, &AudioScorer::new(&opts)).unwrap();
    assert!(r2.row_errors.is_empty(), "{:?}", r2.row_errors);
    let pred = mean_predicted(&r2);
    for snr in SNRS {
        let k = snr as i64;
        let (u, a, b) = (
            pred[&(Condition::Unprocessed, k)],
            pred[&(Condition::Yr70, k)],
            pred[&(Condition::Yr80, k)],
        );
        assert!(u > a && a > b, "SNR {snr}: {u} {a} {b}");
    }

    let e1 = EvalOptions::new(Scheme::Eval1, Predictor::Gesi);
    let r1 = run_eval(&recs, &e1, &AudioScorer::new(&e1)).unwrap();
    assert_eq!(r1.params.hash, r2.params.hash);
    assert_eq!(r1.params.global, r2.params.global);
    // Eval1 scores every condition with the normal-hearing profile.
    let p1 = mean_predicted(&r1);
    assert!((p1[&(Condition::Yr80, 0)] - p1[&(Condition::Unprocessed, 0)]).abs() < 1e-9);

    // Running twice gives identical reports.
    let again = run_eval(&recs, &opts, &AudioScorer::new(&opts)).unwrap();
    assert_eq!(again, r2);
}

#[test]
fn eval3_lower_low_level_si_for_fewer_pips() {
    let dir = tempfile::tempdir().unwrap();
    let noise = babble(20.0, 31);
    let mut rows = Vec::new();
    for (w_idx, &snr) in SNRS.iter().enumerate() {
        let w = word(60 + w_idx as u64);
        save_wave(dir.path().join(format!("ref{w_idx}.wav")), &w).unwrap();
        let m = mixture(&w, &noise, snr, 60 + w_idx as u64);
        save_wave(dir.path().join(format!("mix{w_idx}.wav")), &m).unwrap();
        save_wave(dir.path().join(format!("low{w_idx}.wav")), &apply_gain_db(&m, -20.0)).unwrap();
        // Both listeners report the same unprocessed scores.
        let si = 15.0 + 17.0 * w_idx as f64;
        for (condition, test) in [(Condition::Unprocessed, "mix"), (Condition::LowLevel, "low")] {
            rows.push(Row {
                condition,
                snr_db: snr,
                word: w_idx,
                test: format!("{test}{w_idx}.wav"),
                si,
            });
        }
    }
    let recs = records(&rows, &[("npip15", 15.0), ("npip10", 10.0)], dir.path());
    let opts = EvalOptions::new(Scheme::Eval3, Predictor::Gesi);
    let report = run_eval(&recs, &opts, &AudioScorer::new(&opts)).unwrap();
    assert!((report.rho_by_listener["npip15"] - 0.50).abs() < 1e-12);
    assert!((report.rho_by_listener["npip10"] - 0.60).abs() < 1e-12);
    assert_eq!(report.params.per_listener.len(), 2);
    for snr in SNRS {
        let low = |id: &str| {
            report
                .cells
                .iter()
                .find(|c| c.listener_id == id && c.condition == Condition::LowLevel && c.snr_db == snr)
                .unwrap()
                .predicted
        };
        assert!(
            low("npip10") < low("npip15"),
            "SNR {snr}: {} vs {}",
            low("npip10"),
            low("npip15")
        );
    }
}
