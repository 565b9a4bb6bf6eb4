//! Batch evaluation against subjective scores: the three prediction schemes,
//! error statistics and participant screening.

mod harness;
mod manifest;
mod screen;
mod stats;

pub use harness::{
    compare_reports, run_eval, AudioScorer, CellResult, Comparison, Correlation, EvalOptions, EvaluationReport,
    ParamsInfo, Predictor, RmseEntry, RowError, Scheme, Scorer, TestJob,
};
pub use manifest::{
    load_manifest, parse_manifest_csv, parse_manifest_jsonl, snr_index, Condition, TrialRecord, SNR_SET_DB,
};
pub use screen::{participants_from_manifest, screen_participant, ParticipantRecord, ScreenOutcome, ScreenReason};
pub use stats::{paired_ttest, pearson_r_p, rmse, rmse_per_subject_condition, stars, welch_ttest, TTest};
