use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::manifest::{snr_index, Condition, TrialRecord, SNR_SET_DB};
use super::screen::participants_from_manifest;
use super::stats::{paired_ttest, pearson_r_p, rmse_per_subject_condition, TTest};
use crate::baseline::{estoi, stoi};
use crate::error::{GesiError, Result};
use crate::frontend::ListenerProfile;
use crate::mapping::{fit_sigmoid, sigmoid_si, SigmoidParams};
use crate::metric::{rho_from_npip, GesiConfig, PreparedReference, DEFAULT_RHO};
use crate::signal::LevelCalibration;
use crate::wav::load_wave;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Eval1,
    Eval2,
    Eval3,
}

impl std::str::FromStr for Scheme {
    type Err = GesiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['.', '-', '_'], "").as_str() {
            "eval1" | "1" => Ok(Scheme::Eval1),
            "eval2" | "2" => Ok(Scheme::Eval2),
            "eval3" | "3" => Ok(Scheme::Eval3),
            other => Err(GesiError::invalid(format!("unknown scheme `{other}`"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Eval1 => "eval1",
            Scheme::Eval2 => "eval2",
            Scheme::Eval3 => "eval3",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predictor {
    Gesi,
    Stoi,
    Estoi,
}

impl Predictor {
    pub fn as_str(&self) -> &'static str {
        match self {
            Predictor::Gesi => "gesi",
            Predictor::Stoi => "stoi",
            Predictor::Estoi => "estoi",
        }
    }

    pub fn default_params(&self) -> SigmoidParams {
        SigmoidParams::preset(self.as_str()).expect("every predictor has a preset")
    }
}

impl std::str::FromStr for Predictor {
    type Err = GesiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gesi" => Ok(Predictor::Gesi),
            "stoi" => Ok(Predictor::Stoi),
            "estoi" => Ok(Predictor::Estoi),
            other => Err(GesiError::invalid(format!("unknown predictor `{other}`"))),
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One test signal to score against a shared reference.
#[derive(Debug, Clone, PartialEq)]
pub struct TestJob {
    pub test_path: PathBuf,
    pub profile: ListenerProfile,
    pub rho: f64,
}

/// Produces metric values for test signals that share one reference.
pub trait Scorer: Sync {
    fn score_batch(&self, ref_path: &Path, jobs: &[TestJob]) -> Vec<std::result::Result<f64, String>>;
}

/// Scores WAV files; the reference analysis is done once per batch.
#[derive(Debug, Clone)]
pub struct AudioScorer {
    pub predictor: Predictor,
    pub config: GesiConfig,
    pub calibration: LevelCalibration,
}

impl AudioScorer {
    pub fn new(opts: &EvalOptions) -> Self {
        Self {
            predictor: opts.predictor,
            config: opts.gesi.clone(),
            calibration: opts.calibration,
        }
    }
}

impl Scorer for AudioScorer {
    fn score_batch(&self, ref_path: &Path, jobs: &[TestJob]) -> Vec<std::result::Result<f64, String>> {
        let reference = match load_wave(ref_path) {
            Ok(w) => w,
            Err(e) => return vec![Err(e.to_string()); jobs.len()],
        };
        match self.predictor {
            Predictor::Gesi => {
                let prepared = match PreparedReference::new(&reference, &self.config, &self.calibration) {
                    Ok(p) => p,
                    Err(e) => return vec![Err(format!("reference {}: {e}", ref_path.display())); jobs.len()],
                };
                jobs.par_iter()
                    .map(|job| {
                        let test = load_wave(&job.test_path).map_err(|e| e.to_string())?;
                        prepared
                            .predict_with_rho(&test, &job.profile, job.rho)
                            .map(|r| r.d)
                            .map_err(|e| e.to_string())
                    })
                    .collect()
            }
            Predictor::Stoi | Predictor::Estoi => {
                let reference = reference.to_mono();
                jobs.par_iter()
                    .map(|job| {
                        let test = load_wave(&job.test_path).map_err(|e| e.to_string())?.to_mono();
                        let score = if self.predictor == Predictor::Stoi {
                            stoi(&reference, &test)
                        } else {
                            estoi(&reference, &test)
                        };
                        score.map_err(|e| e.to_string())
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub scheme: Scheme,
    pub predictor: Predictor,
    pub gesi: GesiConfig,
    pub calibration: LevelCalibration,
    /// Compression health for the 70yr and 80yr profiles.
    pub alpha: f64,
    /// Frozen sigmoid parameters; when absent Eval1/Eval2 fit them.
    pub params: Option<SigmoidParams>,
}

impl EvalOptions {
    pub fn new(scheme: Scheme, predictor: Predictor) -> Self {
        Self {
            scheme,
            predictor,
            gesi: GesiConfig::default(),
            calibration: LevelCalibration::default(),
            alpha: 0.5,
            params: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub listener_id: String,
    pub condition: Condition,
    pub snr_db: f64,
    pub n_words: usize,
    pub rho: f64,
    pub metric: f64,
    pub subjective: Option<f64>,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseEntry {
    pub listener_id: String,
    pub condition: Condition,
    pub rmse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowError {
    /// Zero-based manifest row.
    pub row: usize,
    pub listener_id: String,
    pub message: String,
}

/// Where the sigmoid parameters came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsInfo {
    pub scheme: Scheme,
    /// `"fit"`, `"supplied"` or `"preset"`.
    pub source: String,
    pub global: Option<SigmoidParams>,
    pub per_listener: BTreeMap<String, SigmoidParams>,
    /// `(metric, SI)` points the global fit used.
    pub fit_points: Vec<(f64, f64)>,
    /// SHA-256 of the fit points (or the supplied parameters).
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub scheme: Scheme,
    pub predictor: Predictor,
    pub n_rows: usize,
    pub params: ParamsInfo,
    pub rho_by_listener: BTreeMap<String, f64>,
    pub cells: Vec<CellResult>,
    pub rmse: Vec<RmseEntry>,
    pub correlation: Option<Correlation>,
    pub row_errors: Vec<RowError>,
    pub warnings: Vec<String>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per listener × condition × SNR.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "listener_id",
            "condition",
            "snr_db",
            "n_words",
            "rho",
            "metric",
            "subjective",
            "predicted",
        ])?;
        for c in &self.cells {
            w.write_record([
                c.listener_id.clone(),
                c.condition.to_string(),
                c.snr_db.to_string(),
                c.n_words.to_string(),
                format!("{:.4}", c.rho),
                format!("{:.6}", c.metric),
                c.subjective.map(|v| format!("{v:.4}")).unwrap_or_default(),
                format!("{:.4}", c.predicted),
            ])?;
        }
        w.flush().map_err(|e| GesiError::io("<csv>", e))?;
        Ok(())
    }

    pub fn save(&self, json_path: impl AsRef<Path>, csv_path: impl AsRef<Path>) -> Result<()> {
        let json_path = json_path.as_ref();
        std::fs::write(json_path, self.to_json()?).map_err(|e| GesiError::io(json_path, e))?;
        let csv_path = csv_path.as_ref();
        let f = std::fs::File::create(csv_path).map_err(|e| GesiError::io(csv_path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Mean RMSE across listeners for each condition present.
    pub fn mean_rmse_by_condition(&self) -> BTreeMap<Condition, f64> {
        let mut acc: BTreeMap<Condition, Vec<f64>> = BTreeMap::new();
        for e in &self.rmse {
            acc.entry(e.condition).or_default().push(e.rmse);
        }
        acc.into_iter()
            .map(|(c, v)| (c, v.iter().sum::<f64>() / v.len() as f64))
            .collect()
    }

    /// Plain-text table of mean RMSE per condition plus the correlation.
    pub fn summary_table(&self) -> String {
        let mut s = format!("{} / {}\n", self.scheme, self.predictor);
        s.push_str(&format!("{:<12} {:>8}\n", "condition", "RMSE"));
        for (c, v) in self.mean_rmse_by_condition() {
            s.push_str(&format!("{:<12} {:>8.2}\n", c.as_str(), v));
        }
        match self.correlation {
            Some(c) => s.push_str(&format!("r = {:.3} (p = {:.3e}, n = {})\n", c.r, c.p, c.n)),
            None => s.push_str("r = n/a\n"),
        }
        if !self.row_errors.is_empty() {
            s.push_str(&format!("{} of {} rows failed\n", self.row_errors.len(), self.n_rows));
        }
        s
    }
}

fn mean(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>() / v.len() as f64
}

fn hash_points(points: &[(f64, f64)]) -> String {
    let mut h = Sha256::new();
    for (d, i) in points {
        h.update(format!("{d:.12e},{i:.12e}\n"));
    }
    hex::encode(h.finalize())
}

fn profile_for(scheme: Scheme, condition: Condition, alpha: f64) -> Result<ListenerProfile> {
    match (scheme, condition) {
        (Scheme::Eval1, _) | (_, Condition::Unprocessed | Condition::LowLevel) => Ok(ListenerProfile::normal_hearing()),
        (_, Condition::Yr70) => ListenerProfile::preset("70yr", alpha),
        (_, Condition::Yr80) => ListenerProfile::preset("80yr", alpha),
    }
}

/// Eval2 and Eval3 score the noisy signal through a hearing-loss profile
/// instead of the presented simulation.
fn test_path_for(scheme: Scheme, rec: &TrialRecord) -> std::result::Result<PathBuf, String> {
    if scheme != Scheme::Eval1 && rec.condition.is_hearing_loss() {
        rec.noisy_path
            .clone()
            .ok_or_else(|| format!("{scheme} needs noisy_path for condition {}", rec.condition))
    } else {
        Ok(rec.test_path.clone())
    }
}

#[derive(Default)]
struct Cell {
    metrics: Vec<f64>,
    subjective: Vec<f64>,
    missing_subjective: bool,
}

type CellKey = (String, Condition, usize);

/// Per-SNR `(mean metric, mean SI)` over the unprocessed cells in `cells`.
fn unprocessed_points<'a>(cells: impl Iterator<Item = (&'a CellKey, &'a Cell)>) -> Vec<(f64, f64)> {
    let mut by_snr: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for ((_, cond, k), cell) in cells {
        if *cond != Condition::Unprocessed || cell.missing_subjective {
            continue;
        }
        let e = by_snr.entry(*k).or_default();
        e.0.extend(&cell.metrics);
        e.1.extend(&cell.subjective);
    }
    by_snr.into_values().map(|(d, si)| (mean(&d), mean(&si))).collect()
}

/// Scores every manifest row, fits or applies the sigmoid per `opts.scheme`
/// and aggregates RMSE and correlation. Rows that fail are reported in
/// `row_errors`; an error is returned only if nothing could be scored.
pub fn run_eval(records: &[TrialRecord], opts: &EvalOptions, scorer: &dyn Scorer) -> Result<EvaluationReport> {
    if records.is_empty() {
        return Err(GesiError::invalid("manifest is empty"));
    }
    if opts.scheme != Scheme::Eval1 && opts.predictor != Predictor::Gesi {
        return Err(GesiError::invalid(format!(
            "{} takes a hearing-loss profile; {} cannot",
            opts.scheme, opts.predictor
        )));
    }
    let mut warnings = Vec::new();
    let mut row_errors = Vec::new();

    let participants = participants_from_manifest(records);
    let mut rho_by_listener = BTreeMap::new();
    let mut listener_rho_error: BTreeMap<String, String> = BTreeMap::new();
    for p in &participants {
        let rho = match (opts.gesi.rho, p.npip_mean) {
            (Some(r), _) => Ok(r),
            (None, Some(n)) => rho_from_npip(n).map_err(|e| e.to_string()),
            (None, None) if opts.scheme == Scheme::Eval3 && opts.predictor == Predictor::Gesi => {
                Err(format!("eval3 needs npip_mean for listener {}", p.listener_id))
            }
            (None, None) => Ok(DEFAULT_RHO),
        };
        match rho {
            Ok(r) => {
                rho_by_listener.insert(p.listener_id.clone(), r);
            }
            Err(m) => {
                listener_rho_error.insert(p.listener_id.clone(), m);
            }
        }
    }
    let rho_values: Vec<f64> = rho_by_listener.values().copied().collect();
    let mean_rho = if rho_values.is_empty() {
        DEFAULT_RHO
    } else {
        mean(&rho_values)
    };

    let mut groups: BTreeMap<PathBuf, Vec<(usize, TestJob)>> = BTreeMap::new();
    for (row, rec) in records.iter().enumerate() {
        let fail = |message: String| RowError {
            row,
            listener_id: rec.listener_id.clone(),
            message,
        };
        if let Some(m) = listener_rho_error.get(&rec.listener_id) {
            row_errors.push(fail(m.clone()));
            continue;
        }
        let rho = match opts.scheme {
            Scheme::Eval3 => rho_by_listener[&rec.listener_id],
            _ => mean_rho,
        };
        let job = test_path_for(opts.scheme, rec).and_then(|test_path| {
            profile_for(opts.scheme, rec.condition, opts.alpha)
                .map(|profile| TestJob {
                    test_path,
                    profile,
                    rho,
                })
                .map_err(|e| e.to_string())
        });
        match job {
            Ok(job) => groups.entry(rec.ref_path.clone()).or_default().push((row, job)),
            Err(m) => row_errors.push(fail(m)),
        }
    }

    let scored: Vec<(usize, std::result::Result<f64, String>)> = groups
        .par_iter()
        .flat_map_iter(|(ref_path, batch)| {
            let jobs: Vec<TestJob> = batch.iter().map(|(_, j)| j.clone()).collect();
            let results = scorer.score_batch(ref_path, &jobs);
            batch.iter().map(|(row, _)| *row).zip(results).collect::<Vec<_>>()
        })
        .collect();

    let mut cells: BTreeMap<CellKey, Cell> = BTreeMap::new();
    let mut n_scored = 0;
    for (row, result) in scored {
        let rec = &records[row];
        match result {
            Ok(d) if d.is_finite() => {
                n_scored += 1;
                let k = snr_index(rec.snr_db).expect("validated manifest SNR");
                let cell = cells.entry((rec.listener_id.clone(), rec.condition, k)).or_default();
                cell.metrics.push(d);
                match rec.subjective_si_pct {
                    Some(si) => cell.subjective.push(si),
                    None => cell.missing_subjective = true,
                }
            }
            Ok(d) => row_errors.push(RowError {
                row,
                listener_id: rec.listener_id.clone(),
                message: format!("non-finite metric {d}"),
            }),
            Err(message) => row_errors.push(RowError {
                row,
                listener_id: rec.listener_id.clone(),
                message,
            }),
        }
    }
    row_errors.sort_by_key(|e| e.row);
    if n_scored == 0 {
        let first = row_errors.first().map(|e| e.message.clone()).unwrap_or_default();
        return Err(GesiError::Degenerate(format!(
            "all {} manifest rows failed; first error: {first}",
            records.len()
        )));
    }

    let params = fit_params(opts, &cells, &mut warnings);

    let mut out_cells = Vec::with_capacity(cells.len());
    for ((listener, cond, k), cell) in &cells {
        let Some(p) = params.per_listener.get(listener).or(params.global.as_ref()) else {
            warnings.push(format!("no sigmoid parameters for listener {listener}; cells skipped"));
            continue;
        };
        let metric = mean(&cell.metrics);
        let rho = match opts.scheme {
            Scheme::Eval3 => rho_by_listener[listener],
            _ => mean_rho,
        };
        out_cells.push(CellResult {
            listener_id: listener.clone(),
            condition: *cond,
            snr_db: SNR_SET_DB[*k],
            n_words: cell.metrics.len(),
            rho,
            metric,
            subjective: (!cell.missing_subjective).then(|| mean(&cell.subjective)),
            predicted: sigmoid_si(metric, p),
        });
    }
    warnings.dedup();

    let mut by_pair: BTreeMap<(String, Condition), Vec<&CellResult>> = BTreeMap::new();
    for c in &out_cells {
        by_pair.entry((c.listener_id.clone(), c.condition)).or_default().push(c);
    }
    let mut rmse = Vec::new();
    let mut incomplete = 0;
    for ((listener, condition), cs) in by_pair {
        let rows: Option<Vec<(f64, f64, f64)>> = cs
            .iter()
            .map(|c| c.subjective.map(|s| (c.snr_db, s, c.predicted)))
            .collect();
        match rows.map(|r| rmse_per_subject_condition(&r)) {
            Some(Ok(v)) => rmse.push(RmseEntry {
                listener_id: listener,
                condition,
                rmse: v,
            }),
            _ => incomplete += 1,
        }
    }
    if incomplete > 0 {
        warnings.push(format!(
            "{incomplete} listener/condition pairs lack subjective SI at all five SNRs; no RMSE for them"
        ));
    }

    let (subj, pred): (Vec<f64>, Vec<f64>) = out_cells
        .iter()
        .filter_map(|c| c.subjective.map(|s| (s, c.predicted)))
        .unzip();
    let correlation = if subj.is_empty() {
        warnings.push("no subjective SI in manifest; predictions only".into());
        None
    } else {
        match pearson_r_p(&subj, &pred) {
            Ok((r, p)) => Some(Correlation { r, p, n: subj.len() }),
            Err(e) => {
                warnings.push(format!("correlation unavailable: {e}"));
                None
            }
        }
    };

    Ok(EvaluationReport {
        schema_version: SCHEMA_VERSION,
        scheme: opts.scheme,
        predictor: opts.predictor,
        n_rows: records.len(),
        params,
        rho_by_listener,
        cells: out_cells,
        rmse,
        correlation,
        row_errors,
        warnings,
    })
}

fn fit_params(opts: &EvalOptions, cells: &BTreeMap<CellKey, Cell>, warnings: &mut Vec<String>) -> ParamsInfo {
    let mut info = ParamsInfo {
        scheme: opts.scheme,
        source: String::new(),
        global: None,
        per_listener: BTreeMap::new(),
        fit_points: Vec::new(),
        hash: String::new(),
    };
    if let Some(p) = opts.params {
        info.source = "supplied".into();
        info.global = Some(p);
        info.hash = hash_points(&[(p.a, p.b)]);
        return info;
    }
    let preset = |info: &mut ParamsInfo| {
        let p = opts.predictor.default_params();
        info.source = "preset".into();
        info.global = Some(p);
        info.hash = hash_points(&[(p.a, p.b)]);
    };
    match opts.scheme {
        Scheme::Eval1 | Scheme::Eval2 => {
            let points = unprocessed_points(cells.iter());
            match fit_sigmoid(&points) {
                Ok(fit) if points.len() >= 3 => {
                    if !fit.converged {
                        warnings.push("sigmoid fit did not converge".into());
                    }
                    info.source = "fit".into();
                    info.global = Some(fit.params);
                    info.hash = hash_points(&points);
                    info.fit_points = points;
                }
                _ => {
                    warnings.push(format!(
                        "too few unprocessed points with subjective SI to fit; using {} preset parameters",
                        opts.predictor
                    ));
                    preset(&mut info);
                }
            }
        }
        Scheme::Eval3 => {
            info.source = "fit".into();
            let listeners: BTreeSet<&String> = cells.keys().map(|(l, _, _)| l).collect();
            let mut hasher = Sha256::new();
            for listener in listeners {
                let points = unprocessed_points(cells.iter().filter(|((l, _, _), _)| l == listener));
                if points.len() < SNR_SET_DB.len() {
                    warnings.push(format!(
                        "listener {listener} lacks unprocessed subjective SI at all five SNRs; no eval3 fit"
                    ));
                    continue;
                }
                match fit_sigmoid(&points) {
                    Ok(fit) => {
                        hasher.update(format!("{listener}:{}\n", hash_points(&points)));
                        info.per_listener.insert(listener.clone(), fit.params);
                    }
                    Err(e) => warnings.push(format!("listener {listener}: sigmoid fit failed: {e}")),
                }
            }
            info.hash = hex::encode(hasher.finalize());
        }
    }
    info
}

/// Paired comparison of two reports over their shared listener/condition RMSEs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub predictor_a: Predictor,
    pub predictor_b: Predictor,
    pub n_pairs: usize,
    pub mean_rmse_a: f64,
    pub mean_rmse_b: f64,
    pub overall: TTest,
    pub per_condition: BTreeMap<Condition, TTest>,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} vs {}: mean RMSE {:.2} vs {:.2}, t = {:.3}, p = {:.3e} {}",
            self.predictor_a,
            self.predictor_b,
            self.mean_rmse_a,
            self.mean_rmse_b,
            self.overall.t,
            self.overall.p,
            self.overall.stars()
        )?;
        for (c, t) in &self.per_condition {
            writeln!(f, "  {:<12} t = {:.3}, p = {:.3e} {}", c.as_str(), t.t, t.p, t.stars())?;
        }
        Ok(())
    }
}

pub fn compare_reports(a: &EvaluationReport, b: &EvaluationReport) -> Result<Comparison> {
    let b_map: BTreeMap<(&str, Condition), f64> = b
        .rmse
        .iter()
        .map(|e| ((e.listener_id.as_str(), e.condition), e.rmse))
        .collect();
    let mut pairs: BTreeMap<Condition, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for e in &a.rmse {
        if let Some(&rb) = b_map.get(&(e.listener_id.as_str(), e.condition)) {
            let p = pairs.entry(e.condition).or_default();
            p.0.push(e.rmse);
            p.1.push(rb);
        }
    }
    let (all_a, all_b): (Vec<f64>, Vec<f64>) = pairs
        .values()
        .flat_map(|(x, y)| x.iter().copied().zip(y.iter().copied()))
        .unzip();
    if all_a.is_empty() {
        return Err(GesiError::invalid("reports share no listener/condition RMSE entries"));
    }
    let overall = paired_ttest(&all_a, &all_b)?;
    let per_condition = pairs
        .iter()
        .filter_map(|(c, (x, y))| paired_ttest(x, y).ok().map(|t| (*c, t)))
        .collect();
    Ok(Comparison {
        predictor_a: a.predictor,
        predictor_b: b.predictor,
        n_pairs: all_a.len(),
        mean_rmse_a: mean(&all_a),
        mean_rmse_b: mean(&all_b),
        overall,
        per_condition,
    })
}
