use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};

/// Test SNRs in dB.
pub const SNR_SET_DB: [f64; 5] = [-3.0, 0.0, 3.0, 6.0, 9.0];

/// Position of `snr_db` in [`SNR_SET_DB`].
pub fn snr_index(snr_db: f64) -> Option<usize> {
    SNR_SET_DB.iter().position(|&s| (s - snr_db).abs() < 1e-9)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "unprocessed")]
    Unprocessed,
    #[serde(rename = "low-level", alias = "low_level", alias = "lowlevel")]
    LowLevel,
    #[serde(rename = "70yr")]
    Yr70,
    #[serde(rename = "80yr")]
    Yr80,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Unprocessed,
        Condition::LowLevel,
        Condition::Yr70,
        Condition::Yr80,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::Unprocessed => "unprocessed",
            Condition::LowLevel => "low-level",
            Condition::Yr70 => "70yr",
            Condition::Yr80 => "80yr",
        }
    }

    pub fn is_hearing_loss(&self) -> bool {
        matches!(self, Condition::Yr70 | Condition::Yr80)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Condition {
    type Err = GesiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unprocessed" => Ok(Condition::Unprocessed),
            "low-level" | "low_level" | "lowlevel" => Ok(Condition::LowLevel),
            "70yr" => Ok(Condition::Yr70),
            "80yr" => Ok(Condition::Yr80),
            other => Err(GesiError::Parse(format!("unknown condition `{other}`"))),
        }
    }
}

/// One presented word for one listener.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub listener_id: String,
    pub condition: Condition,
    pub snr_db: f64,
    pub ref_path: PathBuf,
    /// The waveform the listener heard (possibly hearing-loss simulated).
    pub test_path: PathBuf,
    /// Noisy waveform before hearing-loss simulation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noisy_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subjective_si_pct: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub npip_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub huggins_correct: Option<u8>,
}

impl TrialRecord {
    pub fn validate(&self) -> Result<()> {
        if self.listener_id.trim().is_empty() {
            return Err(GesiError::MissingField {
                field: "listener_id",
                context: "empty".into(),
            });
        }
        if snr_index(self.snr_db).is_none() {
            return Err(GesiError::invalid(format!(
                "SNR {} dB not in {:?}",
                self.snr_db, SNR_SET_DB
            )));
        }
        if let Some(si) = self.subjective_si_pct {
            if !(0.0..=100.0).contains(&si) {
                return Err(GesiError::invalid(format!("subjective SI {si} outside [0, 100]")));
            }
        }
        if let Some(n) = self.npip_mean {
            if !(1.0..=15.0).contains(&n) {
                return Err(GesiError::invalid(format!("npip_mean {n} outside [1, 15]")));
            }
        }
        if let Some(h) = self.huggins_correct {
            if h > 6 {
                return Err(GesiError::invalid(format!("huggins_correct {h} above 6")));
            }
        }
        Ok(())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.ref_path);
        fix(&mut self.test_path);
        if let Some(p) = self.noisy_path.as_mut() {
            fix(p);
        }
    }
}

/// One JSON object per line; blank lines and `#` comments are skipped.
pub fn parse_manifest_jsonl(text: &str) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rec: TrialRecord =
            serde_json::from_str(line).map_err(|e| GesiError::Parse(format!("manifest line {}: {e}", k + 1)))?;
        rec.validate()
            .map_err(|e| GesiError::Parse(format!("manifest line {}: {e}", k + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

fn opt_field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    idx: Option<usize>,
    name: &str,
    row: usize,
) -> Result<Option<T>> {
    match idx.and_then(|i| rec.get(i)).map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| GesiError::Parse(format!("manifest row {row}: bad {name} `{v}`"))),
    }
}

/// CSV with a header naming the record fields.
pub fn parse_manifest_csv(text: &str) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let required = |name: &'static str| {
        col(name).ok_or_else(|| GesiError::MissingField {
            field: name,
            context: "manifest CSV header".into(),
        })
    };
    let (c_listener, c_cond, c_snr, c_ref, c_test) = (
        required("listener_id")?,
        required("condition")?,
        required("snr_db")?,
        required("ref_path")?,
        required("test_path")?,
    );
    let (c_noisy, c_si, c_npip, c_hug) = (
        col("noisy_path"),
        col("subjective_si_pct"),
        col("npip_mean"),
        col("huggins_correct"),
    );
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = k + 2;
        let get = |i: usize| rec.get(i).unwrap_or("").to_string();
        let record = TrialRecord {
            listener_id: get(c_listener),
            condition: get(c_cond).parse()?,
            snr_db: get(c_snr)
                .parse()
                .map_err(|_| GesiError::Parse(format!("manifest row {row}: bad snr_db")))?,
            ref_path: get(c_ref).into(),
            test_path: get(c_test).into(),
            noisy_path: opt_field::<String>(&rec, c_noisy, "noisy_path", row)?.map(PathBuf::from),
            subjective_si_pct: opt_field(&rec, c_si, "subjective_si_pct", row)?,
            npip_mean: opt_field(&rec, c_npip, "npip_mean", row)?,
            huggins_correct: opt_field(&rec, c_hug, "huggins_correct", row)?,
        };
        record
            .validate()
            .map_err(|e| GesiError::Parse(format!("manifest row {row}: {e}")))?;
        out.push(record);
    }
    Ok(out)
}

/// Reads a `.csv` or JSON-lines manifest; relative audio paths resolve
/// against the manifest's directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| GesiError::io(path, e))?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let mut records = if is_csv {
        parse_manifest_csv(&text)?
    } else {
        parse_manifest_jsonl(&text)?
    };
    let base = path.parent().unwrap_or(Path::new("."));
    records.iter_mut().for_each(|r| r.resolve_paths(base));
    Ok(records)
}
