//! Audiograms, listener profiles and the active/passive loss split.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};

/// Audiometric frequencies used by the built-in presets.
pub const AUDIOGRAM_FREQS_HZ: [f64; 8] = [125.0, 250.0, 500.0, 1000.0, 2000.0, 4000.0, 6000.0, 8000.0];

/// Average hearing levels of 70-year-old males (ISO 7029).
pub const HL_70YR: [f64; 8] = [8.0, 8.0, 9.0, 10.0, 19.0, 43.0, 49.0, 59.0];

/// Average hearing levels of 80-year-olds; 6 kHz is an interpolated value.
pub const HL_80YR: [f64; 8] = [24.0, 24.0, 27.0, 28.0, 33.0, 48.0, 58.0, 69.0];

/// Assumed maximum cochlear-amplifier gain in dB.
pub const MAX_ACTIVE_GAIN_DB: f64 = 30.0;

/// Hearing level (dB HL) as a function of frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audiogram {
    freqs_hz: Vec<f64>,
    levels_db_hl: Vec<f64>,
}

impl Audiogram {
    pub fn new(freqs_hz: Vec<f64>, levels_db_hl: Vec<f64>) -> Result<Self> {
        if freqs_hz.is_empty() || freqs_hz.len() != levels_db_hl.len() {
            return Err(GesiError::invalid(format!(
                "audiogram needs matching nonempty lists ({} freqs, {} levels)",
                freqs_hz.len(),
                levels_db_hl.len()
            )));
        }
        if freqs_hz.windows(2).any(|p| p[1] <= p[0]) || freqs_hz[0] <= 0.0 {
            return Err(GesiError::invalid(
                "audiogram frequencies must be positive and strictly increasing",
            ));
        }
        if let Some(l) = levels_db_hl.iter().find(|l| !(-10.0..=120.0).contains(*l)) {
            return Err(GesiError::invalid(format!("hearing level {l} dB outside [-10, 120]")));
        }
        Ok(Self { freqs_hz, levels_db_hl })
    }

    pub fn normal() -> Self {
        Self::new(AUDIOGRAM_FREQS_HZ.to_vec(), vec![0.0; 8]).unwrap()
    }

    pub fn age_70() -> Self {
        Self::new(AUDIOGRAM_FREQS_HZ.to_vec(), HL_70YR.to_vec()).unwrap()
    }

    pub fn age_80() -> Self {
        Self::new(AUDIOGRAM_FREQS_HZ.to_vec(), HL_80YR.to_vec()).unwrap()
    }

    /// `"nh"`, `"70yr"` or `"80yr"`.
    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "nh" | "normal" => Ok(Self::normal()),
            "70yr" | "70-yr" => Ok(Self::age_70()),
            "80yr" | "80-yr" => Ok(Self::age_80()),
            other => Err(GesiError::invalid(format!("unknown audiogram preset `{other}`"))),
        }
    }

    pub fn freqs_hz(&self) -> &[f64] {
        &self.freqs_hz
    }

    pub fn levels_db_hl(&self) -> &[f64] {
        &self.levels_db_hl
    }

    /// Hearing level at `freq_hz`, linear in log2-frequency between points
    /// and held constant beyond the ends.
    pub fn hearing_level_at(&self, freq_hz: f64) -> f64 {
        let f = &self.freqs_hz;
        let l = &self.levels_db_hl;
        if freq_hz <= f[0] {
            return l[0];
        }
        if freq_hz >= f[f.len() - 1] {
            return l[l.len() - 1];
        }
        let k = f.partition_point(|&x| x <= freq_hz);
        let (f0, f1) = (f[k - 1], f[k]);
        let t = (freq_hz / f0).log2() / (f1 / f0).log2();
        l[k - 1] + t * (l[k] - l[k - 1])
    }

    pub fn is_normal(&self) -> bool {
        self.levels_db_hl.iter().all(|&l| l <= 0.0)
    }

    /// Parses `[{"freq_hz": .., "level_db_hl": ..}, ..]` or
    /// `{"freqs_hz": [..], "levels_db_hl": [..]}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            freq_hz: f64,
            level_db_hl: f64,
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Doc {
            Rows(Vec<Row>),
            Columns { freqs_hz: Vec<f64>, levels_db_hl: Vec<f64> },
        }
        match serde_json::from_str::<Doc>(text)? {
            Doc::Rows(rows) => Self::new(
                rows.iter().map(|r| r.freq_hz).collect(),
                rows.iter().map(|r| r.level_db_hl).collect(),
            ),
            Doc::Columns { freqs_hz, levels_db_hl } => Self::new(freqs_hz, levels_db_hl),
        }
    }

    /// Parses CSV rows `freq_hz,level_db_hl` with an optional header.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let (mut freqs, mut levels) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(GesiError::Parse(format!(
                    "audiogram row {} has {} fields",
                    i + 1,
                    rec.len()
                )));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(f), Ok(l)) => {
                    freqs.push(f);
                    levels.push(l);
                }
                _ if i == 0 => continue,
                _ => return Err(GesiError::Parse(format!("audiogram row {}: not numeric", i + 1))),
            }
        }
        Self::new(freqs, levels)
    }

    /// Loads a `.json` or `.csv` audiogram file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GesiError::io(path, e))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Self::from_json_str(&text),
            _ => Self::from_csv_str(&text),
        }
    }
}

/// Splits a hearing loss into active (compressive) and passive parts.
///
/// The active part is `(1 - alpha) * min(hl, g_max)`; the rest is passive.
pub fn split_hearing_loss(hl_db: f64, compression_health: f64, g_max_db: f64) -> Result<(f64, f64)> {
    if hl_db < 0.0 {
        return Err(GesiError::invalid(format!(
            "hearing loss must be nonnegative, got {hl_db}"
        )));
    }
    if !(0.0..=1.0).contains(&compression_health) {
        return Err(GesiError::invalid(format!(
            "compression health {compression_health} outside [0, 1]"
        )));
    }
    if !(g_max_db > 0.0) {
        return Err(GesiError::invalid("maximum active gain must be positive"));
    }
    let active = (1.0 - compression_health) * hl_db.min(g_max_db);
    Ok((active, hl_db - active))
}

/// Audiogram plus compression health and optional tone-pip statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListenerProfile {
    pub audiogram: Audiogram,
    pub compression_health: f64,
    pub npip_mean: Option<f64>,
}

impl ListenerProfile {
    pub fn new(audiogram: Audiogram, compression_health: f64, npip_mean: Option<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&compression_health) {
            return Err(GesiError::invalid(format!(
                "compression health {compression_health} outside [0, 1]"
            )));
        }
        if let Some(n) = npip_mean {
            if !(1.0..=15.0).contains(&n) {
                return Err(GesiError::invalid(format!("mean tone-pip count {n} outside [1, 15]")));
            }
        }
        Ok(Self {
            audiogram,
            compression_health,
            npip_mean,
        })
    }

    /// Hearing level 0 everywhere with fully healthy compression.
    pub fn normal_hearing() -> Self {
        Self {
            audiogram: Audiogram::normal(),
            compression_health: 1.0,
            npip_mean: None,
        }
    }

    /// Preset audiogram with the given compression health.
    pub fn preset(name: &str, compression_health: f64) -> Result<Self> {
        Self::new(Audiogram::preset(name)?, compression_health, None)
    }

    pub fn with_npip(mut self, npip_mean: Option<f64>) -> Result<Self> {
        if let Some(n) = npip_mean {
            if !(1.0..=15.0).contains(&n) {
                return Err(GesiError::invalid(format!("mean tone-pip count {n} outside [1, 15]")));
            }
        }
        self.npip_mean = npip_mean;
        Ok(self)
    }

    /// Active and passive loss at `freq_hz`. Negative hearing levels count as zero loss.
    pub fn loss_at(&self, freq_hz: f64) -> (f64, f64) {
        let hl = self.audiogram.hearing_level_at(freq_hz).max(0.0);
        split_hearing_loss(hl, self.compression_health, MAX_ACTIVE_GAIN_DB).expect("validated profile parameters")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values_and_interpolation() {
        let a70 = Audiogram::age_70();
        assert_eq!(a70.hearing_level_at(4000.0), 43.0);
        let mid = (2000.0f64 * 4000.0).sqrt();
        assert!((a70.hearing_level_at(mid) - (19.0 + 43.0) / 2.0).abs() < 1e-9);
        assert!((a70.hearing_level_at(2828.0) - 31.0).abs() < 0.01);
        assert_eq!(Audiogram::age_80().hearing_level_at(6000.0), 58.0);
        // Constant extrapolation.
        assert_eq!(a70.hearing_level_at(50.0), 8.0);
        assert_eq!(a70.hearing_level_at(15_000.0), 59.0);
    }

    #[test]
    fn split_examples() {
        let (a, p) = split_hearing_loss(43.0, 0.5, 30.0).unwrap();
        assert!((a - 15.0).abs() < 1e-12 && (p - 28.0).abs() < 1e-12);
        assert_eq!(split_hearing_loss(0.0, 0.3, 30.0).unwrap(), (0.0, 0.0));
        assert_eq!(split_hearing_loss(20.0, 1.0, 30.0).unwrap(), (0.0, 20.0));
        assert!(split_hearing_loss(-1.0, 0.5, 30.0).is_err());
        assert!(split_hearing_loss(10.0, 1.5, 30.0).is_err());
    }

    #[test]
    fn validation() {
        assert!(Audiogram::new(vec![1000.0, 500.0], vec![0.0, 0.0]).is_err());
        assert!(Audiogram::new(vec![500.0], vec![0.0, 0.0]).is_err());
        assert!(Audiogram::new(vec![500.0], vec![130.0]).is_err());
        assert!(ListenerProfile::new(Audiogram::normal(), 1.2, None).is_err());
        assert!(ListenerProfile::new(Audiogram::normal(), 0.5, Some(16.0)).is_err());
        assert!(Audiogram::preset("90yr").is_err());
    }

    #[test]
    fn parses_json_and_csv() {
        let j = r#"[{"freq_hz": 500, "level_db_hl": 10}, {"freq_hz": 4000, "level_db_hl": 40}]"#;
        let a = Audiogram::from_json_str(j).unwrap();
        assert_eq!(a.levels_db_hl(), &[10.0, 40.0]);
        let j = r#"{"freqs_hz": [500, 4000], "levels_db_hl": [10, 40]}"#;
        assert_eq!(Audiogram::from_json_str(j).unwrap(), a);
        let c = "freq_hz,level_db_hl\n500, 10\n4000,40\n";
        assert_eq!(Audiogram::from_csv_str(c).unwrap(), a);
        assert!(Audiogram::from_csv_str("500,10\nabc,3\n").is_err());
    }

    proptest::proptest! {
        #[test]
        fn split_sums_to_total(hl in 0.0f64..120.0, alpha in 0.0f64..=1.0) {
            let (a, p) = split_hearing_loss(hl, alpha, 30.0).unwrap();
            proptest::prop_assert!(a >= 0.0 && p >= 0.0);
            proptest::prop_assert!((a + p - hl).abs() < 1e-9);
        }
    }
}
