use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::TrialRecord;
use crate::error::{GesiError, Result};

/// Highest accepted mean pip count; higher values suggest the task was misunderstood.
pub const NPIP_SCREEN_MAX: f64 = 13.0;
/// Huggins trials that must be answered correctly.
pub const HUGGINS_REQUIRED: u8 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantRecord {
    pub listener_id: String,
    pub npip_mean: Option<f64>,
    pub huggins_correct: Option<u8>,
    #[serde(default)]
    pub device: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreenReason {
    Npip,
    Huggins,
    Device,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenOutcome {
    pub listener_id: String,
    pub pass: bool,
    pub reasons: Vec<ScreenReason>,
}

/// Pass iff `npip_mean ≤ 13`, all six Huggins trials correct, and the device check accepts.
pub fn screen_participant(
    rec: &ParticipantRecord,
    device_ok: &dyn Fn(&ParticipantRecord) -> bool,
) -> Result<ScreenOutcome> {
    let npip = rec.npip_mean.ok_or_else(|| GesiError::MissingField {
        field: "npip_mean",
        context: format!("participant {}", rec.listener_id),
    })?;
    let huggins = rec.huggins_correct.ok_or_else(|| GesiError::MissingField {
        field: "huggins_correct",
        context: format!("participant {}", rec.listener_id),
    })?;
    let mut reasons = Vec::new();
    if npip > NPIP_SCREEN_MAX {
        reasons.push(ScreenReason::Npip);
    }
    if huggins != HUGGINS_REQUIRED {
        reasons.push(ScreenReason::Huggins);
    }
    if !device_ok(rec) {
        reasons.push(ScreenReason::Device);
    }
    Ok(ScreenOutcome {
        listener_id: rec.listener_id.clone(),
        pass: reasons.is_empty(),
        reasons,
    })
}

/// One participant per listener id; the first non-missing value of each field wins.
pub fn participants_from_manifest(records: &[TrialRecord]) -> Vec<ParticipantRecord> {
    let mut map: BTreeMap<&str, ParticipantRecord> = BTreeMap::new();
    for r in records {
        let p = map.entry(&r.listener_id).or_insert_with(|| ParticipantRecord {
            listener_id: r.listener_id.clone(),
            npip_mean: None,
            huggins_correct: None,
            device: None,
        });
        p.npip_mean = p.npip_mean.or(r.npip_mean);
        p.huggins_correct = p.huggins_correct.or(r.huggins_correct);
    }
    map.into_values().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(npip: f64, huggins: u8) -> ParticipantRecord {
        ParticipantRecord {
            listener_id: "p".into(),
            npip_mean: Some(npip),
            huggins_correct: Some(huggins),
            device: None,
        }
    }

    #[test]
    fn criteria() {
        let any = |_: &ParticipantRecord| true;
        assert!(screen_participant(&rec(12.0, 6), &any).unwrap().pass);
        assert!(screen_participant(&rec(13.0, 6), &any).unwrap().pass);
        let o = screen_participant(&rec(14.0, 6), &any).unwrap();
        assert_eq!(o.reasons, vec![ScreenReason::Npip]);
        let o = screen_participant(&rec(11.0, 5), &any).unwrap();
        assert_eq!(o.reasons, vec![ScreenReason::Huggins]);
        let none = |_: &ParticipantRecord| false;
        assert_eq!(
            screen_participant(&rec(11.0, 6), &none).unwrap().reasons,
            vec![ScreenReason::Device]
        );
    }

    #[test]
    fn missing_fields() {
        let mut r = rec(12.0, 6);
        r.huggins_correct = None;
        assert!(matches!(
            screen_participant(&r, &|_| true),
            Err(GesiError::MissingField {
                field: "huggins_correct",
                ..
            })
        ));
    }
}
