use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::manifest::snr_index;
use crate::error::{GesiError, Result};

pub fn rmse(diffs: &[f64]) -> f64 {
    if diffs.is_empty() {
        return 0.0;
    }
    (diffs.iter().map(|d| d * d).sum::<f64>() / diffs.len() as f64).sqrt()
}

/// RMSE between subjective and predicted SI over exactly the five test SNRs.
/// Rows are `(snr_db, subjective, predicted)`.
pub fn rmse_per_subject_condition(rows: &[(f64, f64, f64)]) -> Result<f64> {
    let mut seen = [false; 5];
    for &(snr, _, _) in rows {
        let k = snr_index(snr).ok_or_else(|| GesiError::invalid(format!("SNR {snr} dB not in the test set")))?;
        if seen[k] {
            return Err(GesiError::invalid(format!("SNR {snr} dB listed twice")));
        }
        seen[k] = true;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(GesiError::MissingField {
            field: "snr_db",
            context: format!("no point at {} dB", super::SNR_SET_DB[k]),
        });
    }
    let diffs: Vec<f64> = rows.iter().map(|&(_, s, p)| s - p).collect();
    Ok(rmse(&diffs))
}

fn two_sided_p(t: f64, df: f64) -> f64 {
    match StudentsT::new(0.0, 1.0, df) {
        Ok(dist) => (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0),
        Err(_) => f64::NAN,
    }
}

/// Sample Pearson correlation and its two-sided p-value (n − 2 df).
pub fn pearson_r_p(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() {
        return Err(GesiError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(GesiError::invalid("correlation needs at least three pairs"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(GesiError::Degenerate("zero variance in correlation input".into()));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = nf - 2.0;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        two_sided_p(r * (df / (1.0 - r * r)).sqrt(), df)
    };
    Ok((r, p))
}

/// Significance marker used in result tables.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub p: f64,
    pub df: f64,
    /// Zero variance made the statistic undefined.
    pub degenerate: bool,
}

impl TTest {
    pub fn stars(&self) -> &'static str {
        if self.degenerate {
            ""
        } else {
            stars(self.p)
        }
    }
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Two-sided paired t-test on `a − b`.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(GesiError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 3 {
        return Err(GesiError::invalid("paired t-test needs at least three pairs"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (m, var) = mean_var(&diffs);
    let df = (diffs.len() - 1) as f64;
    if var == 0.0 {
        return Ok(TTest {
            t: if m == 0.0 { 0.0 } else { f64::NAN },
            p: if m == 0.0 { 1.0 } else { f64::NAN },
            df,
            degenerate: true,
        });
    }
    let t = m / (var / diffs.len() as f64).sqrt();
    Ok(TTest {
        t,
        p: two_sided_p(t, df),
        df,
        degenerate: false,
    })
}

/// Two-sided Welch t-test for independent samples.
pub fn welch_ttest(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(GesiError::invalid("Welch t-test needs at least two values per group"));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    if sa + sb == 0.0 {
        return Ok(TTest {
            t: if ma == mb { 0.0 } else { f64::NAN },
            p: if ma == mb { 1.0 } else { f64::NAN },
            df: (a.len() + b.len() - 2) as f64,
            degenerate: true,
        });
    }
    let t = (ma - mb) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (a.len() - 1) as f64 + sb * sb / (b.len() - 1) as f64);
    Ok(TTest {
        t,
        p: two_sided_p(t, df),
        df,
        degenerate: false,
    })
}
