//! Metric-to-intelligibility sigmoid, its least-squares fit, and SRT extraction.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};

/// `I = 100 / (1 + exp(a·d + b))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidParams {
    pub a: f64,
    pub b: f64,
}

/// Published coefficients for common metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmoidPreset {
    pub metric: &'static str,
    pub params: SigmoidParams,
    pub note: &'static str,
}

#[allow(clippy::approx_constant)]
pub const GESI_PARAMS: SigmoidParams = SigmoidParams { a: -12.20, b: 6.28 };
pub const STOI_PARAMS: SigmoidParams = SigmoidParams { a: -11.01, b: 8.49 };
pub const ESTOI_PARAMS: SigmoidParams = SigmoidParams { a: -7.59, b: 4.46 };
pub const MBSTOI_PARAMS: SigmoidParams = SigmoidParams { a: -8.76, b: 6.29 };
pub const HASPI_V2_PARAMS: SigmoidParams = SigmoidParams { a: -5.91, b: 3.49 };

/// Three-coefficient logistic of HASPI v1 (`p = B + C·c + A_high·a_high`),
/// kept for reference only; no HASPI features are computed here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaspiV1Constants {
    pub b: f64,
    pub c: f64,
    pub a_high: f64,
}

pub const HASPI_V1_CONSTANTS: HaspiV1Constants = HaspiV1Constants {
    b: -13.81,
    c: 1.49,
    a_high: 17.10,
};

const NOTE: &str = "fit by least squares on mean unprocessed-condition word scores, 5 SNRs";

pub fn presets() -> Vec<SigmoidPreset> {
    [
        ("gesi", GESI_PARAMS),
        ("stoi", STOI_PARAMS),
        ("estoi", ESTOI_PARAMS),
        ("mbstoi", MBSTOI_PARAMS),
        ("haspi_v2", HASPI_V2_PARAMS),
    ]
    .into_iter()
    .map(|(metric, params)| SigmoidPreset {
        metric,
        params,
        note: NOTE,
    })
    .collect()
}

impl SigmoidParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(GesiError::invalid("sigmoid coefficients must be finite"));
        }
        Ok(Self { a, b })
    }

    pub fn preset(metric: &str) -> Result<Self> {
        presets()
            .into_iter()
            .find(|p| p.metric.eq_ignore_ascii_case(metric))
            .map(|p| p.params)
            .ok_or_else(|| GesiError::invalid(format!("no sigmoid preset for `{metric}`")))
    }

    /// Metric value mapped to 50 %.
    pub fn midpoint(&self) -> f64 {
        -self.b / self.a
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let p: SigmoidParams = serde_json::from_str(text)?;
        Self::new(p.a, p.b)
    }

    /// Reads `{"a": .., "b": ..}` or the name of a preset.
    pub fn load(spec: &str) -> Result<Self> {
        if let Ok(p) = Self::preset(spec) {
            return Ok(p);
        }
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path).map_err(|e| GesiError::io(path, e))?;
        Self::from_json_str(&text)
    }
}

/// Percent correct predicted from metric value `d`.
pub fn sigmoid_si(d: f64, p: &SigmoidParams) -> f64 {
    let u = p.a * d + p.b;
    if u > 700.0 {
        0.0
    } else {
        100.0 / (1.0 + u.exp())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidFit {
    pub params: SigmoidParams,
    /// Residual sum of squares in percent².
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
}

fn rss(pairs: &[(f64, f64)], p: &SigmoidParams) -> f64 {
    pairs.iter().map(|&(d, i)| (i - sigmoid_si(d, p)).powi(2)).sum()
}

/// Straight-line least squares `y = slope·x + intercept`.
fn line_fit(xs: impl Iterator<Item = (f64, f64)> + Clone) -> Option<(f64, f64)> {
    let n = xs.clone().count() as f64;
    let (mx, my) = xs.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = xs.fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx).powi(2))
    });
    (sxx > 0.0).then(|| {
        let slope = sxy / sxx;
        (slope, my - slope * mx)
    })
}

const MAX_ITER: usize = 200;

/// Least-squares fit of `(d, I)` pairs, Gauss–Newton from a logit-linear start.
pub fn fit_sigmoid(pairs: &[(f64, f64)]) -> Result<SigmoidFit> {
    if pairs.len() < 2 {
        return Err(GesiError::invalid("sigmoid fit needs at least two pairs"));
    }
    if pairs
        .iter()
        .any(|&(d, i)| !d.is_finite() || !(0.0..=100.0).contains(&i))
    {
        return Err(GesiError::invalid("pairs need finite d and I within [0, 100]"));
    }
    let logits = pairs.iter().map(|&(d, i)| {
        let i = i.clamp(0.5, 99.5);
        (d, (100.0 / i - 1.0).ln())
    });
    let (a0, b0) = line_fit(logits).ok_or_else(|| GesiError::Degenerate("all metric values are equal".into()))?;
    let init = SigmoidParams { a: a0, b: b0 };
    let init_rss = rss(pairs, &init);

    let mut p = init;
    let mut cur = init_rss;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        // Normal equations for the 2-parameter Jacobian.
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(d, i) in pairs {
            let f = sigmoid_si(d, &p);
            let dfdu = -f * (1.0 - f / 100.0);
            let (ja, jb) = (dfdu * d, dfdu);
            let r = i - f;
            jaa += ja * ja;
            jab += ja * jb;
            jbb += jb * jb;
            ga += ja * r;
            gb += jb * r;
        }
        let det = jaa * jbb - jab * jab;
        if !(det.abs() > 1e-300) {
            break;
        }
        let da = (jbb * ga - jab * gb) / det;
        let db = (jaa * gb - jab * ga) / det;
        let mut step = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand = SigmoidParams {
                a: p.a + step * da,
                b: p.b + step * db,
            };
            let r = rss(pairs, &cand);
            if r.is_finite() && r <= cur {
                let rel = (cur - r) / cur.max(1e-300);
                p = cand;
                improved = true;
                if rel < 1e-12 || r < 1e-24 {
                    converged = true;
                }
                cur = r;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            // No descent along the Gauss–Newton direction: stationary point.
            converged = true;
        }
        if converged {
            break;
        }
    }
    let (params, best) = if cur <= init_rss { (p, cur) } else { (init, init_rss) };
    Ok(SigmoidFit {
        params,
        rss: best,
        converged,
        iterations,
    })
}

/// Psychometric function `I(SNR) = 100 / (1 + exp(−(SNR − SRT)/s))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsychometricFit {
    pub srt_db: f64,
    pub slope_db: f64,
    pub converged: bool,
}

pub fn fit_psychometric(snr_db: &[f64], si_pct: &[f64]) -> Result<PsychometricFit> {
    if snr_db.len() != si_pct.len() {
        return Err(GesiError::LengthMismatch {
            left: snr_db.len(),
            right: si_pct.len(),
        });
    }
    if snr_db.len() < 2 {
        return Err(GesiError::invalid("psychometric fit needs at least two points"));
    }
    let crosses = si_pct.iter().any(|&v| v >= 50.0) && si_pct.iter().any(|&v| v <= 50.0);
    if crosses {
        let pairs: Vec<(f64, f64)> = snr_db.iter().copied().zip(si_pct.iter().copied()).collect();
        let fit = fit_sigmoid(&pairs)?;
        let SigmoidParams { a, b } = fit.params;
        if a < 0.0 {
            return Ok(PsychometricFit {
                srt_db: -b / a,
                slope_db: -1.0 / a,
                converged: fit.converged,
            });
        }
    }
    let (slope, intercept) = line_fit(snr_db.iter().copied().zip(si_pct.iter().copied()))
        .ok_or_else(|| GesiError::Degenerate("all SNR values are equal".into()))?;
    if !(slope > 0.0) {
        return Err(GesiError::Degenerate("scores do not increase with SNR; no SRT".into()));
    }
    Ok(PsychometricFit {
        srt_db: (50.0 - intercept) / slope,
        slope_db: 100.0 / (4.0 * slope),
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint_and_saturation() {
        let p = GESI_PARAMS;
        assert!((sigmoid_si(p.midpoint(), &p) - 50.0).abs() < 1e-9);
        assert!((sigmoid_si(0.514754, &p) - 50.0).abs() < 0.01);
        assert!((sigmoid_si(1.0, &p) - 100.0 / (1.0 + (-5.92f64).exp())).abs() < 1e-12);
        assert!((sigmoid_si(1.0, &p) - 99.73).abs() < 0.01);
        assert!((sigmoid_si(1e6, &p) - 100.0).abs() < 1e-12);
        assert_eq!(sigmoid_si(-1e6, &p), 0.0);
    }

    #[test]
    fn presets_round_trip() {
        assert_eq!(SigmoidParams::preset("GESI").unwrap(), GESI_PARAMS);
        assert_eq!(SigmoidParams::preset("haspi_v2").unwrap(), HASPI_V2_PARAMS);
        assert!(SigmoidParams::preset("haspi_v1").is_err());
        let p = SigmoidParams::from_json_str(r#"{"a": -3.0, "b": 1.5}"#).unwrap();
        assert_eq!(p, SigmoidParams { a: -3.0, b: 1.5 });
        assert!(SigmoidParams::from_json_str(r#"{"a": -3.0}"#).is_err());
    }

    #[test]
    fn exact_recovery() {
        let pairs: Vec<(f64, f64)> = [0.2, 0.35, 0.5, 0.65, 0.8]
            .iter()
            .map(|&d| (d, sigmoid_si(d, &GESI_PARAMS)))
            .collect();
        let fit = fit_sigmoid(&pairs).unwrap();
        assert!(((fit.params.a - GESI_PARAMS.a) / GESI_PARAMS.a).abs() < 1e-4);
        assert!(((fit.params.b - GESI_PARAMS.b) / GESI_PARAMS.b).abs() < 1e-4);
        assert!(fit.converged);
    }

    #[test]
    fn two_point_interpolation() {
        let pairs = [(0.3, 20.0), (0.7, 80.0)];
        let fit = fit_sigmoid(&pairs).unwrap();
        for (d, i) in pairs {
            assert!((sigmoid_si(d, &fit.params) - i).abs() < 0.5);
        }
    }

    #[test]
    fn fit_errors() {
        assert!(fit_sigmoid(&[(0.5, 50.0)]).is_err());
        assert!(matches!(
            fit_sigmoid(&[(0.5, 20.0), (0.5, 80.0)]),
            Err(GesiError::Degenerate(_))
        ));
        assert!(fit_sigmoid(&[(0.1, 20.0), (0.5, 101.0)]).is_err());
    }

    #[test]
    fn psychometric_examples() {
        let snr = [-3.0, 0.0, 3.0, 6.0, 9.0];
        let si: Vec<f64> = snr
            .iter()
            .map(|&s| 100.0 / (1.0 + (-(s - 1.5) / 2.0f64).exp()))
            .collect();
        let fit = fit_psychometric(&snr, &si).unwrap();
        assert!((fit.srt_db - 1.5).abs() < 0.05);
        assert!((fit.slope_db - 2.0).abs() < 0.05);
        assert!(fit.converged);

        let fit = fit_psychometric(&snr, &[10.0, 30.0, 55.0, 80.0, 92.0]).unwrap();
        assert!(fit.srt_db > 0.0 && fit.srt_db < 3.0, "{}", fit.srt_db);

        let fit = fit_psychometric(&snr, &[60.0, 70.0, 80.0, 88.0, 95.0]).unwrap();
        assert!(!fit.converged);
        assert!(fit.srt_db < -3.0);

        assert!(fit_psychometric(&[0.0], &[50.0]).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_d(d1 in -2.0f64..2.0, delta in 1e-6f64..1.0) {
            prop_assert!(sigmoid_si(d1 + delta, &GESI_PARAMS) >= sigmoid_si(d1, &GESI_PARAMS));
        }

        #[test]
        fn never_worse_than_init(noise in proptest::collection::vec(-10.0f64..10.0, 6)) {
            let pairs: Vec<(f64, f64)> = [0.1, 0.3, 0.45, 0.55, 0.7, 0.9]
                .iter()
                .zip(&noise)
                .map(|(&d, &e)| (d, (sigmoid_si(d, &GESI_PARAMS) + e).clamp(0.0, 100.0)))
                .collect();
            let fit = fit_sigmoid(&pairs).unwrap();
            let logit: Vec<(f64, f64)> = pairs.iter().map(|&(d, i)| (d, (100.0 / i.clamp(0.5, 99.5) - 1.0).ln())).collect();
            let (a, b) = line_fit(logit.iter().copied()).unwrap();
            let init_rss = rss(&pairs, &SigmoidParams { a, b });
            prop_assert!(fit.rss <= init_rss + 1e-9);
        }

        #[test]
        fn srt_shift_equivariance(c in -10.0f64..10.0) {
            let snr = [-3.0, 0.0, 3.0, 6.0, 9.0];
            let si = [12.0, 33.0, 52.0, 77.0, 90.0];
            let base = fit_psychometric(&snr, &si).unwrap();
            let shifted: Vec<f64> = snr.iter().map(|s| s + c).collect();
            let moved = fit_psychometric(&shifted, &si).unwrap();
            prop_assert!((moved.srt_db - base.srt_db - c).abs() < 1e-6);
        }
    }
}
