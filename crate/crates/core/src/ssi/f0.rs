use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{GesiError, Result};
use crate::resample::resample;
use crate::signal::Waveform;

/// F0 value stored for unvoiced frames. Any positive `f_p` divided by
/// `h_max · 1e-4` exceeds one, so unvoiced frames get unit weights.
pub const UNVOICED_F0_HZ: f64 = 1e-4;

/// Autocorrelation tracker parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F0Settings {
    pub analysis_rate_hz: u32,
    pub window_s: f64,
    pub hop_s: f64,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub voicing_threshold: f64,
    /// Lowest-lag peak whose correlation reaches this fraction of the max wins.
    pub octave_tolerance: f64,
    pub min_duration_s: f64,
}

impl Default for F0Settings {
    fn default() -> Self {
        Self {
            analysis_rate_hz: 12_000,
            window_s: 0.040,
            hop_s: 0.010,
            f0_min_hz: 70.0,
            f0_max_hz: 400.0,
            voicing_threshold: 0.45,
            octave_tolerance: 0.85,
            min_duration_s: 0.080,
        }
    }
}

/// Per-frame fundamental frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F0Track {
    pub times_s: Vec<f64>,
    pub f0_hz: Vec<f64>,
    pub voiced: Vec<bool>,
}

impl F0Track {
    /// Builds a track from `(time_s, f0_hz)` pairs; non-positive F0 marks a frame unvoiced.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut track = F0Track {
            times_s: Vec::new(),
            f0_hz: Vec::new(),
            voiced: Vec::new(),
        };
        for (t, f) in pairs {
            if !t.is_finite() || !f.is_finite() {
                return Err(GesiError::Parse(format!("non-finite F0 row ({t}, {f})")));
            }
            if let Some(&last) = track.times_s.last() {
                if t <= last {
                    return Err(GesiError::Parse(format!("F0 times must increase (at {t} s)")));
                }
            }
            let voiced = f > UNVOICED_F0_HZ;
            track.times_s.push(t);
            track.f0_hz.push(if voiced { f } else { UNVOICED_F0_HZ });
            track.voiced.push(voiced);
        }
        if track.times_s.is_empty() {
            return Err(GesiError::Parse("F0 track has no rows".into()));
        }
        Ok(track)
    }

    /// Parses a `time_s,f0_hz` CSV. A header row is optional.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut pairs = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(GesiError::Parse(format!("F0 row {} needs two columns", row + 1)));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(t), Ok(f)) => pairs.push((t, f)),
                _ if row == 0 => continue,
                _ => return Err(GesiError::Parse(format!("F0 row {}: not numeric", row + 1))),
            }
        }
        Self::from_pairs(pairs)
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| GesiError::io(path, e))?;
        Self::from_csv_reader(file)
    }

    pub fn len(&self) -> usize {
        self.times_s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_s.is_empty()
    }

    pub fn voiced_fraction(&self) -> f64 {
        self.voiced.iter().filter(|&&v| v).count() as f64 / self.len().max(1) as f64
    }

    /// F0 of the frame whose center is nearest to `time_s`.
    pub fn f0_at(&self, time_s: f64) -> f64 {
        let idx = self.times_s.partition_point(|&t| t < time_s);
        let pick = if idx == 0 {
            0
        } else if idx >= self.len() {
            self.len() - 1
        } else if time_s - self.times_s[idx - 1] <= self.times_s[idx] - time_s {
            idx - 1
        } else {
            idx
        };
        self.f0_hz[pick]
    }

    /// Median F0 over voiced frames.
    pub fn median_voiced_f0(&self) -> Option<f64> {
        let mut v: Vec<f64> = self
            .f0_hz
            .iter()
            .zip(&self.voiced)
            .filter_map(|(&f, &on)| on.then_some(f))
            .collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        Some(if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        })
    }
}

/// Tracks F0 with default settings.
pub fn estimate_f0(w: &Waveform) -> Result<F0Track> {
    estimate_f0_with(w, &F0Settings::default())
}

pub fn estimate_f0_with(w: &Waveform, settings: &F0Settings) -> Result<F0Track> {
    if !w.is_mono() {
        return Err(GesiError::invalid("F0 estimation expects a mono waveform"));
    }
    if w.duration_s() < settings.min_duration_s {
        return Err(GesiError::TooShort(format!(
            "F0 estimation needs at least {} ms, got {:.1} ms",
            settings.min_duration_s * 1e3,
            w.duration_s() * 1e3
        )));
    }
    if !(settings.f0_min_hz > 0.0 && settings.f0_max_hz > settings.f0_min_hz) {
        return Err(GesiError::invalid("F0 search range must satisfy 0 < min < max"));
    }
    let x = resample(w, settings.analysis_rate_hz)?.into_samples();
    let fs = settings.analysis_rate_hz as f64;
    let win = (settings.window_s * fs).round() as usize;
    let hop = (settings.hop_s * fs).round() as usize;
    let lag_min = (fs / settings.f0_max_hz).floor().max(2.0) as usize;
    let lag_max = (fs / settings.f0_min_hz).ceil() as usize;
    if lag_max + 1 >= win {
        return Err(GesiError::invalid("analysis window shorter than the longest lag"));
    }
    if x.len() < win {
        return Err(GesiError::TooShort("shorter than one analysis window".into()));
    }
    let n_frames = 1 + (x.len() - win) / hop;
    let mut corr = vec![0.0; lag_max + 2];
    let mut track = F0Track {
        times_s: Vec::with_capacity(n_frames),
        f0_hz: Vec::with_capacity(n_frames),
        voiced: Vec::with_capacity(n_frames),
    };
    for k in 0..n_frames {
        let frame = &x[k * hop..k * hop + win];
        track.times_s.push((k * hop) as f64 / fs + 0.5 * settings.window_s);
        let f0 = frame_f0(frame, lag_min, lag_max, fs, settings, &mut corr);
        track.voiced.push(f0.is_some());
        track.f0_hz.push(f0.unwrap_or(UNVOICED_F0_HZ));
    }
    Ok(track)
}

fn normalized_autocorr(frame: &[f64], lag: usize) -> f64 {
    let (a, b) = (&frame[..frame.len() - lag], &frame[lag..]);
    let mut num = 0.0;
    let mut ea = 0.0;
    let mut eb = 0.0;
    for (p, q) in a.iter().zip(b) {
        num += p * q;
        ea += p * p;
        eb += q * q;
    }
    let den = (ea * eb).sqrt();
    if den > 1e-20 {
        num / den
    } else {
        0.0
    }
}

fn frame_f0(
    frame: &[f64],
    lag_min: usize,
    lag_max: usize,
    fs: f64,
    settings: &F0Settings,
    corr: &mut [f64],
) -> Option<f64> {
    if frame.iter().all(|&v| v == 0.0) {
        return None;
    }
    for (lag, c) in corr.iter_mut().enumerate().take(lag_max + 2).skip(lag_min - 1) {
        *c = normalized_autocorr(frame, lag);
    }
    let is_peak = |l: usize| corr[l] >= corr[l - 1] && corr[l] >= corr[l + 1];
    let best = (lag_min..=lag_max)
        .filter(|&l| is_peak(l))
        .map(|l| corr[l])
        .fold(f64::NEG_INFINITY, f64::max);
    if best < settings.voicing_threshold {
        return None;
    }
    let lag = (lag_min..=lag_max).find(|&l| is_peak(l) && corr[l] >= settings.octave_tolerance * best)?;
    let (ym, y0, yp) = (corr[lag - 1], corr[lag], corr[lag + 1]);
    let curv = ym - 2.0 * y0 + yp;
    let shift = if curv.abs() > 1e-12 {
        (0.5 * (ym - yp) / curv).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Some(fs / (lag as f64 + shift))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    fn pulse_train(f0: f64, seconds: f64) -> Waveform {
        let fs = 48_000.0;
        let n = (seconds * fs) as usize;
        let period = fs / f0;
        let mut x = vec![0.0; n];
        let mut t = 0.0;
        while (t as usize) < n {
            x[t as usize] = 1.0;
            t += period;
        }
        Waveform::mono(x, 48_000).unwrap()
    }

    #[test]
    fn pulse_train_median() {
        let track = estimate_f0(&pulse_train(120.0, 1.0)).unwrap();
        let med = track.median_voiced_f0().unwrap();
        assert!((118.0..=122.0).contains(&med), "median {med}");
        assert!(track.voiced_fraction() > 0.9);
    }

    #[test]
    fn white_noise_is_unvoiced() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let x: Vec<f64> = (0..48_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let track = estimate_f0(&Waveform::mono(x, 48_000).unwrap()).unwrap();
        assert!(track.voiced_fraction() <= 0.1, "{}", track.voiced_fraction());
        assert!(track
            .f0_hz
            .iter()
            .zip(&track.voiced)
            .all(|(&f, &v)| v || f == UNVOICED_F0_HZ));
    }

    #[test]
    fn sine_220() {
        let x: Vec<f64> = (0..24_000)
            .map(|i| (2.0 * PI * 220.0 * i as f64 / 48_000.0).sin())
            .collect();
        let track = estimate_f0(&Waveform::mono(x, 48_000).unwrap()).unwrap();
        assert!(track.voiced_fraction() > 0.9);
        for (&f, &v) in track.f0_hz.iter().zip(&track.voiced) {
            if v {
                assert!((f - 220.0).abs() <= 2.0, "{f}");
            }
        }
    }

    #[test]
    fn hop_and_centers() {
        let track = estimate_f0(&pulse_train(100.0, 0.5)).unwrap();
        assert!((track.times_s[0] - 0.02).abs() < 1e-12);
        assert!((track.times_s[1] - track.times_s[0] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn too_short_rejected() {
        let w = Waveform::mono(vec![0.1; 48 * 70], 48_000).unwrap();
        assert!(matches!(estimate_f0(&w), Err(GesiError::TooShort(_))));
    }

    #[test]
    fn silence_is_unvoiced() {
        let w = Waveform::mono(vec![0.0; 9_600], 48_000).unwrap();
        let track = estimate_f0(&w).unwrap();
        assert!(track.voiced.iter().all(|v| !v));
    }

    #[test]
    fn csv_override_with_header_and_unvoiced_rows() {
        let csv = "time_s,f0_hz\n0.00,0\n0.01,120.5\n0.02,-1\n";
        let t = F0Track::from_csv_reader(csv.as_bytes()).unwrap();
        assert_eq!(t.voiced, vec![false, true, false]);
        assert_eq!(t.f0_hz[0], UNVOICED_F0_HZ);
        assert_eq!(t.f0_at(0.012), 120.5);
        assert_eq!(t.f0_at(5.0), UNVOICED_F0_HZ);
        assert!(F0Track::from_csv_reader("0.0,100\n0.0,100\n".as_bytes()).is_err());
        assert!(F0Track::from_csv_reader("0.0,100\nx,1\n".as_bytes()).is_err());
    }
}
