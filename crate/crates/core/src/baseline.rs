//! Short-time objective intelligibility (STOI) and its extended variant (ESTOI).

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{GesiError, Result};
use crate::metric::DURATION_TOLERANCE;
use crate::resample::resample;
use crate::signal::Waveform;

pub const STOI_RATE: u32 = 10_000;
const FRAME_LEN: usize = 256;
const HOP: usize = FRAME_LEN / 2;
const NFFT: usize = 512;
const N_BANDS: usize = 15;
const MIN_CENTER_HZ: f64 = 150.0;
/// Frames per correlation segment (384 ms).
pub const SEGMENT_FRAMES: usize = 30;
const CLIP_BETA_DB: f64 = -15.0;
const DYN_RANGE_DB: f64 = 40.0;
const EPS: f64 = f64::EPSILON;

/// Third-octave grouping of one-sided FFT bins, `[lo, hi)` per band.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdOctaveBank {
    pub bands: Vec<(usize, usize)>,
    pub centers_hz: Vec<f64>,
}

impl ThirdOctaveBank {
    pub fn new(sample_rate: f64, nfft: usize, n_bands: usize, min_center_hz: f64) -> Self {
        let bin_hz = sample_rate / nfft as f64;
        let nearest = |f: f64| ((f / bin_hz).round() as usize).min(nfft / 2);
        let mut bands = Vec::with_capacity(n_bands);
        let mut centers_hz = Vec::with_capacity(n_bands);
        for k in 0..n_bands {
            let k = k as f64;
            centers_hz.push(min_center_hz * 2f64.powf(k / 3.0));
            let lo = nearest(min_center_hz * 2f64.powf((2.0 * k - 1.0) / 6.0));
            let hi = nearest(min_center_hz * 2f64.powf((2.0 * k + 1.0) / 6.0));
            bands.push((lo, hi));
        }
        Self { bands, centers_hz }
    }

    pub fn standard() -> Self {
        Self::new(STOI_RATE as f64, NFFT, N_BANDS, MIN_CENTER_HZ)
    }
}

fn hann() -> Vec<f64> {
    // Symmetric window of length N+2 with the zero end points dropped.
    let m = FRAME_LEN + 1;
    (1..=FRAME_LEN)
        .map(|n| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * n as f64 / m as f64).cos())
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Drops frames more than 40 dB below the loudest reference frame and
/// overlap-adds the remaining windowed frames.
fn remove_silent_frames(x: &[f64], y: &[f64], window: &[f64]) -> (Vec<f64>, Vec<f64>) {
    if x.len() < FRAME_LEN {
        return (Vec::new(), Vec::new());
    }
    let starts: Vec<usize> = (0..=x.len() - FRAME_LEN).step_by(HOP).collect();
    let frame =
        |s: &[f64], i: usize| -> Vec<f64> { s[i..i + FRAME_LEN].iter().zip(window).map(|(a, w)| a * w).collect() };
    let energies: Vec<f64> = starts
        .iter()
        .map(|&i| 20.0 * (norm(&frame(x, i)) + EPS).log10())
        .collect();
    let max_e = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let kept: Vec<usize> = starts
        .iter()
        .zip(&energies)
        .filter(|(_, &e)| max_e - DYN_RANGE_DB - e < 0.0)
        .map(|(&i, _)| i)
        .collect();
    if kept.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let out_len = (kept.len() - 1) * HOP + FRAME_LEN;
    let (mut xs, mut ys) = (vec![0.0; out_len], vec![0.0; out_len]);
    for (k, &i) in kept.iter().enumerate() {
        let (fx, fy) = (frame(x, i), frame(y, i));
        for n in 0..FRAME_LEN {
            xs[k * HOP + n] += fx[n];
            ys[k * HOP + n] += fy[n];
        }
    }
    (xs, ys)
}

/// Band envelopes `[band][frame]`.
fn third_octave_envelopes(x: &[f64], window: &[f64], bank: &ThirdOctaveBank) -> Vec<Vec<f64>> {
    let fft = FftPlanner::new().plan_fft_forward(NFFT);
    let n_frames = if x.len() > FRAME_LEN {
        (x.len() - FRAME_LEN).div_ceil(HOP)
    } else {
        0
    };
    let mut env = vec![Vec::with_capacity(n_frames); bank.bands.len()];
    let mut buf = vec![Complex::new(0.0, 0.0); NFFT];
    for f in 0..n_frames {
        let s = f * HOP;
        for (n, b) in buf.iter_mut().enumerate() {
            *b = if n < FRAME_LEN {
                Complex::new(x[s + n] * window[n], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        for (band, &(lo, hi)) in bank.bands.iter().enumerate() {
            let power: f64 = buf[lo..hi].iter().map(|c| c.norm_sqr()).sum();
            env[band].push(power.sqrt());
        }
    }
    env
}

/// Per-band envelope rows.
type Bands = Vec<Vec<f64>>;

fn prepare(reference: &Waveform, test: &Waveform) -> Result<(Bands, Bands)> {
    if !reference.is_mono() || !test.is_mono() {
        return Err(GesiError::invalid("STOI expects mono waveforms"));
    }
    if reference.is_empty() || test.is_empty() {
        return Err(GesiError::EmptyAudio);
    }
    let (dr, dt) = (reference.duration_s(), test.duration_s());
    if (dt - dr).abs() > DURATION_TOLERANCE * dr {
        return Err(GesiError::DurationMismatch {
            reference_s: dr,
            test_s: dt,
        });
    }
    let x = resample(reference, STOI_RATE)?.into_samples();
    let y = resample(test, STOI_RATE)?.into_samples();
    let n = x.len().min(y.len());
    let window = hann();
    let (xs, ys) = remove_silent_frames(&x[..n], &y[..n], &window);
    let bank = ThirdOctaveBank::standard();
    let xe = third_octave_envelopes(&xs, &window, &bank);
    let ye = third_octave_envelopes(&ys, &window, &bank);
    let frames = xe.first().map_or(0, Vec::len);
    if frames < SEGMENT_FRAMES {
        return Err(GesiError::TooShort(format!(
            "{frames} active frames after silence removal; need {SEGMENT_FRAMES}"
        )));
    }
    Ok((xe, ye))
}

fn centered_unit(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|a| *a -= mean);
    let n = norm(v) + EPS;
    v.iter_mut().for_each(|a| *a /= n);
}

/// Classic STOI in `[-1, 1]`.
pub fn stoi(reference: &Waveform, test: &Waveform) -> Result<f64> {
    let (xe, ye) = prepare(reference, test)?;
    let frames = xe[0].len();
    let clip = 10f64.powf(-CLIP_BETA_DB / 20.0);
    let mut total = 0.0;
    let mut count = 0usize;
    for m in SEGMENT_FRAMES..=frames {
        for (xb, yb) in xe.iter().zip(&ye) {
            let mut xs = xb[m - SEGMENT_FRAMES..m].to_vec();
            let ys = &yb[m - SEGMENT_FRAMES..m];
            let alpha = norm(&xs) / (norm(ys) + EPS);
            let mut yp: Vec<f64> = ys
                .iter()
                .zip(&xs)
                .map(|(&y, &x)| (y * alpha).min(x * (1.0 + clip)))
                .collect();
            centered_unit(&mut xs);
            centered_unit(&mut yp);
            total += xs.iter().zip(&yp).map(|(a, b)| a * b).sum::<f64>();
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Extended STOI: spectral correlation after row and column normalization.
pub fn estoi(reference: &Waveform, test: &Waveform) -> Result<f64> {
    let (xe, ye) = prepare(reference, test)?;
    let frames = xe[0].len();
    let n_bands = xe.len();
    let mut total = 0.0;
    let mut segments = 0usize;
    for m in SEGMENT_FRAMES..=frames {
        let seg = |e: &[Vec<f64>]| -> Vec<Vec<f64>> {
            let mut rows: Vec<Vec<f64>> = e.iter().map(|b| b[m - SEGMENT_FRAMES..m].to_vec()).collect();
            rows.iter_mut().for_each(|r| centered_unit(r));
            // Column normalization across bands.
            for t in 0..SEGMENT_FRAMES {
                let mut col: Vec<f64> = rows.iter().map(|r| r[t]).collect();
                centered_unit(&mut col);
                for (r, v) in rows.iter_mut().zip(col) {
                    r[t] = v;
                }
            }
            rows
        };
        let (xn, yn) = (seg(&xe), seg(&ye));
        let mut acc = 0.0;
        for b in 0..n_bands {
            acc += xn[b].iter().zip(&yn[b]).map(|(a, c)| a * c).sum::<f64>();
        }
        total += acc / SEGMENT_FRAMES as f64;
        segments += 1;
    }
    Ok(total / segments as f64)
}
