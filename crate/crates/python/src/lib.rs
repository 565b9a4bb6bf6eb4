//! Python bindings. Audio is passed as 1-D float sequences plus a sample rate.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gesi_core::GesiError;

fn to_py(e: GesiError) -> PyErr {
    match e {
        GesiError::Io { .. } => PyOSError::new_err(e.to_string()),
        e if e.is_usage() => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

#[pymodule]
mod gesi {
    use std::collections::HashMap;

    use pyo3::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use gesi_core::baseline;
    use gesi_core::eval::{self, EvalOptions, Predictor, Scheme};
    use gesi_core::frontend::{Audiogram, ListenerProfile};
    use gesi_core::mapping::{self, SigmoidParams};
    use gesi_core::metric::{self, MetricResult};
    use gesi_core::signal::{LevelCalibration, Waveform};
    use gesi_core::stimuli::{self, SpeechLikeSpec, TonePipSpec};
    use gesi_core::wav::load_wave;
    use gesi_core::{GesiConfig, GesiError};

    use super::to_py;

    #[pymodule_export]
    const SCHEMA_VERSION: u32 = gesi_core::SCHEMA_VERSION;

    fn wave(samples: Vec<f64>, sample_rate: u32) -> PyResult<Waveform> {
        Waveform::mono(samples, sample_rate).map_err(to_py)
    }

    fn model(
        profile: &str,
        alpha: f64,
        rho: Option<f64>,
        npip: Option<f64>,
        h_max: f64,
        spl: f64,
    ) -> Result<(ListenerProfile, GesiConfig, LevelCalibration), GesiError> {
        if rho.is_some() && npip.is_some() {
            return Err(GesiError::InvalidArgument("give rho or npip, not both".into()));
        }
        let audiogram = match Audiogram::preset(profile) {
            Ok(a) => a,
            Err(_) if std::path::Path::new(profile).exists() => Audiogram::load(profile)?,
            Err(e) => return Err(e),
        };
        let alpha = if audiogram.is_normal() { 1.0 } else { alpha };
        let config = GesiConfig {
            rho,
            h_max,
            ..GesiConfig::default()
        };
        config.validate()?;
        Ok((
            ListenerProfile::new(audiogram, alpha, npip)?,
            config,
            LevelCalibration::new(spl)?,
        ))
    }

    fn summary(r: &MetricResult) -> HashMap<&'static str, f64> {
        HashMap::from([
            ("d", r.d),
            ("rho", r.rho_used),
            ("n_channels", r.n_channels as f64),
            ("m_channels", r.m_channels as f64),
            ("frames", r.frames_compared as f64),
            ("degenerate_cells", r.degenerate_cells as f64),
        ])
    }

    /// GESI for two mono signals at `sample_rate`. Returns `d`, `rho` and sizes.
    #[pyfunction]
    #[pyo3(signature = (reference, test, sample_rate, profile="nh", alpha=0.5, rho=None, npip=None, h_max=3.0, spl=65.0))]
    #[allow(clippy::too_many_arguments)]
    fn predict(
        py: Python<'_>,
        reference: Vec<f64>,
        test: Vec<f64>,
        sample_rate: u32,
        profile: &str,
        alpha: f64,
        rho: Option<f64>,
        npip: Option<f64>,
        h_max: f64,
        spl: f64,
    ) -> PyResult<HashMap<&'static str, f64>> {
        let (prof, cfg, cal) = model(profile, alpha, rho, npip, h_max, spl).map_err(to_py)?;
        let (r, t) = (wave(reference, sample_rate)?, wave(test, sample_rate)?);
        let result = py
            .detach(|| gesi_core::gesi_predict(&r, &t, &prof, &cfg, &cal))
            .map_err(to_py)?;
        Ok(summary(&result))
    }

    /// GESI for two WAV files.
    #[pyfunction]
    #[pyo3(signature = (reference, test, profile="nh", alpha=0.5, rho=None, npip=None, h_max=3.0, spl=65.0))]
    #[allow(clippy::too_many_arguments)]
    fn predict_files(
        py: Python<'_>,
        reference: std::path::PathBuf,
        test: std::path::PathBuf,
        profile: &str,
        alpha: f64,
        rho: Option<f64>,
        npip: Option<f64>,
        h_max: f64,
        spl: f64,
    ) -> PyResult<HashMap<&'static str, f64>> {
        let (prof, cfg, cal) = model(profile, alpha, rho, npip, h_max, spl).map_err(to_py)?;
        let result = py
            .detach(|| {
                let r = load_wave(&reference)?;
                let t = load_wave(&test)?;
                gesi_core::gesi_predict(&r, &t, &prof, &cfg, &cal)
            })
            .map_err(to_py)?;
        Ok(summary(&result))
    }

    #[pyfunction]
    fn stoi(py: Python<'_>, reference: Vec<f64>, test: Vec<f64>, sample_rate: u32) -> PyResult<f64> {
        let (r, t) = (wave(reference, sample_rate)?, wave(test, sample_rate)?);
        py.detach(|| baseline::stoi(&r, &t)).map_err(to_py)
    }

    #[pyfunction]
    fn estoi(py: Python<'_>, reference: Vec<f64>, test: Vec<f64>, sample_rate: u32) -> PyResult<f64> {
        let (r, t) = (wave(reference, sample_rate)?, wave(test, sample_rate)?);
        py.detach(|| baseline::estoi(&r, &t)).map_err(to_py)
    }

    #[pyfunction]
    fn rho_from_npip(npip: f64) -> PyResult<f64> {
        metric::rho_from_npip(npip).map_err(to_py)
    }

    #[pyfunction]
    fn sensation_margin(npip: f64) -> PyResult<f64> {
        metric::sensation_margin(npip).map_err(to_py)
    }

    /// `(a, b)` for a named metric such as `"gesi"` or `"stoi"`.
    #[pyfunction]
    fn sigmoid_preset(name: &str) -> PyResult<(f64, f64)> {
        let p = SigmoidParams::preset(name).map_err(to_py)?;
        Ok((p.a, p.b))
    }

    #[pyfunction]
    fn sigmoid_si(d: f64, a: f64, b: f64) -> PyResult<f64> {
        let p = SigmoidParams::new(a, b).map_err(to_py)?;
        Ok(mapping::sigmoid_si(d, &p))
    }

    /// Least-squares `(a, b)` for paired metric values and percent correct.
    #[pyfunction]
    fn fit_sigmoid(d: Vec<f64>, si: Vec<f64>) -> PyResult<HashMap<&'static str, f64>> {
        if d.len() != si.len() {
            return Err(to_py(GesiError::LengthMismatch {
                left: d.len(),
                right: si.len(),
            }));
        }
        let pairs: Vec<(f64, f64)> = d.into_iter().zip(si).collect();
        let fit = mapping::fit_sigmoid(&pairs).map_err(to_py)?;
        Ok(HashMap::from([
            ("a", fit.params.a),
            ("b", fit.params.b),
            ("rss", fit.rss),
            ("converged", f64::from(u8::from(fit.converged))),
        ]))
    }

    #[pyfunction]
    fn fit_psychometric(snr_db: Vec<f64>, si: Vec<f64>) -> PyResult<HashMap<&'static str, f64>> {
        let fit = mapping::fit_psychometric(&snr_db, &si).map_err(to_py)?;
        Ok(HashMap::from([
            ("srt_db", fit.srt_db),
            ("slope_db", fit.slope_db),
            ("converged", f64::from(u8::from(fit.converged))),
        ]))
    }

    #[pyfunction]
    fn pearson_r_p(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, f64)> {
        eval::pearson_r_p(&x, &y).map_err(to_py)
    }

    /// `(t, p, degenerate)` of a paired two-sided t-test.
    #[pyfunction]
    fn paired_ttest(a: Vec<f64>, b: Vec<f64>) -> PyResult<(f64, f64, bool)> {
        let t = eval::paired_ttest(&a, &b).map_err(to_py)?;
        Ok((t.t, t.p, t.degenerate))
    }

    /// Runs a scheme over a manifest file and returns the report as JSON text.
    #[pyfunction]
    #[pyo3(signature = (manifest, scheme="eval1", predictor="gesi", alpha=0.5, rho=None, params=None))]
    fn evaluate(
        py: Python<'_>,
        manifest: std::path::PathBuf,
        scheme: &str,
        predictor: &str,
        alpha: f64,
        rho: Option<f64>,
        params: Option<&str>,
    ) -> PyResult<String> {
        let scheme: Scheme = scheme.parse().map_err(to_py)?;
        let predictor: Predictor = predictor.parse().map_err(to_py)?;
        let mut opts = EvalOptions::new(scheme, predictor);
        opts.alpha = alpha;
        opts.gesi.rho = rho;
        opts.params = params.map(SigmoidParams::load).transpose().map_err(to_py)?;
        py.detach(|| {
            let records = eval::load_manifest(&manifest)?;
            eval::run_eval(&records, &opts, &eval::AudioScorer::new(&opts))?.to_json()
        })
        .map_err(to_py)
    }

    /// Seeded noise with a long-term speech spectrum.
    #[pyfunction]
    #[pyo3(signature = (duration_s, seed, rms_dbfs=-26.0, sample_rate=48_000))]
    fn speech_shaped_noise(duration_s: f64, seed: u64, rms_dbfs: f64, sample_rate: u32) -> PyResult<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        stimuli::speech_shaped_noise(duration_s, rms_dbfs, sample_rate, &mut rng)
            .map(Waveform::into_samples)
            .map_err(to_py)
    }

    /// Seeded synthetic word (voiced segments with formants plus noise bursts) at 48 kHz.
    #[pyfunction]
    #[pyo3(signature = (seed, duration_s=1.0, f0_hz=120.0))]
    fn speech_like_word(seed: u64, duration_s: f64, f0_hz: f64) -> PyResult<Vec<f64>> {
        let spec = SpeechLikeSpec {
            duration_s,
            f0_hz,
            ..SpeechLikeSpec::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        stimuli::speech_like_word(&spec, &mut rng)
            .map(Waveform::into_samples)
            .map_err(to_py)
    }

    /// Tone-pip sequence at 48 kHz and its per-event levels in dBFS.
    #[pyfunction]
    #[pyo3(signature = (freq_hz=1000.0, start_dbfs=-10.0))]
    fn tone_pips(freq_hz: f64, start_dbfs: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let spec = TonePipSpec {
            freq_hz,
            ..TonePipSpec::default()
        };
        let seq = stimuli::gen_tone_pips(&spec, start_dbfs).map_err(to_py)?;
        let levels = seq.events.iter().map(|e| e.level_dbfs).collect();
        Ok((seq.waveform.into_samples(), levels))
    }
}
