use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gesi_core::eval::{
    compare_reports, load_manifest, run_eval, AudioScorer, EvalOptions, EvaluationReport, Predictor, Scheme,
};
use gesi_core::frontend::{Audiogram, ListenerProfile};
use gesi_core::mapping::{sigmoid_si, SigmoidParams};
use gesi_core::signal::LevelCalibration;
use gesi_core::ssi::F0Track;
use gesi_core::wav::load_wave;
use gesi_core::{gesi_predict, GesiConfig, GesiError, SCHEMA_VERSION};

mod stimuli;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "gesi",
    version,
    about = "Gammachirp envelope similarity index and speech-intelligibility tools"
)]
struct Cli {
    /// Worker threads for batch work (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score one reference/test pair.
    Predict(PredictArgs),
    /// Run an evaluation scheme over a trial manifest.
    Evaluate(EvaluateArgs),
    /// Generate experimental stimuli.
    #[command(subcommand)]
    Stimuli(stimuli::StimuliCommand),
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// `nh`, `70yr`, `80yr`, or an audiogram JSON/CSV file.
    #[arg(long, default_value = "nh")]
    profile: String,

    /// Compression health of the hearing-loss profile, 0 to 1.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,

    /// Weighting exponent ρ.
    #[arg(long, conflicts_with = "npip")]
    rho: Option<f64>,

    /// Mean tone-pip count; sets ρ.
    #[arg(long)]
    npip: Option<f64>,

    #[arg(long, default_value_t = gesi_core::ssi::DEFAULT_H_MAX)]
    h_max: f64,

    /// SPL assigned to the reference RMS.
    #[arg(long, default_value_t = 65.0)]
    spl: f64,
}

impl ModelArgs {
    fn config(&self) -> GesiConfig {
        GesiConfig {
            rho: self.rho,
            h_max: self.h_max,
            ..GesiConfig::default()
        }
    }

    fn profile(&self) -> Result<ListenerProfile, GesiError> {
        let audiogram = match Audiogram::preset(&self.profile) {
            Ok(a) => a,
            Err(_) if Path::new(&self.profile).exists() => Audiogram::load(&self.profile)?,
            Err(e) => return Err(e),
        };
        let alpha = if audiogram.is_normal() { 1.0 } else { self.alpha };
        ListenerProfile::new(audiogram, alpha, self.npip)
    }
}

#[derive(Args, Debug)]
struct PredictArgs {
    reference: PathBuf,
    test: PathBuf,

    #[command(flatten)]
    model: ModelArgs,

    /// Sigmoid parameters: a preset name (`gesi`, `stoi`, ...) or a JSON file.
    #[arg(long)]
    sigmoid: Option<String>,

    /// Reference F0 track (CSV: time_s, f0_hz) instead of the built-in tracker.
    #[arg(long)]
    f0_csv: Option<PathBuf>,

    /// Write the similarity matrix as CSV.
    #[arg(long)]
    s_csv: Option<PathBuf>,

    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    manifest: PathBuf,

    #[arg(long, default_value = "eval1")]
    scheme: Scheme,

    #[arg(long, default_value = "gesi")]
    predictor: Predictor,

    /// Evaluate two predictors and run a paired t-test on their RMSEs.
    #[arg(long, num_args = 2, value_names = ["A", "B"], conflicts_with = "predictor")]
    compare: Option<Vec<Predictor>>,

    /// Frozen sigmoid parameters (preset name or JSON file); fitted when absent.
    #[arg(long)]
    params: Option<String>,

    /// Compression health for the 70yr/80yr profiles.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,

    /// Fixed ρ for every listener.
    #[arg(long)]
    rho: Option<f64>,

    #[arg(long, default_value_t = 65.0)]
    spl: f64,

    /// Output prefix; writes `<prefix>.json` and `<prefix>.csv`.
    #[arg(long, default_value = "gesi_report")]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Data(GesiError),
}

impl From<GesiError> for Failure {
    fn from(e: GesiError) -> Self {
        if e.is_usage() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Data(e)
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn error_json(kind: &str, message: &str) -> String {
    json!({"schema_version": SCHEMA_VERSION, "error": {"kind": kind, "message": message}}).to_string()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    let result = match cli.command {
        Command::Predict(args) => predict(&args),
        Command::Evaluate(args) => evaluate(&args),
        Command::Stimuli(cmd) => stimuli::run(&cmd).map_err(Failure::from),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("{}", error_json("usage", &m));
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(e)) => {
            eprintln!("{}", error_json("data", &e.to_string()));
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn predict(args: &PredictArgs) -> CmdResult {
    let mut config = args.model.config();
    config.validate()?;
    let profile = args.model.profile()?;
    let cal = LevelCalibration::new(args.model.spl)?;
    let params = args.sigmoid.as_deref().map(SigmoidParams::load).transpose()?;
    if let Some(path) = &args.f0_csv {
        config.f0_override = Some(F0Track::load_csv(path)?);
    }
    let reference = load_wave(&args.reference)?;
    let test = load_wave(&args.test)?;
    let result = gesi_predict(&reference, &test, &profile, &config, &cal)?;
    if let Some(path) = &args.s_csv {
        result.save_s_csv(path)?;
    }
    let si = params.map(|p| sigmoid_si(result.d, &p));
    if args.json {
        let mut v = serde_json::to_value(result.summary()).map_err(GesiError::from)?;
        v["degenerate_cells"] = json!(result.degenerate_cells);
        if let (Some(si), Some(p)) = (si, params) {
            v["si_pct"] = json!(si);
            v["sigmoid"] = json!(p);
        }
        println!("{v}");
    } else {
        println!("d = {:.6}", result.d);
        println!("rho = {:.4}", result.rho_used);
        if let Some(si) = si {
            println!("SI = {si:.2} %");
        }
        if result.degenerate_cells > 0 {
            log::warn!("{} similarity cells had a zero norm", result.degenerate_cells);
        }
    }
    Ok(0)
}

fn output_paths(prefix: &Path, suffix: Option<&str>) -> (PathBuf, PathBuf) {
    let mut stem = prefix.as_os_str().to_owned();
    if let Some(s) = suffix {
        stem.push(format!("_{s}"));
    }
    let mut json = stem.clone();
    json.push(".json");
    stem.push(".csv");
    (json.into(), stem.into())
}

fn evaluate(args: &EvaluateArgs) -> CmdResult {
    let records = load_manifest(&args.manifest)?;
    let predictors = args.compare.clone().unwrap_or_else(|| vec![args.predictor]);
    let mut reports: Vec<EvaluationReport> = Vec::new();
    let mut partial = false;
    for &predictor in &predictors {
        let mut opts = EvalOptions::new(args.scheme, predictor);
        opts.gesi.rho = args.rho;
        opts.alpha = args.alpha;
        opts.calibration = LevelCalibration::new(args.spl)?;
        opts.params = args.params.as_deref().map(SigmoidParams::load).transpose()?;
        opts.gesi.validate()?;
        let report = run_eval(&records, &opts, &AudioScorer::new(&opts))?;
        let suffix = (predictors.len() > 1).then(|| predictor.as_str());
        let (json_path, csv_path) = output_paths(&args.out, suffix);
        report.save(&json_path, &csv_path)?;
        for w in &report.warnings {
            log::warn!("{w}");
        }
        for e in &report.row_errors {
            log::warn!("row {} ({}): {}", e.row, e.listener_id, e.message);
        }
        partial |= !report.row_errors.is_empty();
        print!("{}", report.summary_table());
        println!("wrote {} and {}", json_path.display(), csv_path.display());
        reports.push(report);
    }
    if let [a, b] = reports.as_slice() {
        match compare_reports(a, b) {
            Ok(cmp) => print!("{cmp}"),
            Err(e) => log::warn!("comparison unavailable: {e}"),
        }
    }
    Ok(if partial { EXIT_PARTIAL } else { 0 })
}
