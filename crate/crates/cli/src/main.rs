use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vocalsel::audio::read_wav;
use vocalsel::classifiers::{self, ClassifierKind, TrainConfig};
use vocalsel::dataset::{build_dataset, CorpusManifest, LabeledDataset};
use vocalsel::evaluation::{cross_validate, CvConfig, CvScheme};
use vocalsel::features::{ExtractionConfig, FeatureLabel};
use vocalsel::filters::FilterMethod;
use vocalsel::selection::{
    classifier_independent, common_features, fully_independent, language_independent, per_emotion_analysis,
    rank_filter, rank_individual, special_features, top_m, FeatureSet, RankingTable, SelectionConfig,
    SelectionReport, Strategy, DEFAULT_M, DEFAULT_P,
};
use vocalsel::spectro::{export_image, spectrogram, DEFAULT_SIDE};
use vocalsel::synth::{synth_corpus, CorpusSpec};

#[derive(Parser)]
#[command(name = "vocalsel", version, about = "Emotion feature extraction, ranking and selection")]
struct Cli {
    /// Extraction config (key = value lines).
    #[arg(long, global = true, env = "VOCALSEL_CONFIG")]
    config: Option<PathBuf>,
    /// Worker threads. Defaults to all cores for extract and synth and to 1
    /// elsewhere.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the 84 features from every file in a manifest.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic labelled corpus and its manifest.
    Synth {
        #[arg(long)]
        out: PathBuf,
        /// JSON corpus spec; the built-in five-class spec when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rank features by single-feature accuracy or by a filter score.
    Rank {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, conflicts_with = "method", required_unless_present = "method")]
        classifier: Option<String>,
        /// GR, IG, SU or RF.
        #[arg(long)]
        method: Option<String>,
        #[arg(long, default_value = "kfold:10")]
        cv: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON file overriding classifier hyperparameters.
        #[arg(long)]
        train_config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Combine rankings into a feature subset.
    Select {
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_M)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_P)]
        p: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate a classifier on a feature subset.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        /// `all`, a comma list such as `x21,x24`, or a selection report JSON.
        #[arg(long, default_value = "all")]
        subset: String,
        #[arg(long, default_value = "knn")]
        classifier: String,
        #[arg(long, default_value = "kfold:10")]
        cv: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        train_config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the confusion matrix as CSV.
        #[arg(long)]
        confusion: Option<PathBuf>,
    },
    /// One-vs-rest AdaBoost feature weights and leave-one-out accuracy per class.
    Emotions {
        #[arg(long)]
        dataset: PathBuf,
        /// Classes to analyse; every class when omitted.
        #[arg(long, num_args = 1..)]
        emotion: Vec<String>,
        #[arg(long, default_value_t = 50)]
        rounds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a WAV file's spectrogram as a square PGM image.
    Spectrogram {
        #[arg(long)]
        wav: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 25.0)]
        frame_ms: f64,
        #[arg(long, default_value_t = 10.0)]
        hop_ms: f64,
        #[arg(long, default_value_t = DEFAULT_SIDE)]
        side: usize,
    },
    /// Fit a classifier on the whole dataset and save it as JSON.
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "all")]
        subset: String,
        #[arg(long, default_value = "knn")]
        classifier: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        train_config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    LangIndep,
    ClfIndep,
    Full,
    Special,
    Common,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::LangIndep => Strategy::LangIndep,
            StrategyArg::ClfIndep => Strategy::ClfIndep,
            StrategyArg::Full => Strategy::Full,
            StrategyArg::Special => Strategy::Special,
            StrategyArg::Common => Strategy::Common,
        }
    }
}

/// An operation failure, reported on stderr as JSON.
#[derive(Debug)]
struct CliError {
    code: String,
    message: String,
    details: Option<Value>,
}

impl CliError {
    fn new(code: &str, message: impl fmt::Display) -> Self {
        CliError {
            code: code.to_string(),
            message: message.to_string(),
            details: None,
        }
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::new(e.code(), &e)
            }
        }
    )*};
}

from_core!(
    vocalsel::audio::AudioError,
    vocalsel::features::FeatureError,
    vocalsel::dataset::DatasetError,
    vocalsel::classifiers::ClassifierError,
    vocalsel::evaluation::EvalError,
    vocalsel::selection::SelectionError,
    vocalsel::spectro::SpectroError,
    vocalsel::synth::SynthError
);

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("io", e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new("json", e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n"))?,
        None => {
            let mut s = std::io::stdout().lock();
            writeln!(s, "{text}")?;
        }
    }
    Ok(())
}

fn train_config(path: Option<&Path>, seed: u64) -> Result<TrainConfig> {
    let mut cfg = match path {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => TrainConfig::default(),
    };
    cfg.seed = seed;
    cfg.validate()?;
    Ok(cfg)
}

fn cv_config(spec: &str, seed: u64) -> Result<CvConfig> {
    let scheme: CvScheme = spec.parse()?;
    Ok(CvConfig {
        scheme,
        seed,
        stratified: matches!(scheme, CvScheme::Kfold(_)),
    })
}

fn classifier(name: &str) -> Result<ClassifierKind> {
    Ok(name.parse()?)
}

fn parse_subset(spec: &str, data: &LabeledDataset) -> Result<Vec<FeatureLabel>> {
    let t = spec.trim();
    if t.eq_ignore_ascii_case("all") {
        return Ok(data.columns().to_vec());
    }
    if t.ends_with(".json") {
        let r = SelectionReport::from_json(&std::fs::read_to_string(t)?)?;
        return Ok(r.result_labels);
    }
    let labels = t
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<FeatureLabel>())
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(labels)
}

/// Repeated labels after the first occurrence are dropped with a warning.
fn load_ranking(p: &Path) -> Result<RankingTable> {
    let (t, dropped) = RankingTable::load_lenient(p)?;
    if !dropped.is_empty() {
        let v: Vec<String> = dropped.iter().map(|l| l.to_string()).collect();
        log::warn!("{}: dropped repeated {}", p.display(), v.join(", "));
    }
    Ok(t)
}

fn load_rankings(inputs: &[PathBuf]) -> Result<BTreeMap<String, RankingTable>> {
    let mut map = BTreeMap::new();
    for p in inputs {
        let t = load_ranking(p)?;
        if map.insert(t.source.clone(), t).is_some() {
            return Err(CliError::new("duplicate_input", format!("{} given twice", p.display())));
        }
    }
    Ok(map)
}

fn select(strategy: StrategyArg, inputs: &[PathBuf], m: usize, p: usize) -> Result<SelectionReport> {
    let names: Vec<String> = inputs.iter().map(|p| p.display().to_string()).collect();
    let (set, p_used): (FeatureSet, Option<usize>) = match strategy {
        StrategyArg::Special => {
            let rankings: Vec<RankingTable> = load_rankings(inputs)?.into_values().collect();
            (special_features(&rankings, p, m)?, Some(p))
        }
        StrategyArg::Common => {
            let tops = load_rankings(inputs)?
                .values()
                .map(|r| top_m(r, m))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            (common_features(&tops)?, None)
        }
        StrategyArg::LangIndep => (language_independent(&load_rankings(inputs)?, m)?, None),
        StrategyArg::ClfIndep => (classifier_independent(&load_rankings(inputs)?, m)?, None),
        StrategyArg::Full => (full_independent(inputs, m)?, None),
    };
    Ok(SelectionReport::new(strategy.into(), names, m, p_used, &set))
}

/// Either language-independent reports (JSON), intersected directly, or
/// ranking CSVs named `<classifier>_<dataset>.csv`, grouped by classifier.
fn full_independent(inputs: &[PathBuf], m: usize) -> Result<FeatureSet> {
    let mut per_clf: BTreeMap<String, FeatureSet> = BTreeMap::new();
    if inputs.iter().all(|p| p.extension().is_some_and(|e| e == "json")) {
        for p in inputs {
            let r = SelectionReport::from_json(&std::fs::read_to_string(p)?)?;
            per_clf.insert(
                p.display().to_string(),
                FeatureSet::new(r.result_labels, r.provenance),
            );
        }
        return Ok(fully_independent(&per_clf)?);
    }
    let mut groups: BTreeMap<String, BTreeMap<String, RankingTable>> = BTreeMap::new();
    for p in inputs {
        let t = load_ranking(p)?;
        let (clf, ds) = t.source.split_once('_').ok_or_else(|| {
            CliError::new(
                "bad_input_name",
                format!("{} is not named <classifier>_<dataset>.csv", p.display()),
            )
        })?;
        groups.entry(clf.to_string()).or_default().insert(ds.to_string(), t.clone());
    }
    for (clf, per_ds) in &groups {
        per_clf.insert(clf.clone(), language_independent(per_ds, m)?);
    }
    Ok(fully_independent(&per_clf)?)
}

fn extraction_config(path: Option<&Path>) -> Result<ExtractionConfig> {
    match path {
        Some(p) => Ok(ExtractionConfig::load(p)?),
        None => Ok(ExtractionConfig::default()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Extract { manifest, out } => {
            let cfg = extraction_config(cli.config.as_deref())?;
            let m = CorpusManifest::load(&manifest)?;
            let (data, failures) = build_dataset(&m, &cfg)?;
            data.save(&out)?;
            if !failures.is_empty() {
                return Err(CliError {
                    code: "extraction_failures".into(),
                    message: format!(
                        "{} of {} files failed; {} rows written",
                        failures.len(),
                        m.entries.len(),
                        data.n_samples()
                    ),
                    details: Some(serde_json::to_value(&failures)?),
                });
            }
        }
        Command::Synth {
            out,
            spec,
            per_class,
            seed,
        } => {
            let spec = match spec {
                Some(p) => CorpusSpec::load(p)?,
                None => CorpusSpec::default(),
            };
            let m = synth_corpus(&spec, per_class, seed, &out)?;
            log::info!("wrote {} files to {}", m.entries.len(), out.display());
        }
        Command::Rank {
            dataset,
            classifier: clf,
            method,
            cv,
            seed,
            train_config: tc,
            format,
            out,
        } => {
            let data = LabeledDataset::load(&dataset)?;
            let table = match (clf, method) {
                (Some(c), _) => {
                    let kind = classifier(&c)?;
                    let cfg = train_config(tc.as_deref(), seed)?;
                    rank_individual(&data, kind, &cfg, &cv_config(&cv, seed)?)?
                }
                (None, Some(m)) => {
                    let method = FilterMethod::parse(&m)
                        .ok_or_else(|| CliError::new("unknown_method", format!("{m:?}; expected GR, IG, SU or RF")))?;
                    rank_filter(&data, method)?
                }
                (None, None) => unreachable!("clap requires one of the two"),
            };
            match format {
                Format::Json => emit(out.as_deref(), &serde_json::to_string_pretty(&table)?)?,
                Format::Csv => match out {
                    Some(p) => table.save(p)?,
                    None => table.write_csv(std::io::stdout().lock())?,
                },
            }
        }
        Command::Select {
            strategy,
            inputs,
            m,
            p,
            out,
        } => {
            if matches!(strategy, StrategyArg::Special) {
                SelectionConfig::new(m, p)?;
            }
            let report = select(strategy, &inputs, m, p)?;
            emit(out.as_deref(), &report.to_json())?;
        }
        Command::Evaluate {
            dataset,
            subset,
            classifier: clf,
            cv,
            seed,
            train_config: tc,
            out,
            confusion,
        } => {
            let data = LabeledDataset::load(&dataset)?;
            let subset = parse_subset(&subset, &data)?;
            let cfg = train_config(tc.as_deref(), seed)?;
            let report = cross_validate(&data, &subset, classifier(&clf)?, &cfg, &cv_config(&cv, seed)?)?;
            if let Some(p) = confusion {
                report.write_confusion_csv(std::fs::File::create(p)?)?;
            }
            emit(out.as_deref(), &report.to_json())?;
        }
        Command::Emotions {
            dataset,
            emotion,
            rounds,
            out,
        } => {
            let data = LabeledDataset::load(&dataset)?;
            let targets = if emotion.is_empty() {
                data.classes().to_vec()
            } else {
                emotion
            };
            let reports = targets
                .iter()
                .map(|e| per_emotion_analysis(&data, e, rounds))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            emit(out.as_deref(), &serde_json::to_string_pretty(&reports)?)?;
        }
        Command::Spectrogram {
            wav,
            out,
            frame_ms,
            hop_ms,
            side,
        } => {
            let s = read_wav(&wav)?;
            export_image(&spectrogram(&s, frame_ms, hop_ms)?, side, &out)?;
        }
        Command::Train {
            dataset,
            subset,
            classifier: clf,
            seed,
            train_config: tc,
            out,
        } => {
            let data = LabeledDataset::load(&dataset)?;
            let subset = parse_subset(&subset, &data)?;
            let view = data
                .select(&subset)
                .ok_or_else(|| CliError::new("missing_feature", "subset names a column the dataset lacks"))?;
            let cfg = train_config(tc.as_deref(), seed)?;
            classifiers::train(&view, classifier(&clf)?, &cfg)?.save(&out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let default_jobs = match cli.command {
        Command::Extract { .. } | Command::Synth { .. } => 0,
        _ => 1,
    };
    let threads = cli.jobs.unwrap_or(default_jobs);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}", json!({"error": "thread_pool", "message": e.to_string()}));
            return ExitCode::from(1);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut v = json!({"error": e.code, "message": e.message});
            if let Some(d) = e.details {
                v["details"] = d;
            }
            eprintln!("{v}");
            ExitCode::from(1)
        }
    }
}
