//! Command-line experiments: cross-validated evaluation (optionally over a
//! grid of settings), the subsampling robustness curve, and model
//! training/prediction.
//!
//! Every report embeds the resolved configuration, including the master
//! seed, under a `schema_version`. CSV files carry the same configuration
//! as a leading `# {json}` comment line. No timestamps or absolute output
//! paths are written, so two runs with the same arguments produce
//! byte-identical files.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use imbhn_core::corpus::{default_stopwords, load_stopwords};
use imbhn_core::eval::{
    cross_validate, robustness_curve, stratified_folds, ClassifierConfig, EvalConfig, EvalReport,
    ImbhnConfig, InitChoice, RobustnessReport, REPORT_SCHEMA_VERSION,
};
use imbhn_core::features::FeatureConfig;
use imbhn_core::imbhn::{load_model, save_model, InitStrategy, TrainedModel};
use imbhn_core::network::build_network;
use imbhn_core::seed::{self, Stream};
use imbhn_core::{load_corpus, Corpus, CorpusFormat};

pub const STOPWORDS_ENV: &str = "IMBHN_STOPWORDS";

#[derive(Debug, Parser)]
#[command(
    name = "imbhn",
    version,
    about = "Word sense disambiguation over bipartite networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cross-validate one configuration or a grid of them.
    Evaluate(EvaluateArgs),
    /// Relative accuracy under random removal of training instances.
    Robustness(RobustnessArgs),
    /// Train on a whole corpus and save the model.
    Train(TrainArgs),
    /// Label every instance of a corpus with a saved model.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKindArg {
    Topical,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierArg {
    Imbhn,
    Nb,
    Knn,
    Majority,
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Corpus in JSON-lines format.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Stopword list, one word per line. Defaults to the bundled English list.
    #[arg(long, env = STOPWORDS_ENV)]
    pub stopwords: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FeatureArgs {
    #[arg(long, value_enum)]
    pub features: FeatureKindArg,
    /// Number of topical features |T| (comma-separated for a grid).
    #[arg(long, value_delimiter = ',')]
    pub topics: Vec<usize>,
    /// Local window size ω (comma-separated for a grid).
    #[arg(long, value_delimiter = ',')]
    pub omega: Vec<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "imbhn")]
    pub classifier: ClassifierArg,
    /// Correction rate η (comma-separated for a grid).
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub eta: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon_min: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// zeros, random, prior, or best3 (run all three, keep the best).
    #[arg(long, default_value = "zeros")]
    pub init: String,
    /// Neighbours for --classifier knn.
    #[arg(long, default_value_t = 3)]
    pub knn_k: usize,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Master seed; every other seed is derived from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RobustnessArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sampling rates: fractions of instances removed, each in [0, 1).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9"
    )]
    pub rates: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[arg(long, default_value_t = 0.1)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.01)]
    pub epsilon_min: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// zeros, random or prior.
    #[arg(long, default_value = "zeros")]
    pub init: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Also write W, Y and F as CSV files into this directory.
    #[arg(long)]
    pub dump_network: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Predictions CSV (`id,predicted`).
    #[arg(long)]
    pub out: PathBuf,
}

/// A configuration problem, naming the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field,
        message: message.into(),
    }
}

/// One fully resolved experiment (a single grid cell).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub corpus: PathBuf,
    pub stopwords: Option<PathBuf>,
    pub features: FeatureKindArg,
    pub num_topics: Option<usize>,
    pub omega: Option<usize>,
    pub classifier: ClassifierArg,
    pub eta: f64,
    pub epsilon_min: f64,
    pub max_iters: usize,
    pub init: InitChoice,
    pub knn_k: usize,
    pub folds: usize,
    pub seed: u64,
    #[serde(skip)]
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        match (self.features, self.num_topics, self.omega) {
            (FeatureKindArg::Topical, Some(t), None) if t >= 1 => {}
            (FeatureKindArg::Topical, Some(_), None) => {
                return Err(config_err("topics", "must be at least 1"))
            }
            (FeatureKindArg::Topical, _, Some(_)) => {
                return Err(config_err("omega", "only valid with --features local"))
            }
            (FeatureKindArg::Topical, None, None) => {
                return Err(config_err("topics", "required with --features topical"))
            }
            (FeatureKindArg::Local, None, Some(w)) if w >= 1 => {}
            (FeatureKindArg::Local, None, Some(_)) => {
                return Err(config_err("omega", "must be at least 1"))
            }
            (FeatureKindArg::Local, Some(_), _) => {
                return Err(config_err("topics", "only valid with --features topical"))
            }
            (FeatureKindArg::Local, None, None) => {
                return Err(config_err("omega", "required with --features local"))
            }
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(config_err(
                "eta",
                format!("must be positive, got {}", self.eta),
            ));
        }
        if !(self.epsilon_min.is_finite() && self.epsilon_min > 0.0) {
            return Err(config_err(
                "epsilon-min",
                format!("must be positive, got {}", self.epsilon_min),
            ));
        }
        if self.max_iters == 0 {
            return Err(config_err("max-iters", "must be at least 1"));
        }
        if self.folds < 2 {
            return Err(config_err(
                "folds",
                format!("need at least 2, got {}", self.folds),
            ));
        }
        if self.knn_k == 0 {
            return Err(config_err("knn-k", "must be at least 1"));
        }
        Ok(())
    }

    pub fn feature_config(&self) -> FeatureConfig {
        match self.features {
            FeatureKindArg::Topical => FeatureConfig::Topical {
                num_topics: self.num_topics.unwrap_or(0),
            },
            FeatureKindArg::Local => FeatureConfig::Local {
                omega: self.omega.unwrap_or(0),
            },
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        let classifier = match self.classifier {
            ClassifierArg::Imbhn => ClassifierConfig::Imbhn(ImbhnConfig {
                eta: self.eta,
                epsilon_min: self.epsilon_min,
                max_iters: self.max_iters,
                init: self.init,
                rng_seed: seed::derive(self.seed, Stream::Init, &[]),
            }),
            ClassifierArg::Nb => ClassifierConfig::NaiveBayes,
            ClassifierArg::Knn => ClassifierConfig::Knn { k: self.knn_k },
            ClassifierArg::Majority => ClassifierConfig::Majority,
        };
        EvalConfig {
            features: self.feature_config(),
            classifier,
        }
    }

    /// File stem for this grid cell, e.g. `imbhn_local-w3_eta0.1_best3`.
    pub fn cell_name(&self) -> String {
        let features = self.feature_config().label();
        match self.classifier {
            ClassifierArg::Imbhn => {
                let init = serde_json::to_value(self.init)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                format!("imbhn_{features}_eta{}_{init}", self.eta)
            }
            ClassifierArg::Nb => format!("nb_{features}"),
            ClassifierArg::Knn => format!("knn{}_{features}", self.knn_k),
            ClassifierArg::Majority => format!("majority_{features}"),
        }
    }
}

fn parse_init(s: &str) -> std::result::Result<InitChoice, ConfigError> {
    s.parse().map_err(|_| {
        config_err(
            "init",
            format!("expected zeros, random, prior or best3, got `{s}`"),
        )
    })
}

/// Expands the feature and η lists into one config per grid cell.
pub fn expand_grid(
    corpus: &CorpusArgs,
    features: &FeatureArgs,
    model: &ModelArgs,
    out: &Path,
) -> std::result::Result<Vec<ExperimentConfig>, ConfigError> {
    let init = parse_init(&model.init)?;
    let sizes: Vec<(Option<usize>, Option<usize>)> = match features.features {
        FeatureKindArg::Topical => {
            if !features.omega.is_empty() {
                return Err(config_err("omega", "only valid with --features local"));
            }
            if features.topics.is_empty() {
                return Err(config_err("topics", "required with --features topical"));
            }
            features.topics.iter().map(|&t| (Some(t), None)).collect()
        }
        FeatureKindArg::Local => {
            if !features.topics.is_empty() {
                return Err(config_err("topics", "only valid with --features topical"));
            }
            if features.omega.is_empty() {
                return Err(config_err("omega", "required with --features local"));
            }
            features.omega.iter().map(|&w| (None, Some(w))).collect()
        }
    };
    let etas: &[f64] = if model.classifier == ClassifierArg::Imbhn {
        &model.eta
    } else {
        &model.eta[..model.eta.len().min(1)]
    };
    if etas.is_empty() {
        return Err(config_err("eta", "at least one value required"));
    }
    let mut cells = Vec::new();
    for &(num_topics, omega) in &sizes {
        for &eta in etas {
            let cfg = ExperimentConfig {
                corpus: corpus.corpus.clone(),
                stopwords: corpus.stopwords.clone(),
                features: features.features,
                num_topics,
                omega,
                classifier: model.classifier,
                eta,
                epsilon_min: model.epsilon_min,
                max_iters: model.max_iters,
                init,
                knn_k: model.knn_k,
                folds: model.folds,
                seed: model.seed,
                out: out.to_path_buf(),
            };
            cfg.validate()?;
            cells.push(cfg);
        }
    }
    Ok(cells)
}

/// Loads and preprocesses a corpus with the requested (or default)
/// stopword list.
pub fn load_preprocessed(path: &Path, stopwords: Option<&Path>) -> Result<Corpus> {
    let words: HashSet<String> = match stopwords {
        Some(p) => {
            load_stopwords(p).with_context(|| format!("reading stopwords {}", p.display()))?
        }
        None => default_stopwords(),
    };
    let corpus = load_corpus(path, CorpusFormat::Jsonl)
        .with_context(|| format!("loading corpus {}", path.display()))?;
    Ok(corpus.with_stopwords(words).preprocessed())
}

#[derive(Serialize)]
struct Provenance<'a, C: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a C,
}

fn write_csv_with_header<C: Serialize>(
    path: &Path,
    provenance: &Provenance<'_, C>,
    body: impl FnOnce(&mut Vec<u8>) -> imbhn_core::Result<()>,
) -> Result<()> {
    let mut buf = Vec::new();
    writeln!(buf, "# {}", serde_json::to_string(provenance)?)?;
    body(&mut buf)?;
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct EvaluateOutput<'a> {
    schema_version: u32,
    command: &'a str,
    config: &'a ExperimentConfig,
    report: &'a EvalReport,
}

/// Runs each grid cell and writes `<cell>.json` plus `<cell>.folds.csv`.
/// Returns the reports in grid order.
pub fn cmd_evaluate(cells: &[ExperimentConfig]) -> Result<Vec<(ExperimentConfig, EvalReport)>> {
    let mut results = Vec::new();
    let mut loaded: Option<(PathBuf, Option<PathBuf>, Corpus)> = None;
    for cfg in cells {
        cfg.validate()?;
        let corpus = match &loaded {
            Some((p, s, c)) if *p == cfg.corpus && *s == cfg.stopwords => c.clone(),
            _ => {
                let c = load_preprocessed(&cfg.corpus, cfg.stopwords.as_deref())?;
                loaded = Some((cfg.corpus.clone(), cfg.stopwords.clone(), c.clone()));
                c
            }
        };
        if cfg.folds > corpus.len() {
            return Err(config_err(
                "folds",
                format!("{} folds for {} instances", cfg.folds, corpus.len()),
            )
            .into());
        }
        let plan = stratified_folds(
            &corpus,
            cfg.folds,
            seed::derive(cfg.seed, Stream::Folds, &[]),
        )?;
        let report = cross_validate(&corpus, &cfg.eval_config(), &plan)?;

        fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
        let name = cfg.cell_name();
        write_json(
            &cfg.out.join(format!("{name}.json")),
            &EvaluateOutput {
                schema_version: REPORT_SCHEMA_VERSION,
                command: "evaluate",
                config: cfg,
                report: &report,
            },
        )?;
        let prov = Provenance {
            schema_version: REPORT_SCHEMA_VERSION,
            command: "evaluate",
            config: cfg,
        };
        write_csv_with_header(&cfg.out.join(format!("{name}.folds.csv")), &prov, |buf| {
            report.write_fold_csv(buf)
        })?;
        results.push((cfg.clone(), report));
    }
    Ok(results)
}

#[derive(Serialize)]
struct RateSummary {
    rate: f64,
    removed: usize,
    trials: usize,
    mean_relative: f64,
    std_relative: f64,
}

#[derive(Serialize)]
struct RobustnessOutput<'a> {
    schema_version: u32,
    command: &'a str,
    config: &'a ExperimentConfig,
    trials: usize,
    n_instances: usize,
    full_accuracy: f64,
    rates: Vec<RateSummary>,
}

/// Writes `<cell>.robustness.csv` (one row per rate and trial) and
/// `<cell>.robustness.json` (per-rate mean and standard deviation).
pub fn cmd_robustness(
    cells: &[ExperimentConfig],
    rates: &[f64],
    trials: usize,
) -> Result<Vec<(ExperimentConfig, RobustnessReport)>> {
    let mut results = Vec::new();
    for cfg in cells {
        cfg.validate()?;
        let corpus = load_preprocessed(&cfg.corpus, cfg.stopwords.as_deref())?;
        let report = robustness_curve(
            &corpus,
            &cfg.eval_config(),
            cfg.folds,
            rates,
            trials,
            cfg.seed,
        )?;

        fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
        let name = cfg.cell_name();
        let prov = Provenance {
            schema_version: REPORT_SCHEMA_VERSION,
            command: "robustness",
            config: cfg,
        };
        write_csv_with_header(
            &cfg.out.join(format!("{name}.robustness.csv")),
            &prov,
            |buf| report.write_trial_csv(buf),
        )?;
        write_json(
            &cfg.out.join(format!("{name}.robustness.json")),
            &RobustnessOutput {
                schema_version: REPORT_SCHEMA_VERSION,
                command: "robustness",
                config: cfg,
                trials,
                n_instances: report.n_instances,
                full_accuracy: report.full_accuracy,
                rates: report
                    .rates
                    .iter()
                    .map(|r| RateSummary {
                        rate: r.rate,
                        removed: r.removed,
                        trials: r.trials.len(),
                        mean_relative: r.mean_relative,
                        std_relative: r.std_relative,
                    })
                    .collect(),
            },
        )?;
        results.push((cfg.clone(), report));
    }
    Ok(results)
}

pub fn cmd_train(args: &TrainArgs) -> Result<TrainedModel> {
    let init: InitStrategy = args.init.parse().map_err(|_| {
        config_err(
            "init",
            format!("expected zeros, random or prior, got `{}`", args.init),
        )
    })?;
    if args.features.topics.len() > 1 {
        return Err(config_err("topics", "train takes a single value").into());
    }
    if args.features.omega.len() > 1 {
        return Err(config_err("omega", "train takes a single value").into());
    }
    let num_topics = args.features.topics.first().copied();
    let omega = args.features.omega.first().copied();
    let cfg = ExperimentConfig {
        corpus: args.corpus.corpus.clone(),
        stopwords: args.corpus.stopwords.clone(),
        features: args.features.features,
        num_topics,
        omega,
        classifier: ClassifierArg::Imbhn,
        eta: args.eta,
        epsilon_min: args.epsilon_min,
        max_iters: args.max_iters,
        init: init.into(),
        knn_k: 1,
        folds: 2,
        seed: args.seed,
        out: PathBuf::new(),
    };
    cfg.validate()?;

    let corpus = load_preprocessed(&cfg.corpus, cfg.stopwords.as_deref())?;
    let ClassifierConfig::Imbhn(ic) = cfg.eval_config().classifier else {
        unreachable!()
    };
    let tc = ic.train_config(init);
    let space = cfg.feature_config().fit(&corpus)?;
    let net = build_network(&corpus, &space)?;
    let model = imbhn_core::imbhn::train_network(corpus.target_lemma(), &net, space, &tc)?;
    if let Some(dir) = &args.dump_network {
        net.write_csv_dump(dir, Some(&model.relevance))?;
    }
    if let Some(parent) = args.model.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    save_model(&model, &args.model)?;
    Ok(model)
}

/// Predicted sense per instance, in corpus order.
pub fn predict_corpus(model: &TrainedModel, corpus: &Corpus) -> Result<Vec<(String, String)>> {
    if corpus.target_lemma() != model.target_lemma {
        bail!(
            "model mismatch: model was trained for `{}`, corpus targets `{}`",
            model.target_lemma,
            corpus.target_lemma()
        );
    }
    if let Some(s) = corpus
        .sense_inventory()
        .iter()
        .find(|s| !model.classes.contains(s))
    {
        bail!("model mismatch: corpus sense `{s}` is not among the model's classes");
    }
    Ok(corpus
        .instances()
        .iter()
        .map(|i| (i.id.clone(), model.classify(i).to_string()))
        .collect())
}

pub fn cmd_predict(args: &PredictArgs) -> Result<Vec<(String, String)>> {
    let model = load_model(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let corpus = load_preprocessed(&args.corpus.corpus, args.corpus.stopwords.as_deref())?;
    let predictions = predict_corpus(&model, &corpus)?;
    let mut w = csv::Writer::from_path(&args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    w.write_record(["id", "predicted"])?;
    for (id, sense) in &predictions {
        w.write_record([id, sense])?;
    }
    w.flush()?;
    Ok(predictions)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evaluate(a) => {
            let cells = expand_grid(&a.corpus, &a.features, &a.model, &a.out)?;
            for (cfg, r) in cmd_evaluate(&cells)? {
                println!("{}\taccuracy {:.4}", cfg.cell_name(), r.mean_accuracy);
            }
        }
        Command::Robustness(a) => {
            let cells = expand_grid(&a.corpus, &a.features, &a.model, &a.out)?;
            for (cfg, r) in cmd_robustness(&cells, &a.rates, a.trials)? {
                for rate in &r.rates {
                    println!(
                        "{}\tS={}\tmean {:.4}\tstd {:.4}",
                        cfg.cell_name(),
                        rate.rate,
                        rate.mean_relative,
                        rate.std_relative
                    );
                }
            }
        }
        Command::Train(a) => {
            let m = cmd_train(&a)?;
            println!(
                "trained {} features x {} classes; {} iterations, converged: {}",
                m.space.len(),
                m.classes.len(),
                m.iterations_run,
                m.converged
            );
        }
        Command::Predict(a) => {
            let p = cmd_predict(&a)?;
            println!("wrote {} predictions to {}", p.len(), a.out.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(
        features: FeatureKindArg,
        topics: Vec<usize>,
        omega: Vec<usize>,
    ) -> (CorpusArgs, FeatureArgs, ModelArgs) {
        (
            CorpusArgs {
                corpus: "c.jsonl".into(),
                stopwords: None,
            },
            FeatureArgs {
                features,
                topics,
                omega,
            },
            ModelArgs {
                classifier: ClassifierArg::Imbhn,
                eta: vec![0.01, 0.5],
                epsilon_min: 0.01,
                max_iters: 1000,
                init: "best3".into(),
                knn_k: 3,
                folds: 10,
                seed: 4,
            },
        )
    }

    #[test]
    fn grid_is_features_by_eta() {
        let (c, f, m) = args(FeatureKindArg::Local, vec![], vec![1, 2, 3]);
        let cells = expand_grid(&c, &f, &m, Path::new("out")).unwrap();
        let names: Vec<String> = cells.iter().map(ExperimentConfig::cell_name).collect();
        assert_eq!(
            names,
            [
                "imbhn_local-w1_eta0.01_best3",
                "imbhn_local-w1_eta0.5_best3",
                "imbhn_local-w2_eta0.01_best3",
                "imbhn_local-w2_eta0.5_best3",
                "imbhn_local-w3_eta0.01_best3",
                "imbhn_local-w3_eta0.5_best3",
            ]
        );
    }

    #[test]
    fn baselines_ignore_the_eta_grid() {
        let (c, f, mut m) = args(FeatureKindArg::Topical, vec![100, 200], vec![]);
        m.classifier = ClassifierArg::Nb;
        let cells = expand_grid(&c, &f, &m, Path::new("out")).unwrap();
        let names: Vec<String> = cells.iter().map(ExperimentConfig::cell_name).collect();
        assert_eq!(names, ["nb_topical-t100", "nb_topical-t200"]);
        assert_eq!(
            cells[0].eval_config().classifier,
            ClassifierConfig::NaiveBayes
        );
    }

    #[test]
    fn seeds_derive_from_the_master() {
        let (c, f, m) = args(FeatureKindArg::Local, vec![], vec![3]);
        let cell = &expand_grid(&c, &f, &m, Path::new("out")).unwrap()[0];
        let ClassifierConfig::Imbhn(ic) = cell.eval_config().classifier else {
            panic!("expected imbhn");
        };
        assert_eq!(ic.rng_seed, seed::derive(4, Stream::Init, &[]));
        assert_eq!(ic.init, InitChoice::Best3);
    }

    #[test]
    fn validation_names_the_field() {
        let (c, f, m) = args(FeatureKindArg::Topical, vec![], vec![]);
        assert_eq!(
            expand_grid(&c, &f, &m, Path::new("o")).unwrap_err().field,
            "topics"
        );
        let (c, f, m) = args(FeatureKindArg::Local, vec![0], vec![3]);
        assert_eq!(
            expand_grid(&c, &f, &m, Path::new("o")).unwrap_err().field,
            "topics"
        );
        let (c, f, m) = args(FeatureKindArg::Local, vec![], vec![0]);
        assert_eq!(
            expand_grid(&c, &f, &m, Path::new("o")).unwrap_err().field,
            "omega"
        );
        let (c, f, mut m) = args(FeatureKindArg::Local, vec![], vec![3]);
        m.max_iters = 0;
        assert_eq!(
            expand_grid(&c, &f, &m, Path::new("o")).unwrap_err().field,
            "max-iters"
        );
        let (c, f, mut m) = args(FeatureKindArg::Local, vec![], vec![3]);
        m.knn_k = 0;
        assert_eq!(
            expand_grid(&c, &f, &m, Path::new("o")).unwrap_err().field,
            "knn-k"
        );
        let (c, f, mut m) = args(FeatureKindArg::Local, vec![], vec![3]);
        m.eta = vec![0.1, f64::NAN];
        assert_eq!(
            expand_grid(&c, &f, &m, Path::new("o")).unwrap_err().field,
            "eta"
        );
    }

    #[test]
    fn serialized_config_omits_output_dir() {
        let (c, f, m) = args(FeatureKindArg::Local, vec![], vec![3]);
        let cell = &expand_grid(&c, &f, &m, Path::new("/tmp/somewhere")).unwrap()[0];
        let json = serde_json::to_string(cell).unwrap();
        assert!(!json.contains("somewhere"));
        assert!(json.contains("\"seed\":4"));
    }
}
