//! Stratified k-fold cross-validation and the training-set subsampling
//! experiment.
//!
//! Feature spaces and classifiers are refit on the training folds of every
//! split; held-out instances are vectorized against the training space.
//! Folds and subsampling trials are independent and run in parallel, with
//! results collected in (rate, trial, fold) order so reports do not depend
//! on scheduling.
//!
//! Seeds: with a master seed `m`, fold plans use `derive(m, Folds, [])`,
//! IMBHN random initialization on fold `f` uses `derive(cfg.rng_seed, Init,
//! [f])`, and the subsample for rate index `r`, trial `t` is drawn from
//! `derive(m, Subsample, [r, t])`.

use std::collections::HashSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    predict_knn, predict_nb, reference_scores, train_nb, KnnModel, NaiveBayesModel, ReferenceScore,
};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{fingerprint_all, vectorize, FeatureConfig, WeightedEdgeList};
use crate::imbhn::{train_network, InitStrategy, TrainConfig, TrainedModel};
use crate::network::build_network;
use crate::seed::{self, Stream};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Redraws allowed when a subsample empties a class.
pub const MAX_SUBSAMPLE_ATTEMPTS: usize = 100;

/// Assignment of every corpus instance to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldPlan {
    pub k: usize,
    pub rng_seed: u64,
    ids: Vec<String>,
    folds: Vec<usize>,
}

impl FoldPlan {
    /// Fold index per instance, in corpus order.
    pub fn folds(&self) -> &[usize] {
        &self.folds
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|i| i == id).map(|p| self.folds[p])
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.folds {
            sizes[f] += 1;
        }
        sizes
    }

    /// Corpus positions in fold `f`, ascending.
    pub fn members(&self, f: usize) -> Vec<usize> {
        (0..self.folds.len())
            .filter(|&p| self.folds[p] == f)
            .collect()
    }
}

/// Shuffles each class with a seeded generator, concatenates the classes in
/// inventory order and deals the sequence round-robin onto the folds. Fold
/// sizes and per-class counts per fold each differ by at most one.
pub fn stratified_folds(corpus: &Corpus, k: usize, rng_seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::param(
            "folds",
            format!("need at least 2 folds, got {k}"),
        ));
    }
    if k > corpus.len() {
        return Err(Error::param(
            "folds",
            format!("{k} folds for {} instances", corpus.len()),
        ));
    }
    let labels = corpus.labels();
    let mut rng = seed::rng(rng_seed);
    let mut folds = vec![0; corpus.len()];
    let mut next = 0;
    for class in 0..corpus.sense_inventory().len() {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&p| labels[p] == class).collect();
        members.shuffle(&mut rng);
        for p in members {
            folds[p] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan {
        k,
        rng_seed,
        ids: corpus.instances().iter().map(|i| i.id.clone()).collect(),
        folds,
    })
}

/// Initialization used by an IMBHN run; `best3` tries all three and keeps
/// the most accurate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitChoice {
    Zeros,
    Random,
    Prior,
    Best3,
}

impl From<InitStrategy> for InitChoice {
    fn from(s: InitStrategy) -> Self {
        match s {
            InitStrategy::Zeros => InitChoice::Zeros,
            InitStrategy::Random => InitChoice::Random,
            InitStrategy::Prior => InitChoice::Prior,
        }
    }
}

impl std::str::FromStr for InitChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "best3" {
            Ok(InitChoice::Best3)
        } else {
            s.parse::<InitStrategy>().map(InitChoice::from)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImbhnConfig {
    pub eta: f64,
    pub epsilon_min: f64,
    pub max_iters: usize,
    pub init: InitChoice,
    pub rng_seed: u64,
}

impl ImbhnConfig {
    pub fn train_config(&self, init: InitStrategy) -> TrainConfig {
        TrainConfig {
            eta: self.eta,
            epsilon_min: self.epsilon_min,
            max_iters: self.max_iters,
            init,
            rng_seed: self.rng_seed,
        }
    }

    fn with_init(&self, init: InitStrategy) -> ImbhnConfig {
        ImbhnConfig {
            init: init.into(),
            ..*self
        }
    }
}

impl Default for ImbhnConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        ImbhnConfig {
            eta: t.eta,
            epsilon_min: t.epsilon_min,
            max_iters: t.max_iters,
            init: t.init.into(),
            rng_seed: t.rng_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "classifier", rename_all = "lowercase")]
pub enum ClassifierConfig {
    Imbhn(ImbhnConfig),
    #[serde(rename = "nb")]
    NaiveBayes,
    Knn {
        k: usize,
    },
    Majority,
}

impl ClassifierConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierConfig::Imbhn(_) => "imbhn",
            ClassifierConfig::NaiveBayes => "nb",
            ClassifierConfig::Knn { .. } => "knn",
            ClassifierConfig::Majority => "majority",
        }
    }
}

/// Feature space plus classifier: everything needed to run one split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub features: FeatureConfig,
    #[serde(flatten)]
    pub classifier: ClassifierConfig,
}

enum Fitted {
    Imbhn(Box<TrainedModel>),
    NaiveBayes(NaiveBayesModel),
    Knn(KnnModel),
    Majority(usize),
}

impl Fitted {
    fn predict(&self, v: &WeightedEdgeList) -> usize {
        match self {
            Fitted::Imbhn(m) => m.predict_edges(v),
            Fitted::NaiveBayes(m) => predict_nb(m, v),
            Fitted::Knn(m) => predict_knn(m, v),
            Fitted::Majority(c) => *c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Set for IMBHN runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    /// Hashes of the edge lists the classifier was fitted on and
    /// evaluated on; equal across classifiers for the same fold.
    pub train_fingerprint: u64,
    pub test_fingerprint: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitCandidate {
    pub init: InitStrategy,
    pub mean_accuracy: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitSearch {
    pub winner: InitStrategy,
    pub candidates: Vec<InitCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub config: EvalConfig,
    pub folds_k: usize,
    pub fold_seed: u64,
    pub n_instances: usize,
    pub classes: Vec<String>,
    pub folds: Vec<FoldResult>,
    /// Σ correct / Σ tested.
    pub mean_accuracy: f64,
    /// Supplementary; not used for selection.
    pub macro_f1: f64,
    /// `confusion[gold][predicted]`, summed over folds.
    pub confusion: Vec<Vec<usize>>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_search: Option<InitSearch>,
    /// Published accuracies of external systems on this target and
    /// feature setting; display only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference: Vec<ReferenceScore>,
}

impl EvalReport {
    pub fn fold_accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }

    /// One row per fold: `fold,n_train,n_test,correct,accuracy`.
    pub fn write_fold_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["fold", "n_train", "n_test", "correct", "accuracy"])?;
        for f in &self.folds {
            w.write_record([
                f.fold.to_string(),
                f.n_train.to_string(),
                f.n_test.to_string(),
                f.correct.to_string(),
                f.accuracy.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))
    }
}

fn fit(
    train: &Corpus,
    cfg: &EvalConfig,
    fold: usize,
) -> Result<(Fitted, crate::FeatureSpace, u64)> {
    let space = cfg.features.fit(train)?;
    let net = build_network(train, &space)?;
    let fitted = match cfg.classifier {
        ClassifierConfig::Imbhn(ic) => {
            let init = match ic.init {
                InitChoice::Zeros => InitStrategy::Zeros,
                InitChoice::Random => InitStrategy::Random,
                InitChoice::Prior => InitStrategy::Prior,
                InitChoice::Best3 => unreachable!("best3 is resolved before fitting"),
            };
            let mut tc = ic.train_config(init);
            tc.rng_seed = seed::derive(ic.rng_seed, Stream::Init, &[fold as u64]);
            let model = train_network(train.target_lemma(), &net, space.clone(), &tc)?;
            Fitted::Imbhn(Box::new(model))
        }
        ClassifierConfig::NaiveBayes => Fitted::NaiveBayes(train_nb(&net)?),
        ClassifierConfig::Knn { k } => Fitted::Knn(KnnModel::fit(&net, k)?),
        ClassifierConfig::Majority => Fitted::Majority(net.majority_class()),
    };
    Ok((fitted, space, fingerprint_all(net.rows())))
}

struct FoldOutcome {
    result: FoldResult,
    confusion: Vec<Vec<usize>>,
    warnings: Vec<String>,
}

fn run_fold(
    corpus: &Corpus,
    cfg: &EvalConfig,
    plan: &FoldPlan,
    fold: usize,
) -> Result<FoldOutcome> {
    let n_classes = corpus.sense_inventory().len();
    let labels = corpus.labels();
    let (test_pos, train_pos): (Vec<usize>, Vec<usize>) =
        (0..corpus.len()).partition(|&p| plan.folds[p] == fold);
    let train = corpus.subset(&train_pos);

    let mut warnings = Vec::new();
    let present: HashSet<usize> = train_pos.iter().map(|&p| labels[p]).collect();
    for (c, sense) in corpus.sense_inventory().iter().enumerate() {
        if !present.contains(&c) {
            warnings.push(format!(
                "fold {fold}: training folds have no instances of sense `{sense}`"
            ));
        }
    }

    let (fitted, space, train_fingerprint) = fit(&train, cfg, fold)?;
    let test_vectors: Vec<WeightedEdgeList> = test_pos
        .iter()
        .map(|&p| vectorize(&corpus.instances()[p], &space))
        .collect();
    let mut confusion = vec![vec![0; n_classes]; n_classes];
    let mut correct = 0;
    for (&p, v) in test_pos.iter().zip(&test_vectors) {
        let pred = fitted.predict(v);
        confusion[labels[p]][pred] += 1;
        if pred == labels[p] {
            correct += 1;
        }
    }
    let (iterations, converged) = match &fitted {
        Fitted::Imbhn(m) => (Some(m.iterations_run), Some(m.converged)),
        _ => (None, None),
    };
    Ok(FoldOutcome {
        result: FoldResult {
            fold,
            n_train: train_pos.len(),
            n_test: test_pos.len(),
            correct,
            accuracy: correct as f64 / test_pos.len() as f64,
            iterations,
            converged,
            train_fingerprint,
            test_fingerprint: fingerprint_all(&test_vectors),
        },
        confusion,
        warnings,
    })
}

#[allow(clippy::needless_range_loop)]
fn macro_f1(confusion: &[Vec<usize>]) -> f64 {
    let n = confusion.len();
    let mut sum = 0.0;
    let mut classes = 0;
    for c in 0..n {
        let support: usize = confusion[c].iter().sum();
        if support == 0 {
            continue;
        }
        classes += 1;
        let tp = confusion[c][c];
        let predicted: usize = (0..n).map(|g| confusion[g][c]).sum();
        if tp > 0 {
            let p = tp as f64 / predicted as f64;
            let r = tp as f64 / support as f64;
            sum += 2.0 * p * r / (p + r);
        }
    }
    if classes == 0 {
        0.0
    } else {
        sum / classes as f64
    }
}

/// Runs every fold of `plan`: fit features and classifier on the other
/// folds, predict the held-out one, and aggregate. `corpus` must already be
/// preprocessed.
pub fn cross_validate(corpus: &Corpus, cfg: &EvalConfig, plan: &FoldPlan) -> Result<EvalReport> {
    if let ClassifierConfig::Imbhn(ic) = cfg.classifier {
        if ic.init == InitChoice::Best3 {
            return cross_validate_best3(corpus, cfg, &ic, plan);
        }
        ic.train_config(InitStrategy::Zeros).validate()?;
    }
    if let ClassifierConfig::Knn { k: 0 } = cfg.classifier {
        return Err(Error::param("k", "must be at least 1"));
    }
    if plan.ids.len() != corpus.len()
        || plan
            .ids
            .iter()
            .zip(corpus.instances())
            .any(|(a, b)| *a != b.id)
    {
        return Err(Error::Validation(
            "fold plan does not match the corpus".into(),
        ));
    }

    let outcomes: Vec<FoldOutcome> = (0..plan.k)
        .into_par_iter()
        .map(|f| run_fold(corpus, cfg, plan, f))
        .collect::<Result<_>>()?;

    let n_classes = corpus.sense_inventory().len();
    let mut confusion = vec![vec![0; n_classes]; n_classes];
    let mut warnings = Vec::new();
    let mut folds = Vec::with_capacity(plan.k);
    for o in outcomes {
        for (row, add) in confusion.iter_mut().zip(&o.confusion) {
            for (a, b) in row.iter_mut().zip(add) {
                *a += b;
            }
        }
        warnings.extend(o.warnings);
        folds.push(o.result);
    }
    let correct: usize = folds.iter().map(|f| f.correct).sum();
    let tested: usize = folds.iter().map(|f| f.n_test).sum();

    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: *cfg,
        folds_k: plan.k,
        fold_seed: plan.rng_seed,
        n_instances: corpus.len(),
        classes: corpus.sense_inventory().to_vec(),
        mean_accuracy: correct as f64 / tested as f64,
        macro_f1: macro_f1(&confusion),
        confusion,
        folds,
        warnings,
        init_search: None,
        reference: reference_scores(corpus.target_lemma(), &cfg.features),
    })
}

/// Cross-validates each initialization and keeps the most accurate; ties go
/// to the earlier of zeros, random, prior. Initializations that fail (prior
/// with a class missing from a training fold) are recorded and skipped.
fn cross_validate_best3(
    corpus: &Corpus,
    cfg: &EvalConfig,
    ic: &ImbhnConfig,
    plan: &FoldPlan,
) -> Result<EvalReport> {
    let mut best: Option<EvalReport> = None;
    let mut winner = InitStrategy::Zeros;
    let mut candidates = Vec::new();
    let mut last_err = None;
    for init in InitStrategy::ALL {
        let sub = EvalConfig {
            features: cfg.features,
            classifier: ClassifierConfig::Imbhn(ic.with_init(init)),
        };
        match cross_validate(corpus, &sub, plan) {
            Ok(report) => {
                candidates.push(InitCandidate {
                    init,
                    mean_accuracy: Some(report.mean_accuracy),
                    error: None,
                });
                if best
                    .as_ref()
                    .is_none_or(|b| report.mean_accuracy > b.mean_accuracy)
                {
                    winner = init;
                    best = Some(report);
                }
            }
            Err(e @ (Error::EmptyClass(_) | Error::NonFinite { .. })) => {
                candidates.push(InitCandidate {
                    init,
                    mean_accuracy: None,
                    error: Some(e.to_string()),
                });
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    let mut report = match best {
        Some(r) => r,
        None => return Err(last_err.expect("at least one candidate ran")),
    };
    for c in &candidates {
        if let Some(e) = &c.error {
            report
                .warnings
                .push(format!("init {} skipped: {e}", c.init));
        }
    }
    report.config = *cfg;
    report.init_search = Some(InitSearch { winner, candidates });
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub n_kept: usize,
    pub folds_k: usize,
    /// Γ(S): mean CV accuracy on the subsample.
    pub accuracy: f64,
    /// Γ(S) / Γ(0).
    pub relative_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub rate: f64,
    pub removed: usize,
    pub trials: Vec<TrialResult>,
    pub mean_relative: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub std_relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub schema_version: u32,
    pub config: EvalConfig,
    pub master_seed: u64,
    pub folds_k: usize,
    pub n_instances: usize,
    /// Γ(0): mean CV accuracy on the full corpus.
    pub full_accuracy: f64,
    pub rates: Vec<RateResult>,
}

impl RobustnessReport {
    /// One row per (rate, trial).
    pub fn write_trial_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "rate",
            "trial",
            "removed",
            "n_kept",
            "folds",
            "accuracy",
            "relative_accuracy",
        ])?;
        for r in &self.rates {
            for t in &r.trials {
                w.write_record([
                    r.rate.to_string(),
                    t.trial.to_string(),
                    r.removed.to_string(),
                    t.n_kept.to_string(),
                    t.folds_k.to_string(),
                    t.accuracy.to_string(),
                    t.relative_accuracy.to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::Serialization(e.to_string()))
    }
}

/// Instances kept after removing `remove` of them uniformly at random,
/// redrawing while the draw empties a class that the corpus has.
fn draw_subsample(corpus: &Corpus, remove: usize, rate: f64, rng_seed: u64) -> Result<Vec<usize>> {
    let labels = corpus.labels();
    let needed: HashSet<usize> = labels.iter().copied().collect();
    let keep = corpus.len() - remove;
    if keep < needed.len() {
        return Err(Error::Subsample { rate, attempts: 0 });
    }
    let mut rng = seed::rng(rng_seed);
    let mut positions: Vec<usize> = (0..corpus.len()).collect();
    for _ in 0..MAX_SUBSAMPLE_ATTEMPTS {
        positions.shuffle(&mut rng);
        let mut kept = positions[..keep].to_vec();
        let present: HashSet<usize> = kept.iter().map(|&p| labels[p]).collect();
        if present.len() == needed.len() {
            kept.sort_unstable();
            return Ok(kept);
        }
    }
    Err(Error::Subsample {
        rate,
        attempts: MAX_SUBSAMPLE_ATTEMPTS,
    })
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Relative accuracy `Γ(S)/Γ(0)` for each sampling rate `S` (the fraction
/// of instances removed) over `trials` random subsamples.
///
/// Each subsample is cross-validated with `min(k, |kept|)` folds. A rate
/// that removes nothing reuses Γ(0), so its relative accuracy is exactly 1.
pub fn robustness_curve(
    corpus: &Corpus,
    cfg: &EvalConfig,
    k: usize,
    rates: &[f64],
    trials: usize,
    master_seed: u64,
) -> Result<RobustnessReport> {
    if let Some(&bad) = rates.iter().find(|r| !(0.0..1.0).contains(*r)) {
        return Err(Error::param("rates", format!("{bad} is outside [0, 1)")));
    }
    if trials == 0 {
        return Err(Error::param("trials", "must be at least 1"));
    }
    let fold_seed = seed::derive(master_seed, Stream::Folds, &[]);
    let full_plan = stratified_folds(corpus, k, fold_seed)?;
    let full = cross_validate(corpus, cfg, &full_plan)?;
    let gamma0 = full.mean_accuracy;
    if gamma0 <= 0.0 {
        return Err(Error::Validation(
            "full-corpus accuracy is 0; relative accuracy is undefined".into(),
        ));
    }

    let n = corpus.len();
    let jobs: Vec<(usize, usize)> = (0..rates.len())
        .flat_map(|r| (0..trials).map(move |t| (r, t)))
        .collect();
    let results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(ri, trial)| {
            let rate = rates[ri];
            let remove = (rate * n as f64).floor() as usize;
            if remove == 0 {
                return Ok(TrialResult {
                    trial,
                    n_kept: n,
                    folds_k: k,
                    accuracy: gamma0,
                    relative_accuracy: 1.0,
                });
            }
            let draw_seed =
                seed::derive(master_seed, Stream::Subsample, &[ri as u64, trial as u64]);
            let kept = draw_subsample(corpus, remove, rate, draw_seed)?;
            let sub = corpus.subset(&kept);
            let sub_k = k.min(sub.len());
            if sub_k < 2 {
                return Err(Error::param(
                    "rates",
                    format!(
                        "rate {rate} leaves {} instance(s), too few to cross-validate",
                        sub.len()
                    ),
                ));
            }
            let plan = stratified_folds(&sub, sub_k, fold_seed)?;
            let accuracy = cross_validate(&sub, cfg, &plan)?.mean_accuracy;
            Ok(TrialResult {
                trial,
                n_kept: sub.len(),
                folds_k: sub_k,
                accuracy,
                relative_accuracy: accuracy / gamma0,
            })
        })
        .collect::<Result<_>>()?;

    let mut it = results.into_iter();
    let rates = rates
        .iter()
        .map(|&rate| {
            let trials: Vec<TrialResult> = it.by_ref().take(trials).collect();
            let rel: Vec<f64> = trials.iter().map(|t| t.relative_accuracy).collect();
            let (mean_relative, std_relative) = mean_std(&rel);
            RateResult {
                rate,
                removed: (rate * n as f64).floor() as usize,
                trials,
                mean_relative,
                std_relative,
            }
        })
        .collect();

    Ok(RobustnessReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: *cfg,
        master_seed,
        folds_k: k,
        n_instances: n,
        full_accuracy: gamma0,
        rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Instance;

    fn synthetic(per_class: &[usize]) -> Corpus {
        let mut instances = Vec::new();
        for (c, &n) in per_class.iter().enumerate() {
            for i in 0..n {
                let toks = [
                    format!("w{c}a"),
                    "tau".into(),
                    format!("w{c}b"),
                    format!("n{}", i % 3),
                ];
                instances.push(
                    Instance::new(format!("c{c}-{i}"), "tau", &toks, 1, format!("s{c}")).unwrap(),
                );
            }
        }
        let inv = (0..per_class.len()).map(|c| format!("s{c}")).collect();
        Corpus::new("tau", instances, inv).unwrap()
    }

    #[test]
    fn perfect_stratification() {
        let c = synthetic(&[5, 5]);
        let plan = stratified_folds(&c, 5, 1).unwrap();
        let labels = c.labels();
        for f in 0..5 {
            let m = plan.members(f);
            assert_eq!(m.len(), 2);
            assert_eq!(m.iter().filter(|&&p| labels[p] == 0).count(), 1);
        }
        assert_eq!(plan, stratified_folds(&c, 5, 1).unwrap());
        assert_ne!(plan.folds(), stratified_folds(&c, 5, 2).unwrap().folds());
    }

    #[test]
    fn remainder_distribution() {
        let c = synthetic(&[6, 5]);
        let mut sizes = stratified_folds(&c, 10, 3).unwrap().fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, [1, 1, 1, 1, 1, 1, 1, 1, 1, 2]);
    }

    #[test]
    fn fold_errors() {
        let c = synthetic(&[2, 2]);
        assert!(stratified_folds(&c, 5, 0).is_err());
        assert!(stratified_folds(&c, 1, 0).is_err());
    }

    fn imbhn(init: InitChoice) -> ClassifierConfig {
        ClassifierConfig::Imbhn(ImbhnConfig {
            init,
            ..ImbhnConfig::default()
        })
    }

    #[test]
    fn separable_corpus_is_perfect() {
        let c = synthetic(&[12, 9]);
        let plan = stratified_folds(&c, 3, 9).unwrap();
        for init in [
            InitChoice::Zeros,
            InitChoice::Random,
            InitChoice::Prior,
            InitChoice::Best3,
        ] {
            let cfg = EvalConfig {
                features: FeatureConfig::Local { omega: 1 },
                classifier: imbhn(init),
            };
            let r = cross_validate(&c, &cfg, &plan).unwrap();
            assert_eq!(r.mean_accuracy, 1.0, "{init:?}");
            assert_eq!(r.confusion, [[12, 0], [0, 9]]);
            assert_eq!(r.macro_f1, 1.0);
        }
    }

    #[test]
    fn best3_records_candidates() {
        let c = synthetic(&[12, 9]);
        let plan = stratified_folds(&c, 3, 9).unwrap();
        let cfg = EvalConfig {
            features: FeatureConfig::Topical { num_topics: 4 },
            classifier: imbhn(InitChoice::Best3),
        };
        let r = cross_validate(&c, &cfg, &plan).unwrap();
        let search = r.init_search.unwrap();
        assert_eq!(search.candidates.len(), 3);
        assert_eq!(search.winner, InitStrategy::Zeros);
    }

    #[test]
    fn missing_class_warns_and_prior_fails() {
        // The single s2 instance is held out in exactly one fold.
        let c = synthetic(&[4, 4, 1]);
        let plan = stratified_folds(&c, 3, 0).unwrap();
        let mut cfg = EvalConfig {
            features: FeatureConfig::Local { omega: 1 },
            classifier: imbhn(InitChoice::Zeros),
        };
        let r = cross_validate(&c, &cfg, &plan).unwrap();
        assert_eq!(r.warnings.len(), 1, "{:?}", r.warnings);
        cfg.classifier = imbhn(InitChoice::Prior);
        assert!(matches!(
            cross_validate(&c, &cfg, &plan),
            Err(Error::EmptyClass(_))
        ));
        cfg.classifier = imbhn(InitChoice::Best3);
        let r = cross_validate(&c, &cfg, &plan).unwrap();
        let search = r.init_search.unwrap();
        assert!(search.candidates[2].error.is_some());
    }

    #[test]
    fn plan_must_match_corpus() {
        let c = synthetic(&[4, 4]);
        let plan = stratified_folds(&synthetic(&[5, 3]), 2, 0).unwrap();
        let cfg = EvalConfig {
            features: FeatureConfig::Local { omega: 1 },
            classifier: ClassifierConfig::Majority,
        };
        assert!(cross_validate(&c, &cfg, &plan).is_err());
    }

    #[test]
    fn robustness_identity_at_zero() {
        let c = synthetic(&[10, 8]);
        let cfg = EvalConfig {
            features: FeatureConfig::Local { omega: 1 },
            classifier: ClassifierConfig::NaiveBayes,
        };
        let r = robustness_curve(&c, &cfg, 3, &[0.0, 0.5], 4, 5).unwrap();
        assert!(r.rates[0].trials.iter().all(|t| t.relative_accuracy == 1.0));
        assert_eq!(r.rates[0].mean_relative, 1.0);
        assert_eq!(r.rates[1].removed, 9);
        assert!(r.rates[1].trials.iter().all(|t| t.n_kept == 9));
        assert_eq!(r, robustness_curve(&c, &cfg, 3, &[0.0, 0.5], 4, 5).unwrap());
    }

    #[test]
    fn robustness_rejects_bad_rates() {
        let c = synthetic(&[4, 4]);
        let cfg = EvalConfig {
            features: FeatureConfig::Local { omega: 1 },
            classifier: ClassifierConfig::Majority,
        };
        assert!(robustness_curve(&c, &cfg, 2, &[1.0], 1, 0).is_err());
        assert!(robustness_curve(&c, &cfg, 2, &[0.1], 0, 0).is_err());
        // Removing 7 of 8 leaves one instance: cannot keep both classes.
        assert!(matches!(
            robustness_curve(&c, &cfg, 2, &[0.9], 1, 0),
            Err(Error::Subsample { .. })
        ));
    }

    #[test]
    fn macro_f1_by_hand() {
        // class 0: tp 3, support 4, predicted 3 -> p 1, r 3/4, f1 6/7
        // class 1: tp 2, support 2, predicted 3 -> p 2/3, r 1, f1 4/5
        let f = macro_f1(&[vec![3, 1], vec![0, 2]]);
        assert!((f - (6.0 / 7.0 + 0.8) / 2.0).abs() < 1e-12);
        // Classes without support are left out of the average.
        assert_eq!(macro_f1(&[vec![2, 0], vec![0, 0]]), 1.0);
    }
}
