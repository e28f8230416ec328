//! Inductive model over the bipartite network.
//!
//! Each feature word `t_i` carries a relevance `F[i][j]` for every sense
//! `c_j`. An instance is classified as the sense maximizing
//! `Σ_i w_{k,i} F[i][j]` over its edges. Training repeats a batch error
//! correction until the mean squared error falls below `epsilon_min` or
//! `max_iters` updates have been made:
//!
//! ```text
//! E    = Y - Φ                      (Φ: one-hot predictions, ties -> lowest class)
//! F   += η · Wᵀ E
//! MSE  = Σ E² / (|D| |C|)           (of the predictions made with the updated F)
//! ```

mod persist;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use persist::{load_model, read_model, save_model, write_model, MODEL_FORMAT_VERSION};

use crate::corpus::{Corpus, Instance};
use crate::error::{Error, Result};
use crate::features::{vectorize, FeatureConfig, FeatureSpace, WeightedEdgeList};
use crate::matrix::Matrix;
use crate::network::{build_network, BipartiteNetwork};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitStrategy {
    Zeros,
    Random,
    Prior,
}

impl InitStrategy {
    pub const ALL: [InitStrategy; 3] = [
        InitStrategy::Zeros,
        InitStrategy::Random,
        InitStrategy::Prior,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InitStrategy::Zeros => "zeros",
            InitStrategy::Random => "random",
            InitStrategy::Prior => "prior",
        }
    }
}

impl fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zeros" => Ok(InitStrategy::Zeros),
            "random" => Ok(InitStrategy::Random),
            "prior" => Ok(InitStrategy::Prior),
            other => Err(Error::param(
                "init",
                format!("unknown initialization `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Correction rate η.
    pub eta: f64,
    pub epsilon_min: f64,
    pub max_iters: usize,
    pub init: InitStrategy,
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eta: 0.1,
            epsilon_min: 0.01,
            max_iters: 1000,
            init: InitStrategy::Zeros,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::param(
                "eta",
                format!("must be a positive number, got {}", self.eta),
            ));
        }
        if !(self.epsilon_min.is_finite() && self.epsilon_min > 0.0) {
            return Err(Error::param(
                "epsilon_min",
                format!("must be a positive number, got {}", self.epsilon_min),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        Ok(())
    }
}

/// `E = Y - Φ`; entries are -1, 0 or +1.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMatrix(Matrix);

impl ErrorMatrix {
    pub fn values(&self) -> &Matrix {
        &self.0
    }

    pub fn squared_sum(&self) -> f64 {
        self.0.as_slice().iter().map(|e| e * e).sum()
    }

    /// `Σ E² / (rows · cols)`.
    pub fn mse(&self) -> f64 {
        self.squared_sum() / (self.0.rows() * self.0.cols()) as f64
    }
}

pub fn compute_error(y: &Matrix, phi: &Matrix) -> Result<ErrorMatrix> {
    if y.rows() != phi.rows() || y.cols() != phi.cols() {
        return Err(Error::Validation(format!(
            "label matrix is {}x{}, prediction matrix {}x{}",
            y.rows(),
            y.cols(),
            phi.rows(),
            phi.cols()
        )));
    }
    let data = y
        .as_slice()
        .iter()
        .zip(phi.as_slice())
        .map(|(a, b)| a - b)
        .collect();
    Ok(ErrorMatrix(Matrix::from_vec(y.rows(), y.cols(), data)))
}

/// Initial relevance matrix, `|features| × |classes|`.
///
/// `Prior` sets `F[i][j]` to the fraction of class-`j` training instances
/// linked to feature `i`.
pub fn init_relevance(net: &BipartiteNetwork, init: InitStrategy, rng_seed: u64) -> Result<Matrix> {
    let (v, c) = (net.n_features(), net.n_classes());
    match init {
        InitStrategy::Zeros => Ok(Matrix::zeros(v, c)),
        InitStrategy::Random => {
            let mut rng = seed::rng(rng_seed);
            let data = (0..v * c).map(|_| rng.gen::<f64>()).collect();
            Ok(Matrix::from_vec(v, c, data))
        }
        InitStrategy::Prior => {
            let class_counts = net.class_counts();
            if let Some(j) = class_counts.iter().position(|&n| n == 0) {
                return Err(Error::EmptyClass(net.classes()[j].clone()));
            }
            let mut f = Matrix::zeros(v, c);
            for (row, &label) in net.rows().iter().zip(net.labels()) {
                for (i, _) in row.iter() {
                    f[(i, label)] += 1.0;
                }
            }
            for i in 0..v {
                for (j, &n) in class_counts.iter().enumerate() {
                    f[(i, j)] /= n as f64;
                }
            }
            Ok(f)
        }
    }
}

/// `scores[j] = Σ_i w_i F[i][j]`, summed in ascending feature order.
pub fn scores(edges: &WeightedEdgeList, relevance: &Matrix) -> Vec<f64> {
    let mut s = vec![0.0; relevance.cols()];
    for (i, w) in edges.iter() {
        for (acc, f) in s.iter_mut().zip(relevance.row(i)) {
            *acc += w * f;
        }
    }
    s
}

/// Index of the largest score, lowest index on ties.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (j, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = j;
        }
    }
    best
}

/// Scores of instance `k` and its one-hot predicted membership.
pub fn forward(net: &BipartiteNetwork, relevance: &Matrix, k: usize) -> (Vec<f64>, Vec<f64>) {
    let s = scores(net.row(k), relevance);
    let mut phi = vec![0.0; s.len()];
    phi[argmax(&s)] = 1.0;
    (s, phi)
}

fn predict_all(net: &BipartiteNetwork, relevance: &Matrix) -> Vec<usize> {
    net.rows()
        .iter()
        .map(|row| argmax(&scores(row, relevance)))
        .collect()
}

/// Snapshot handed to a training observer after each update.
#[derive(Debug)]
pub struct IterationState<'a> {
    /// 1-based count of updates made so far.
    pub iteration: usize,
    pub relevance: &'a Matrix,
    pub predictions: &'a [usize],
    pub mse: f64,
}

/// Outcome of the training loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    pub relevance: Matrix,
    /// MSE after each update.
    pub history: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
}

pub fn train_relevance(net: &BipartiteNetwork, cfg: &TrainConfig) -> Result<TrainingRun> {
    train_with_observer(net, cfg, |_| {})
}

/// Runs the batch error-correction loop, calling `observe` after every
/// update with the new relevance matrix and the predictions it makes.
pub fn train_with_observer(
    net: &BipartiteNetwork,
    cfg: &TrainConfig,
    mut observe: impl FnMut(&IterationState<'_>),
) -> Result<TrainingRun> {
    cfg.validate()?;
    if net.n_instances() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let (v, c) = (net.n_features(), net.n_classes());
    let labels = net.labels();

    let mut relevance = init_relevance(net, cfg.init, cfg.rng_seed)?;
    let mut predictions = predict_all(net, &relevance);
    let mut history = Vec::new();
    let mut converged = false;

    for iteration in 1..=cfg.max_iters {
        // Wᵀ E, touching only misclassified rows: their error row is +1 at
        // the gold class and -1 at the predicted one.
        let mut correction = Matrix::zeros(v, c);
        for (k, row) in net.rows().iter().enumerate() {
            let (gold, got) = (labels[k], predictions[k]);
            if gold == got {
                continue;
            }
            for (i, w) in row.iter() {
                correction[(i, gold)] += w;
                correction[(i, got)] -= w;
            }
        }
        for (f, g) in relevance
            .as_mut_slice()
            .iter_mut()
            .zip(correction.as_slice())
        {
            *f += cfg.eta * g;
        }
        if !relevance.is_finite() {
            return Err(Error::NonFinite { iteration });
        }

        predictions = predict_all(net, &relevance);
        let phi = Matrix::one_hot(&predictions, c);
        let mse = compute_error(net.y(), &phi)?.mse();
        history.push(mse);
        observe(&IterationState {
            iteration,
            relevance: &relevance,
            predictions: &predictions,
            mse,
        });
        if mse < cfg.epsilon_min {
            converged = true;
            break;
        }
    }

    Ok(TrainingRun {
        relevance,
        iterations_run: history.len(),
        history,
        converged,
    })
}

/// A trained relevance matrix together with the feature space it was
/// learned over.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub target_lemma: String,
    pub relevance: Matrix,
    pub space: FeatureSpace,
    pub classes: Vec<String>,
    pub history: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
    pub config: TrainConfig,
    /// Fallback for instances with no known features.
    pub majority_class: usize,
}

/// Fits a feature space on `train`, builds the network and trains it.
pub fn train(train: &Corpus, features: &FeatureConfig, cfg: &TrainConfig) -> Result<TrainedModel> {
    let space = features.fit(train)?;
    let net = build_network(train, &space)?;
    train_network(train.target_lemma(), &net, space, cfg)
}

pub fn train_network(
    target_lemma: &str,
    net: &BipartiteNetwork,
    space: FeatureSpace,
    cfg: &TrainConfig,
) -> Result<TrainedModel> {
    let run = train_relevance(net, cfg)?;
    Ok(TrainedModel {
        target_lemma: target_lemma.to_string(),
        relevance: run.relevance,
        space,
        classes: net.classes().to_vec(),
        history: run.history,
        iterations_run: run.iterations_run,
        converged: run.converged,
        config: *cfg,
        majority_class: net.majority_class(),
    })
}

impl TrainedModel {
    /// Class index for an already vectorized instance.
    pub fn predict_edges(&self, edges: &WeightedEdgeList) -> usize {
        if edges.is_empty() {
            return self.majority_class;
        }
        argmax(&scores(edges, &self.relevance))
    }

    pub fn predict_index(&self, instance: &Instance) -> usize {
        self.predict_edges(&vectorize(instance, &self.space))
    }

    /// Sense label for a preprocessed instance.
    pub fn classify(&self, instance: &Instance) -> &str {
        &self.classes[self.predict_index(instance)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(
        rows: Vec<Vec<(usize, f64)>>,
        labels: Vec<usize>,
        n_features: usize,
        n_classes: usize,
    ) -> BipartiteNetwork {
        BipartiteNetwork::from_parts(
            (0..n_features).map(|i| format!("f{i}")).collect(),
            (0..rows.len()).map(|k| format!("d{k}")).collect(),
            (0..n_classes).map(|j| format!("c{j}")).collect(),
            rows.into_iter().map(WeightedEdgeList::new).collect(),
            labels,
        )
        .unwrap()
    }

    #[test]
    fn zeros_init() {
        let n = net(vec![vec![(0, 1.0)]], vec![0], 3, 2);
        let f = init_relevance(&n, InitStrategy::Zeros, 0).unwrap();
        assert!(f.as_slice().iter().all(|&v| v == 0.0));
        assert_eq!((f.rows(), f.cols()), (3, 2));
    }

    #[test]
    fn prior_init_is_class_conditional_fraction() {
        // "rate" (feature 0) in 3 of 4 class-0 instances.
        let n = net(
            vec![
                vec![(0, 0.5)],
                vec![(0, 2.0), (1, 1.0)],
                vec![(0, 1.0)],
                vec![(1, 1.0)],
                vec![(1, 3.0)],
            ],
            vec![0, 0, 0, 0, 1],
            2,
            2,
        );
        let f = init_relevance(&n, InitStrategy::Prior, 0).unwrap();
        assert_eq!(f[(0, 0)], 0.75);
        assert_eq!(f[(1, 0)], 0.5);
        assert_eq!(f[(0, 1)], 0.0);
        assert_eq!(f[(1, 1)], 1.0);
    }

    #[test]
    fn prior_init_needs_every_class() {
        let n = net(vec![vec![(0, 1.0)]], vec![0], 1, 2);
        assert!(
            matches!(init_relevance(&n, InitStrategy::Prior, 0), Err(Error::EmptyClass(c)) if c == "c1")
        );
    }

    #[test]
    fn random_init_is_seeded() {
        let n = net(vec![vec![(0, 1.0)]], vec![0], 4, 3);
        let a = init_relevance(&n, InitStrategy::Random, 11).unwrap();
        assert_eq!(a, init_relevance(&n, InitStrategy::Random, 11).unwrap());
        assert_ne!(a, init_relevance(&n, InitStrategy::Random, 12).unwrap());
        assert!(a.as_slice().iter().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn forward_examples() {
        let n = net(vec![vec![(0, 1.0)], vec![]], vec![0, 1], 1, 2);
        let f = Matrix::from_rows(&[vec![2.0, 1.0]]);
        assert_eq!(forward(&n, &f, 0), (vec![2.0, 1.0], vec![1.0, 0.0]));
        assert_eq!(forward(&n, &f, 1), (vec![0.0, 0.0], vec![1.0, 0.0]));
        let zeros = Matrix::zeros(1, 2);
        assert_eq!(forward(&n, &zeros, 0).1, vec![1.0, 0.0]);
    }

    #[test]
    fn error_examples() {
        let e = |y: &[f64], p: &[f64]| {
            compute_error(
                &Matrix::from_rows(&[y.to_vec()]),
                &Matrix::from_rows(&[p.to_vec()]),
            )
            .unwrap()
            .values()
            .row(0)
            .to_vec()
        };
        assert_eq!(e(&[1.0, 0.0], &[1.0, 0.0]), [0.0, 0.0]);
        assert_eq!(e(&[1.0, 0.0], &[0.0, 1.0]), [1.0, -1.0]);
        assert_eq!(e(&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]), [-1.0, 1.0, 0.0]);
        assert!(compute_error(&Matrix::zeros(1, 2), &Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn zero_error_fixed_point() {
        let n = net(vec![vec![(0, 1.0)], vec![(1, 0.5)]], vec![0, 0], 2, 2);
        let run = train_relevance(&n, &TrainConfig::default()).unwrap();
        assert_eq!(run.iterations_run, 1);
        assert!(run.converged);
        assert_eq!(run.history, [0.0]);
        assert_eq!(run.relevance, Matrix::zeros(2, 2));
    }

    #[test]
    fn single_step_closed_form() {
        // 2 instances × 2 features × 2 classes, zeros init: everyone is
        // predicted class 0, so only instance 1 (class 1) has error (-1, +1).
        let n = net(
            vec![vec![(0, 0.5), (1, 0.25)], vec![(0, 0.75), (1, 1.0)]],
            vec![0, 1],
            2,
            2,
        );
        let cfg = TrainConfig {
            eta: 0.1,
            max_iters: 1,
            ..TrainConfig::default()
        };
        let run = train_relevance(&n, &cfg).unwrap();
        let expected =
            Matrix::from_rows(&[vec![-0.1 * 0.75, 0.1 * 0.75], vec![-0.1 * 1.0, 0.1 * 1.0]]);
        assert_eq!(run.relevance, expected);
        assert_eq!(run.iterations_run, 1);
        // Instance 0 scores (-0.0625, 0.0625) after the update: now wrong.
        assert_eq!(run.history, [0.5]);
        assert!(!run.converged);
    }

    #[test]
    fn separable_toy_converges() {
        let n = net(
            vec![
                vec![(0, 1.0)],
                vec![(1, 1.0)],
                vec![(0, 0.5), (2, 1.0)],
                vec![(1, 0.3), (3, 0.2)],
            ],
            vec![0, 1, 0, 1],
            4,
            2,
        );
        for init in InitStrategy::ALL {
            let run = train_relevance(
                &n,
                &TrainConfig {
                    init,
                    ..TrainConfig::default()
                },
            )
            .unwrap();
            assert!(run.converged, "{init}");
            assert_eq!(predict_all(&n, &run.relevance), n.labels());
        }
    }

    #[test]
    fn divergence_is_reported() {
        let n = net(vec![vec![(0, 1e300)], vec![(0, 1e300)]], vec![0, 1], 1, 2);
        let cfg = TrainConfig {
            eta: 1e10,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train_relevance(&n, &cfg),
            Err(Error::NonFinite { iteration: 1 })
        ));
    }

    #[test]
    fn invalid_config() {
        let n = net(vec![vec![(0, 1.0)]], vec![0], 1, 2);
        for cfg in [
            TrainConfig {
                eta: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                epsilon_min: -1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                max_iters: 0,
                ..TrainConfig::default()
            },
        ] {
            assert!(matches!(
                train_relevance(&n, &cfg),
                Err(Error::InvalidParameter { .. })
            ));
        }
    }

    #[test]
    fn argmax_ties_take_lowest() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0, -0.0]), 0);
        assert_eq!(argmax(&[]), 0);
    }
}
