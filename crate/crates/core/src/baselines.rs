//! Reference classifiers over the same weighted edge lists the inductive
//! model consumes.

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, WeightedEdgeList};
use crate::imbhn::argmax;
use crate::matrix::Matrix;
use crate::network::{argmax_usize, BipartiteNetwork};

/// Published accuracy of an external system, for side-by-side display.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceScore {
    pub system: String,
    pub accuracy: f64,
}

const REFERENCE_WORDS: [&str; 4] = ["interest", "line", "serve", "hard"];

// (system, feature size, accuracy per word in REFERENCE_WORDS order)
const TOPICAL_REFERENCE: [(&str, usize, [f64; 4]); 6] = [
    ("j48", 100, [0.7947, 0.6273, 0.6815, 0.8458]),
    ("smo", 100, [0.7977, 0.6287, 0.6679, 0.8407]),
    ("j48", 200, [0.8239, 0.6671, 0.6895, 0.8617]),
    ("smo", 200, [0.8327, 0.6895, 0.6984, 0.8536]),
    ("j48", 300, [0.8268, 0.6854, 0.7067, 0.8622]),
    ("smo", 300, [0.8471, 0.6987, 0.7192, 0.8552]),
];

const LOCAL_REFERENCE: [(&str, usize, [f64; 4]); 6] = [
    ("j48", 1, [0.6583, 0.6097, 0.4643, 0.8557]),
    ("smo", 1, [0.6600, 0.6261, 0.5788, 0.8130]),
    ("j48", 2, [0.7174, 0.6121, 0.5557, 0.8539]),
    ("smo", 2, [0.6410, 0.6213, 0.5863, 0.8068]),
    ("j48", 3, [0.7685, 0.6266, 0.6094, 0.8525]),
    ("smo", 3, [0.6414, 0.6080, 0.5845, 0.7978]),
];

/// Published J48 and SMO accuracies for the four classic lexical-sample
/// targets, when `target` and the feature setting have one. Empty
/// otherwise.
pub fn reference_scores(target: &str, features: &FeatureConfig) -> Vec<ReferenceScore> {
    let Some(w) = REFERENCE_WORDS.iter().position(|&x| x == target) else {
        return Vec::new();
    };
    let (table, size) = match *features {
        FeatureConfig::Topical { num_topics } => (&TOPICAL_REFERENCE, num_topics),
        FeatureConfig::Local { omega } => (&LOCAL_REFERENCE, omega),
    };
    table
        .iter()
        .filter(|(_, n, _)| *n == size)
        .map(|(system, _, acc)| ReferenceScore {
            system: system.to_string(),
            accuracy: acc[w],
        })
        .collect()
}

/// Most frequent sense and its relative frequency. Ties go to the sense
/// listed first in the inventory.
pub fn majority_baseline(train: &Corpus) -> Result<(String, f64)> {
    if train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let counts = train.class_counts();
    let best = argmax_usize(&counts);
    Ok((
        train.sense_inventory()[best].clone(),
        counts[best] as f64 / train.len() as f64,
    ))
}

/// Multinomial naive Bayes over edge weights, add-one smoothed.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveBayesModel {
    pub class_log_priors: Vec<f64>,
    /// `|features| × |classes|`; each column is a log distribution over
    /// features.
    pub feature_log_likelihoods: Matrix,
}

pub fn train_nb(net: &BipartiteNetwork) -> Result<NaiveBayesModel> {
    let (v, c, d) = (net.n_features(), net.n_classes(), net.n_instances());
    if d == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut mass = Matrix::zeros(v, c);
    let mut totals = vec![0.0; c];
    for (row, &label) in net.rows().iter().zip(net.labels()) {
        for (i, w) in row.iter() {
            mass[(i, label)] += w;
            totals[label] += w;
        }
    }
    let mut log_lik = Matrix::zeros(v, c);
    for j in 0..c {
        let denom = (totals[j] + v as f64).ln();
        for i in 0..v {
            log_lik[(i, j)] = (mass[(i, j)] + 1.0).ln() - denom;
        }
    }
    let class_log_priors = net
        .class_counts()
        .iter()
        .map(|&n| (n as f64 / d as f64).ln())
        .collect();
    Ok(NaiveBayesModel {
        class_log_priors,
        feature_log_likelihoods: log_lik,
    })
}

impl NaiveBayesModel {
    /// Unnormalized log posterior of each class.
    pub fn log_posteriors(&self, vector: &WeightedEdgeList) -> Vec<f64> {
        let mut lp = self.class_log_priors.clone();
        for (i, w) in vector.iter() {
            for (acc, l) in lp.iter_mut().zip(self.feature_log_likelihoods.row(i)) {
                *acc += w * l;
            }
        }
        lp
    }
}

pub fn predict_nb(model: &NaiveBayesModel, vector: &WeightedEdgeList) -> usize {
    argmax(&model.log_posteriors(vector))
}

/// k-nearest neighbours by cosine similarity.
#[derive(Debug, Clone)]
pub struct KnnModel {
    vectors: Vec<WeightedEdgeList>,
    norms: Vec<f64>,
    labels: Vec<usize>,
    n_classes: usize,
    k: usize,
    majority: usize,
}

pub const DEFAULT_KNN_K: usize = 3;

impl KnnModel {
    /// Stores the network's instance vectors. `k` is capped at the number
    /// of training instances.
    pub fn fit(net: &BipartiteNetwork, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("k", "must be at least 1"));
        }
        if net.n_instances() == 0 {
            return Err(Error::EmptyCorpus);
        }
        Ok(KnnModel {
            norms: net.rows().iter().map(WeightedEdgeList::norm).collect(),
            vectors: net.rows().to_vec(),
            labels: net.labels().to_vec(),
            n_classes: net.n_classes(),
            k: k.min(net.n_instances()),
            majority: net.majority_class(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub fn dot(a: &WeightedEdgeList, b: &WeightedEdgeList) -> f64 {
    let (a, b) = (a.entries(), b.entries());
    let (mut p, mut q, mut s) = (0, 0, 0.0);
    while p < a.len() && q < b.len() {
        match a[p].0.cmp(&b[q].0) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                s += a[p].1 * b[q].1;
                p += 1;
                q += 1;
            }
        }
    }
    s
}

pub fn cosine(a: &WeightedEdgeList, b: &WeightedEdgeList) -> f64 {
    let n = a.norm() * b.norm();
    if n == 0.0 {
        0.0
    } else {
        dot(a, b) / n
    }
}

/// Majority vote among the `k` most similar training vectors. Similarity
/// ties go to the lower training index, vote ties to the lower class
/// index; an empty query falls back to the majority training class.
pub fn predict_knn(model: &KnnModel, vector: &WeightedEdgeList) -> usize {
    let qn = vector.norm();
    if qn == 0.0 {
        return model.majority;
    }
    let mut sims: Vec<(usize, f64)> = model
        .vectors
        .iter()
        .zip(&model.norms)
        .enumerate()
        .map(|(idx, (v, &n))| {
            (
                idx,
                if n == 0.0 {
                    0.0
                } else {
                    dot(vector, v) / (qn * n)
                },
            )
        })
        .collect();
    sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut votes = vec![0usize; model.n_classes];
    for &(idx, _) in sims.iter().take(model.k) {
        votes[model.labels[idx]] += 1;
    }
    argmax_usize(&votes)
}
