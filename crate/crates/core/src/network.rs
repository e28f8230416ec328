//! The bipartite heterogeneous network: a feature-word layer, an instance
//! layer, weighted edges between them and one-hot gold labels. There are no
//! feature–feature or instance–instance edges.

use std::path::Path;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{vectorize, FeatureSpace, WeightedEdgeList};
use crate::matrix::Matrix;

#[derive(Debug, Clone)]
pub struct BipartiteNetwork {
    features: Vec<String>,
    instance_ids: Vec<String>,
    classes: Vec<String>,
    /// Row `k` of W, sparse.
    rows: Vec<WeightedEdgeList>,
    labels: Vec<usize>,
    y: Matrix,
}

/// Vectorizes every training instance against `space` and one-hot encodes
/// gold senses in sense-inventory order.
pub fn build_network(train: &Corpus, space: &FeatureSpace) -> Result<BipartiteNetwork> {
    let mut labels = Vec::with_capacity(train.len());
    for inst in train.instances() {
        let c = train.class_index(&inst.sense).ok_or_else(|| {
            Error::Validation(format!(
                "instance `{}` has unknown sense `{}`",
                inst.id, inst.sense
            ))
        })?;
        labels.push(c);
    }
    BipartiteNetwork::from_parts(
        space.vocabulary().to_vec(),
        train.instances().iter().map(|i| i.id.clone()).collect(),
        train.sense_inventory().to_vec(),
        train
            .instances()
            .iter()
            .map(|i| vectorize(i, space))
            .collect(),
        labels,
    )
}

impl BipartiteNetwork {
    pub fn from_parts(
        features: Vec<String>,
        instance_ids: Vec<String>,
        classes: Vec<String>,
        rows: Vec<WeightedEdgeList>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::Validation("network needs at least one class".into()));
        }
        if rows.len() != instance_ids.len() || labels.len() != instance_ids.len() {
            return Err(Error::Validation(format!(
                "{} instance ids, {} edge rows, {} labels",
                instance_ids.len(),
                rows.len(),
                labels.len()
            )));
        }
        if let Some(k) = labels.iter().position(|&l| l >= classes.len()) {
            return Err(Error::Validation(format!(
                "instance `{}` has class index {} of {}",
                instance_ids[k],
                labels[k],
                classes.len()
            )));
        }
        for (k, row) in rows.iter().enumerate() {
            if let Some((i, _)) = row.iter().find(|&(i, _)| i >= features.len()) {
                return Err(Error::Validation(format!(
                    "instance `{}` links feature {i} of {}",
                    instance_ids[k],
                    features.len()
                )));
            }
        }
        let y = Matrix::one_hot(&labels, classes.len());
        Ok(BipartiteNetwork {
            features,
            instance_ids,
            classes,
            rows,
            labels,
            y,
        })
    }

    pub fn features(&self) -> &[String] {
        &self.features
    }

    pub fn instance_ids(&self) -> &[String] {
        &self.instance_ids
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_instances(&self) -> usize {
        self.instance_ids.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn row(&self, k: usize) -> &WeightedEdgeList {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[WeightedEdgeList] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// One-hot gold label matrix, `|instances| × |classes|`.
    pub fn y(&self) -> &Matrix {
        &self.y
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Most frequent class, lowest index on ties.
    pub fn majority_class(&self) -> usize {
        argmax_usize(&self.class_counts())
    }

    /// Dense copy of W, mainly for inspection and tests.
    pub fn dense_weights(&self) -> Matrix {
        let mut w = Matrix::zeros(self.n_instances(), self.n_features());
        for (k, row) in self.rows.iter().enumerate() {
            for (i, v) in row.iter() {
                w[(k, i)] = v;
            }
        }
        w
    }

    /// Writes `weights.csv` (instance, feature, weight triplets),
    /// `labels.csv` (dense Y) and, when given, `relevance.csv` (dense F).
    pub fn write_csv_dump(&self, dir: impl AsRef<Path>, relevance: Option<&Matrix>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let mut w = csv::Writer::from_path(dir.join("weights.csv"))?;
        w.write_record(["instance", "feature", "weight"])?;
        for (k, row) in self.rows.iter().enumerate() {
            for (i, v) in row.iter() {
                w.write_record([&self.instance_ids[k], &self.features[i], &v.to_string()])?;
            }
        }
        w.flush()
            .map_err(|e| Error::io(dir.join("weights.csv"), e))?;

        let header = |first: &str| {
            std::iter::once(first.to_string())
                .chain(self.classes.iter().cloned())
                .collect::<Vec<_>>()
        };

        let mut y = csv::Writer::from_path(dir.join("labels.csv"))?;
        y.write_record(header("instance"))?;
        for (k, id) in self.instance_ids.iter().enumerate() {
            let mut rec = vec![id.clone()];
            rec.extend(self.y.row(k).iter().map(|v| v.to_string()));
            y.write_record(rec)?;
        }
        y.flush()
            .map_err(|e| Error::io(dir.join("labels.csv"), e))?;

        if let Some(f) = relevance {
            let path = dir.join("relevance.csv");
            let mut out = csv::Writer::from_path(&path)?;
            out.write_record(header("feature"))?;
            for (i, word) in self.features.iter().enumerate() {
                let mut rec = vec![word.clone()];
                rec.extend(f.row(i).iter().map(|v| v.to_string()));
                out.write_record(rec)?;
            }
            out.flush().map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

pub(crate) fn argmax_usize(v: &[usize]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
