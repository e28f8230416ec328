//! Python bindings: load a corpus, train and apply models, and run the
//! cross-validation and robustness experiments. Reports come back as plain
//! dicts with the same layout as the CLI's JSON output.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use imbhn_core::baselines::majority_baseline;
use imbhn_core::corpus::{default_stopwords, load_stopwords};
use imbhn_core::eval::{
    cross_validate as core_cross_validate, robustness_curve, stratified_folds, ClassifierConfig,
    EvalConfig, ImbhnConfig, InitChoice,
};
use imbhn_core::imbhn::{
    load_model, save_model, train as core_train, InitStrategy, TrainConfig, TrainedModel,
};
use imbhn_core::seed::{self, Stream};
use imbhn_core::{load_corpus, CorpusFormat, FeatureConfig};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py_dict(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn feature_config(features: &str, size: usize) -> PyResult<FeatureConfig> {
    match features {
        "topical" => Ok(FeatureConfig::Topical { num_topics: size }),
        "local" => Ok(FeatureConfig::Local { omega: size }),
        other => Err(value_err(format!(
            "features must be `topical` or `local`, got `{other}`"
        ))),
    }
}

/// A preprocessed lexical-sample corpus for one target word.
#[pyclass(module = "imbhn", frozen)]
pub struct Corpus {
    inner: imbhn_core::Corpus,
}

#[pymethods]
impl Corpus {
    /// Loads a JSON-lines corpus and preprocesses it.
    #[staticmethod]
    #[pyo3(signature = (path, stopwords=None))]
    fn load(path: PathBuf, stopwords: Option<PathBuf>) -> PyResult<Self> {
        let words = match stopwords {
            Some(p) => load_stopwords(p).map_err(value_err)?,
            None => default_stopwords(),
        };
        let corpus = load_corpus(path, CorpusFormat::Jsonl).map_err(value_err)?;
        Ok(Corpus {
            inner: corpus.with_stopwords(words).preprocessed(),
        })
    }

    #[getter]
    fn target_lemma(&self) -> &str {
        self.inner.target_lemma()
    }

    #[getter]
    fn senses(&self) -> Vec<String> {
        self.inner.sense_inventory().to_vec()
    }

    #[getter]
    fn ids(&self) -> Vec<String> {
        self.inner
            .instances()
            .iter()
            .map(|i| i.id.clone())
            .collect()
    }

    #[getter]
    fn gold(&self) -> Vec<String> {
        self.inner
            .instances()
            .iter()
            .map(|i| i.sense.clone())
            .collect()
    }

    fn class_counts(&self) -> Vec<usize> {
        self.inner.class_counts()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Corpus(target={:?}, instances={}, senses={})",
            self.inner.target_lemma(),
            self.inner.len(),
            self.inner.sense_inventory().len()
        )
    }
}

/// A trained relevance matrix and its feature space.
#[pyclass(module = "imbhn", frozen)]
pub struct Model {
    inner: TrainedModel,
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Model {
            inner: load_model(path).map_err(value_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_model(&self.inner, path).map_err(value_err)
    }

    /// Predicted sense for every instance of `corpus`.
    fn classify(&self, corpus: &Corpus) -> PyResult<Vec<String>> {
        if corpus.inner.target_lemma() != self.inner.target_lemma {
            return Err(value_err(format!(
                "model was trained for `{}`, corpus targets `{}`",
                self.inner.target_lemma,
                corpus.inner.target_lemma()
            )));
        }
        Ok(corpus
            .inner
            .instances()
            .iter()
            .map(|i| self.inner.classify(i).to_string())
            .collect())
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.classes.clone()
    }

    #[getter]
    fn features(&self) -> Vec<String> {
        self.inner.space.vocabulary().to_vec()
    }

    #[getter]
    fn history(&self) -> Vec<f64> {
        self.inner.history.clone()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations_run
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    /// Relevance matrix as a list of rows, one per feature.
    fn relevance(&self) -> Vec<Vec<f64>> {
        self.inner.relevance.to_rows()
    }
}

/// Trains IMBHN on the whole corpus.
#[pyfunction]
#[pyo3(signature = (corpus, features="local", size=3, eta=0.1, epsilon_min=0.01, max_iters=1000, init="zeros", seed=0))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    corpus: &Corpus,
    features: &str,
    size: usize,
    eta: f64,
    epsilon_min: f64,
    max_iters: usize,
    init: &str,
    seed: u64,
) -> PyResult<Model> {
    let fc = feature_config(features, size)?;
    let init: InitStrategy = init.parse().map_err(value_err)?;
    let cfg = TrainConfig {
        eta,
        epsilon_min,
        max_iters,
        init,
        rng_seed: seed::derive(seed, Stream::Init, &[]),
    };
    let inner = py
        .detach(|| core_train(&corpus.inner, &fc, &cfg))
        .map_err(value_err)?;
    Ok(Model { inner })
}

#[allow(clippy::too_many_arguments)]
fn eval_config(
    features: &str,
    size: usize,
    classifier: &str,
    eta: f64,
    epsilon_min: f64,
    max_iters: usize,
    init: &str,
    knn_k: usize,
    seed: u64,
) -> PyResult<EvalConfig> {
    let classifier = match classifier {
        "imbhn" => ClassifierConfig::Imbhn(ImbhnConfig {
            eta,
            epsilon_min,
            max_iters,
            init: init.parse::<InitChoice>().map_err(value_err)?,
            rng_seed: seed::derive(seed, Stream::Init, &[]),
        }),
        "nb" => ClassifierConfig::NaiveBayes,
        "knn" => ClassifierConfig::Knn { k: knn_k },
        "majority" => ClassifierConfig::Majority,
        other => return Err(value_err(format!("unknown classifier `{other}`"))),
    };
    Ok(EvalConfig {
        features: feature_config(features, size)?,
        classifier,
    })
}

/// Stratified k-fold cross-validation; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (corpus, features="local", size=3, classifier="imbhn", eta=0.1, epsilon_min=0.01, max_iters=1000, init="zeros", knn_k=3, folds=10, seed=0))]
#[allow(clippy::too_many_arguments)]
fn cross_validate(
    py: Python<'_>,
    corpus: &Corpus,
    features: &str,
    size: usize,
    classifier: &str,
    eta: f64,
    epsilon_min: f64,
    max_iters: usize,
    init: &str,
    knn_k: usize,
    folds: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let cfg = eval_config(
        features,
        size,
        classifier,
        eta,
        epsilon_min,
        max_iters,
        init,
        knn_k,
        seed,
    )?;
    let report = py
        .detach(|| {
            let plan =
                stratified_folds(&corpus.inner, folds, seed::derive(seed, Stream::Folds, &[]))?;
            core_cross_validate(&corpus.inner, &cfg, &plan)
        })
        .map_err(value_err)?;
    to_py_dict(py, &report)
}

/// Relative accuracy under random removal of a fraction of instances.
#[pyfunction]
#[pyo3(signature = (corpus, rates, trials=50, features="local", size=3, classifier="imbhn", eta=0.1, epsilon_min=0.01, max_iters=1000, init="zeros", knn_k=3, folds=10, seed=0))]
#[allow(clippy::too_many_arguments)]
fn robustness(
    py: Python<'_>,
    corpus: &Corpus,
    rates: Vec<f64>,
    trials: usize,
    features: &str,
    size: usize,
    classifier: &str,
    eta: f64,
    epsilon_min: f64,
    max_iters: usize,
    init: &str,
    knn_k: usize,
    folds: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let cfg = eval_config(
        features,
        size,
        classifier,
        eta,
        epsilon_min,
        max_iters,
        init,
        knn_k,
        seed,
    )?;
    let report = py
        .detach(|| robustness_curve(&corpus.inner, &cfg, folds, &rates, trials, seed))
        .map_err(value_err)?;
    to_py_dict(py, &report)
}

/// Most frequent sense and the accuracy of always predicting it.
#[pyfunction]
#[pyo3(name = "majority_baseline")]
fn py_majority_baseline(corpus: &Corpus) -> PyResult<(String, f64)> {
    majority_baseline(&corpus.inner).map_err(value_err)
}

#[pymodule]
fn imbhn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Corpus>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(robustness, m)?)?;
    m.add_function(wrap_pyfunction!(py_majority_baseline, m)?)?;
    Ok(())
}
