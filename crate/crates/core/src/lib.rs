//! Word sense disambiguation with an inductive model over a bipartite
//! heterogeneous network.
//!
//! The pipeline is:
//!
//! 1. [`corpus`] loads a lexical-sample corpus (one ambiguous target word,
//!    many labeled occurrences) and strips stopwords and punctuation.
//! 2. [`features`] fits a feature space on the training instances, either
//!    the `|T|` most frequent words (topical) or the words inside a window
//!    of `ω` positions around the target (local), and turns every instance
//!    into a list of weighted edges.
//! 3. [`network`] assembles those edges into the two-layer network: feature
//!    words on one side, target occurrences on the other.
//! 4. [`imbhn`] learns a feature × sense relevance matrix by batch error
//!    correction and classifies new occurrences with it.
//! 5. [`baselines`] and [`eval`] provide reference classifiers, stratified
//!    cross-validation and the training-set subsampling experiment.

pub mod baselines;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod imbhn;
pub mod matrix;
pub mod network;
pub mod seed;

pub use corpus::{load_corpus, preprocess, Corpus, CorpusFormat, Instance, Token};
pub use error::{Error, Result};
pub use eval::{
    cross_validate, robustness_curve, stratified_folds, ClassifierConfig, EvalReport, FoldPlan,
    RobustnessReport,
};
pub use features::{FeatureConfig, FeatureKind, FeatureSpace, WeightedEdgeList};
pub use imbhn::{train, InitStrategy, TrainConfig, TrainedModel};
pub use matrix::Matrix;
pub use network::BipartiteNetwork;
