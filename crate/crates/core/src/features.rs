//! Feature spaces and cross-layer edge weights.
//!
//! Two kinds of feature words are supported:
//!
//! * **topical**: the `|T|` most frequent words of the training contexts.
//!   An instance links to every topical word in its context with weight
//!   `1 - δ/l`, where `δ` is the number of words between the target and the
//!   closest occurrence of the feature and `l` the context length.
//! * **local**: every word seen within `ω` positions of the target in some
//!   training instance. Links carry `tf · ln(n_train / df)`, with `tf`
//!   counted inside the window and `df` the number of training windows
//!   containing the word.
//!
//! The target word itself is never a feature. Spaces are fitted on training
//! instances only; unseen words in test instances are dropped.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::Hasher;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Instance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Topical,
    Local,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Topical => "topical",
            FeatureKind::Local => "local",
        })
    }
}

/// Which feature space to fit, with its size parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureConfig {
    Topical { num_topics: usize },
    Local { omega: usize },
}

impl FeatureConfig {
    pub fn kind(&self) -> FeatureKind {
        match self {
            FeatureConfig::Topical { .. } => FeatureKind::Topical,
            FeatureConfig::Local { .. } => FeatureKind::Local,
        }
    }

    pub fn fit(&self, train: &Corpus) -> Result<FeatureSpace> {
        match *self {
            FeatureConfig::Topical { num_topics } => fit_topical_space(train, num_topics),
            FeatureConfig::Local { omega } => fit_local_space(train, omega),
        }
    }

    /// Short label such as `local-w3` or `topical-t100`.
    pub fn label(&self) -> String {
        match self {
            FeatureConfig::Topical { num_topics } => format!("topical-t{num_topics}"),
            FeatureConfig::Local { omega } => format!("local-w{omega}"),
        }
    }
}

/// A fitted vocabulary of feature words.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpace {
    config: FeatureConfig,
    vocabulary: Vec<String>,
    index: HashMap<String, usize>,
    /// Document frequency per vocabulary entry (local spaces only).
    df: Vec<usize>,
    n_train: usize,
}

impl FeatureSpace {
    /// Reassembles a space from its parts, e.g. when loading a model file.
    pub fn from_parts(
        config: FeatureConfig,
        vocabulary: Vec<String>,
        df: Vec<usize>,
        n_train: usize,
    ) -> Result<Self> {
        let index = index_of(&vocabulary)?;
        match config {
            FeatureConfig::Topical { num_topics } => {
                if num_topics == 0 {
                    return Err(Error::param("num_topics", "must be at least 1"));
                }
                if vocabulary.len() > num_topics {
                    return Err(Error::Validation(format!(
                        "topical vocabulary has {} words, more than |T| = {num_topics}",
                        vocabulary.len()
                    )));
                }
                if !df.is_empty() {
                    return Err(Error::Validation(
                        "topical spaces carry no document frequencies".into(),
                    ));
                }
            }
            FeatureConfig::Local { omega } => {
                if omega == 0 {
                    return Err(Error::param("omega", "must be at least 1"));
                }
                if df.len() != vocabulary.len() {
                    return Err(Error::Validation(
                        "df length differs from vocabulary length".into(),
                    ));
                }
                if let Some(bad) = df.iter().position(|&d| d == 0 || d > n_train) {
                    return Err(Error::Validation(format!(
                        "df of `{}` is {}, outside [1, {n_train}]",
                        vocabulary[bad], df[bad]
                    )));
                }
            }
        }
        Ok(FeatureSpace {
            config,
            vocabulary,
            index,
            df,
            n_train,
        })
    }

    pub fn config(&self) -> FeatureConfig {
        self.config
    }

    pub fn kind(&self) -> FeatureKind {
        self.config.kind()
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocabulary.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    /// Document frequency of a local feature; `None` for topical spaces or
    /// unknown words.
    pub fn df(&self, word: &str) -> Option<usize> {
        self.index_of(word).and_then(|i| self.df.get(i).copied())
    }

    pub fn df_values(&self) -> &[usize] {
        &self.df
    }
}

fn index_of(vocabulary: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(vocabulary.len());
    for (i, w) in vocabulary.iter().enumerate() {
        if index.insert(w.clone(), i).is_some() {
            return Err(Error::Validation(format!(
                "feature `{w}` appears twice in vocabulary"
            )));
        }
    }
    Ok(index)
}

/// Non-target tokens of the context, with their positions.
fn feature_tokens(instance: &Instance) -> impl Iterator<Item = (usize, &str)> {
    instance
        .context
        .iter()
        .enumerate()
        .filter(move |(p, t)| *p != instance.target_index && !instance.is_target_word(t.surface()))
        .map(|(p, t)| (p, t.surface()))
}

/// Non-target tokens within `omega` positions of the target.
fn window_tokens(instance: &Instance, omega: usize) -> impl Iterator<Item = &str> {
    let t = instance.target_index;
    let lo = t.saturating_sub(omega);
    let hi = (t + omega).min(instance.context.len() - 1);
    feature_tokens(instance)
        .filter(move |(p, _)| (lo..=hi).contains(p))
        .map(|(_, w)| w)
}

/// The `num_topics` most frequent non-target words of the training
/// contexts, ranked by count then lexicographically.
pub fn fit_topical_space(train: &Corpus, num_topics: usize) -> Result<FeatureSpace> {
    if num_topics == 0 {
        return Err(Error::param("num_topics", "must be at least 1"));
    }
    if train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for inst in train.instances() {
        for (_, w) in feature_tokens(inst) {
            *counts.entry(w).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(num_topics);
    let vocabulary = ranked.into_iter().map(|(w, _)| w.to_string()).collect();
    FeatureSpace::from_parts(
        FeatureConfig::Topical { num_topics },
        vocabulary,
        Vec::new(),
        train.len(),
    )
}

/// All non-target words within `omega` of the target in some training
/// instance, sorted lexicographically, with per-instance document
/// frequencies.
pub fn fit_local_space(train: &Corpus, omega: usize) -> Result<FeatureSpace> {
    if omega == 0 {
        return Err(Error::param("omega", "must be at least 1"));
    }
    if train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    for inst in train.instances() {
        let window: HashSet<&str> = window_tokens(inst, omega).collect();
        for w in window {
            *df.entry(w).or_default() += 1;
        }
    }
    let mut entries: Vec<(&str, usize)> = df.into_iter().collect();
    entries.sort_unstable_by(|a, b| a.0.cmp(b.0));
    let (vocabulary, df) = entries.into_iter().map(|(w, d)| (w.to_string(), d)).unzip();
    FeatureSpace::from_parts(FeatureConfig::Local { omega }, vocabulary, df, train.len())
}

fn distance_weight(delta: usize, len: usize) -> f64 {
    1.0 - delta as f64 / len as f64
}

fn tfidf(tf: usize, n_train: usize, df: usize) -> f64 {
    tf as f64 * (n_train as f64 / df as f64).ln()
}

/// `1 - δ/l` for the closest occurrence of `feature`, 0 when it does not
/// occur (or is the target word).
pub fn topical_weight(instance: &Instance, feature: &str) -> f64 {
    let t = instance.target_index;
    feature_tokens(instance)
        .filter(|(_, w)| *w == feature)
        .map(|(p, _)| p.abs_diff(t) - 1)
        .min()
        .map_or(0.0, |delta| distance_weight(delta, instance.len()))
}

/// `tf · ln(n_train / df)` inside the space's window; 0 when the feature is
/// outside the window or the vocabulary, or the space is not local.
pub fn local_weight(instance: &Instance, feature: &str, space: &FeatureSpace) -> f64 {
    let FeatureConfig::Local { omega } = space.config else {
        return 0.0;
    };
    let Some(df) = space.df(feature) else {
        return 0.0;
    };
    let tf = window_tokens(instance, omega)
        .filter(|w| *w == feature)
        .count();
    if tf == 0 {
        return 0.0;
    }
    tfidf(tf, space.n_train, df)
}

/// Sparse edges from one instance node to feature nodes, sorted by feature
/// index. Stored weights are strictly positive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightedEdgeList {
    entries: Vec<(usize, f64)>,
}

impl WeightedEdgeList {
    /// Sorts by feature index and drops zero weights. Panics on duplicate
    /// features or negative or non-finite weights.
    pub fn new(mut entries: Vec<(usize, f64)>) -> Self {
        entries.retain(|&(_, w)| w != 0.0);
        entries.sort_unstable_by_key(|&(i, _)| i);
        assert!(
            entries.windows(2).all(|p| p[0].0 != p[1].0),
            "duplicate feature in edge list"
        );
        assert!(
            entries.iter().all(|&(_, w)| w.is_finite() && w > 0.0),
            "edge weights must be finite and positive"
        );
        WeightedEdgeList { entries }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight(&self, feature: usize) -> f64 {
        self.entries
            .binary_search_by_key(&feature, |&(i, _)| i)
            .map_or(0.0, |p| self.entries[p].1)
    }

    /// Entries with feature words resolved against `space`.
    pub fn words<'a>(&self, space: &'a FeatureSpace) -> Vec<(&'a str, f64)> {
        self.iter()
            .map(|(i, w)| (space.vocabulary[i].as_str(), w))
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// Stable hash of indices and exact weight bits.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::default();
        for &(i, w) in &self.entries {
            h.write_u64(i as u64);
            h.write_u64(w.to_bits());
        }
        h.write_u64(u64::MAX);
        h.finish()
    }
}

/// Fingerprint of a whole sequence of edge lists.
pub fn fingerprint_all<'a>(lists: impl IntoIterator<Item = &'a WeightedEdgeList>) -> u64 {
    let mut h = Fnv64::default();
    for l in lists {
        h.write_u64(l.fingerprint());
    }
    h.finish()
}

struct Fnv64(u64);

impl Default for Fnv64 {
    fn default() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }
}

impl Hasher for Fnv64 {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

/// Edges from `instance` to every vocabulary feature with a nonzero weight.
pub fn vectorize(instance: &Instance, space: &FeatureSpace) -> WeightedEdgeList {
    let mut entries = Vec::new();
    match space.config {
        FeatureConfig::Topical { .. } => {
            let t = instance.target_index;
            let mut closest: HashMap<usize, usize> = HashMap::new();
            for (p, w) in feature_tokens(instance) {
                if let Some(i) = space.index_of(w) {
                    let delta = p.abs_diff(t) - 1;
                    closest
                        .entry(i)
                        .and_modify(|d| *d = (*d).min(delta))
                        .or_insert(delta);
                }
            }
            entries.extend(
                closest
                    .into_iter()
                    .map(|(i, delta)| (i, distance_weight(delta, instance.len()))),
            );
        }
        FeatureConfig::Local { omega } => {
            let mut tf: HashMap<usize, usize> = HashMap::new();
            for w in window_tokens(instance, omega) {
                if let Some(i) = space.index_of(w) {
                    *tf.entry(i).or_default() += 1;
                }
            }
            entries.extend(
                tf.into_iter()
                    .map(|(i, n)| (i, tfidf(n, space.n_train, space.df[i]))),
            );
        }
    }
    WeightedEdgeList::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(tokens: &[&str], target_index: usize) -> Instance {
        Instance::new("i", "tau", tokens, target_index, "s").unwrap()
    }

    fn corpus(contexts: &[(&[&str], usize)]) -> Corpus {
        let instances = contexts
            .iter()
            .enumerate()
            .map(|(k, (toks, t))| Instance::new(format!("i{k}"), "tau", toks, *t, "s").unwrap())
            .collect();
        Corpus::new("tau", instances, vec!["s".into()]).unwrap()
    }

    #[test]
    fn topical_space_takes_most_frequent() {
        let c = corpus(&[(&["a", "b", "a", "tau"], 3), (&["tau", "b", "c"], 0)]);
        let s = fit_topical_space(&c, 2).unwrap();
        assert_eq!(s.vocabulary(), ["a", "b"]);
        assert_eq!(s.n_train(), 2);
    }

    #[test]
    fn topical_ties_are_lexicographic() {
        let c = corpus(&[(&["z", "tau", "y", "x"], 1)]);
        assert_eq!(fit_topical_space(&c, 2).unwrap().vocabulary(), ["x", "y"]);
    }

    #[test]
    fn topical_space_saturates() {
        let c = corpus(&[(&["a", "tau", "b"], 1), (&["c", "tau"], 1)]);
        assert_eq!(
            fit_topical_space(&c, 100).unwrap().vocabulary(),
            ["a", "b", "c"]
        );
    }

    #[test]
    fn target_word_never_a_feature() {
        let c = corpus(&[(&["tau", "a", "tau", "tau"], 2)]);
        assert_eq!(fit_topical_space(&c, 10).unwrap().vocabulary(), ["a"]);
        assert_eq!(fit_local_space(&c, 3).unwrap().vocabulary(), ["a"]);
    }

    #[test]
    fn local_window_membership() {
        let ctx: &[&str] = &["p-3", "p-2", "p-1", "tau", "p+1", "p+2", "p+3"];
        let c = corpus(&[(ctx, 3)]);
        assert_eq!(fit_local_space(&c, 1).unwrap().vocabulary(), ["p+1", "p-1"]);
        assert_eq!(
            fit_local_space(&c, 2).unwrap().vocabulary(),
            ["p+1", "p+2", "p-1", "p-2"]
        );
        let edge = corpus(&[(&["tau", "r1", "r2"], 0)]);
        assert_eq!(fit_local_space(&edge, 1).unwrap().vocabulary(), ["r1"]);
    }

    #[test]
    fn local_df_counts_instances() {
        let c = corpus(&[
            (&["x", "tau", "x"], 1),
            (&["x", "tau", "y"], 1),
            (&["q", "q", "tau"], 2),
        ]);
        let s = fit_local_space(&c, 1).unwrap();
        assert_eq!(s.vocabulary(), ["q", "x", "y"]);
        assert_eq!(s.df_values(), [1, 2, 1]);
    }

    #[test]
    fn empty_corpus_rejected() {
        let c = Corpus::new("tau", vec![], vec!["s".into()]).unwrap();
        assert!(matches!(fit_topical_space(&c, 3), Err(Error::EmptyCorpus)));
        assert!(matches!(fit_local_space(&c, 3), Err(Error::EmptyCorpus)));
        assert!(fit_local_space(&corpus(&[(&["tau"], 0)]), 0).is_err());
    }

    #[test]
    fn topical_weight_examples() {
        // l = 10; feature adjacent, then two words in between.
        let adj = instance(&["f", "tau", "a", "b", "c", "d", "e", "g", "h", "i"], 1);
        assert_eq!(topical_weight(&adj, "f"), 1.0);
        let far = instance(&["tau", "a", "b", "f", "c", "d", "e", "g", "h", "i"], 0);
        assert_eq!(topical_weight(&far, "f"), 0.8);
        assert_eq!(topical_weight(&far, "zzz"), 0.0);
        assert_eq!(topical_weight(&far, "tau"), 0.0);
    }

    #[test]
    fn topical_weight_uses_closest_occurrence() {
        let i = instance(&["f", "a", "b", "tau", "c", "f"], 3);
        assert_eq!(topical_weight(&i, "f"), 1.0 - 1.0 / 6.0);
    }

    #[test]
    fn local_weight_examples() {
        // df = n_train for "x": idf ln 1 = 0.
        let c = corpus(&[(&["x", "tau"], 1), (&["tau", "x"], 0)]);
        let s = fit_local_space(&c, 1).unwrap();
        assert_eq!(local_weight(&c.instances()[0], "x", &s), 0.0);
        assert!(vectorize(&c.instances()[0], &s).is_empty());

        // tf = 2, n_train = 10, df = 2.
        let mut ctxs: Vec<(&[&str], usize)> = vec![(&["w", "w", "tau"], 2), (&["w", "tau"], 1)];
        for _ in 0..8 {
            ctxs.push((&["v", "tau"], 1));
        }
        let c = corpus(&ctxs);
        let s = fit_local_space(&c, 2).unwrap();
        assert_eq!(s.df("w"), Some(2));
        let w = local_weight(&c.instances()[0], "w", &s);
        assert_eq!(w, 2.0 * 5f64.ln());
        assert!((w - 3.2189).abs() < 1e-4);
        assert_eq!(local_weight(&c.instances()[0], "v", &s), 0.0);
        assert_eq!(local_weight(&c.instances()[0], "unknown", &s), 0.0);
    }

    #[test]
    fn vectorize_topical_example() {
        let c = corpus(&[(&["a", "b", "tau"], 2), (&["b", "tau"], 1)]);
        let s = fit_topical_space(&c, 2).unwrap();
        assert_eq!(s.vocabulary(), ["b", "a"]);
        let v = vectorize(&instance(&["a", "tau", "c"], 1), &s);
        assert_eq!(v.words(&s), [("a", 1.0)]);
        assert!(vectorize(&instance(&["tau", "q"], 0), &s).is_empty());
    }

    #[test]
    fn vectorize_local_example() {
        let c = corpus(&[(&["x", "tau", "zz"], 1), (&["y", "tau"], 1), (&["tau"], 0)]);
        let s = fit_local_space(&c, 1).unwrap();
        let v = vectorize(&instance(&["q", "x", "tau", "nope"], 2), &s);
        assert_eq!(
            v.words(&s),
            [("x", local_weight(&instance(&["x", "tau"], 1), "x", &s))]
        );
        assert_eq!(v.words(&s)[0].1, 3f64.ln());
    }

    #[test]
    fn edge_list_drops_zero_and_sorts() {
        let l = WeightedEdgeList::new(vec![(3, 0.5), (1, 0.0), (0, 2.0)]);
        assert_eq!(l.entries(), [(0, 2.0), (3, 0.5)]);
        assert_eq!(l.weight(3), 0.5);
        assert_eq!(l.weight(1), 0.0);
    }
}
