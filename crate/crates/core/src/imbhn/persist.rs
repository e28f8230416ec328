//! Flat text serialization of [`TrainedModel`].
//!
//! ```text
//! imbhn-model 1
//! target "interest"
//! config eta=0.1 epsilon_min=0.01 max_iters=1000 init=prior seed=7
//! features local 3 2131            # kind, |T| or ω, n_train
//! training iterations=41 converged=true majority=0
//! history 41 0.52 0.31 ...
//! classes 6
//! "interest_1"                     # one JSON string per line
//! vocabulary 5120
//! "rate" 311                       # JSON string, then df (or - for topical)
//! relevance 5120 6
//! 0.125 -0.25 ...                  # one row per vocabulary entry
//! end
//! ```
//!
//! Floats use Rust's shortest round-trip representation, so relevance
//! values survive a save/load cycle bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{InitStrategy, TrainConfig, TrainedModel};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureSpace};
use crate::matrix::Matrix;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "imbhn-model";

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_model(model, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_model(model: &TrainedModel, out: &mut impl Write) -> std::io::Result<()> {
    let q = |s: &str| serde_json::to_string(s).expect("strings always serialize");
    let cfg = &model.config;
    writeln!(out, "{MAGIC} {MODEL_FORMAT_VERSION}")?;
    writeln!(out, "target {}", q(&model.target_lemma))?;
    writeln!(
        out,
        "config eta={:?} epsilon_min={:?} max_iters={} init={} seed={}",
        cfg.eta, cfg.epsilon_min, cfg.max_iters, cfg.init, cfg.rng_seed
    )?;
    let (kind, param) = match model.space.config() {
        FeatureConfig::Topical { num_topics } => ("topical", num_topics),
        FeatureConfig::Local { omega } => ("local", omega),
    };
    writeln!(out, "features {kind} {param} {}", model.space.n_train())?;
    writeln!(
        out,
        "training iterations={} converged={} majority={}",
        model.iterations_run, model.converged, model.majority_class
    )?;
    write!(out, "history {}", model.history.len())?;
    for h in &model.history {
        write!(out, " {h:?}")?;
    }
    writeln!(out)?;
    writeln!(out, "classes {}", model.classes.len())?;
    for c in &model.classes {
        writeln!(out, "{}", q(c))?;
    }
    writeln!(out, "vocabulary {}", model.space.len())?;
    let df = model.space.df_values();
    for (i, w) in model.space.vocabulary().iter().enumerate() {
        match df.get(i) {
            Some(d) => writeln!(out, "{} {d}", q(w))?,
            None => writeln!(out, "{} -", q(w))?,
        }
    }
    let f = &model.relevance;
    writeln!(out, "relevance {} {}", f.rows(), f.cols())?;
    for i in 0..f.rows() {
        let row: Vec<String> = f.row(i).iter().map(|v| format!("{v:?}")).collect();
        writeln!(out, "{}", row.join(" "))?;
    }
    writeln!(out, "end")
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(file))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(self.err(e.to_string())),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Format {
            line: self.line,
            message: message.into(),
        }
    }

    /// Next line, which must start with `key`; returns the remainder.
    fn keyed(&mut self, key: &str) -> Result<String> {
        let l = self.next()?;
        match l.split_once(' ') {
            Some((k, rest)) if k == key => Ok(rest.to_string()),
            _ if l == key => Ok(String::new()),
            _ => Err(self.err(format!("expected `{key}`"))),
        }
    }

    fn parse<T: std::str::FromStr>(&self, s: &str, what: &str) -> Result<T> {
        s.parse()
            .map_err(|_| self.err(format!("bad {what}: `{s}`")))
    }

    fn string(&self, s: &str) -> Result<String> {
        serde_json::from_str(s).map_err(|e| self.err(format!("bad string {s}: {e}")))
    }

    /// Parses `k1=v1 k2=v2 ...` in the given key order.
    fn fields<'a>(&self, s: &'a str, keys: &[&str]) -> Result<Vec<&'a str>> {
        let parts: Vec<&str> = s.split(' ').collect();
        if parts.len() != keys.len() {
            return Err(self.err(format!("expected {} fields", keys.len())));
        }
        parts
            .iter()
            .zip(keys)
            .map(|(p, k)| match p.split_once('=') {
                Some((pk, v)) if pk == *k => Ok(v),
                _ => Err(self.err(format!("expected field `{k}`"))),
            })
            .collect()
    }
}

pub fn read_model(reader: impl BufRead) -> Result<TrainedModel> {
    let mut r = Lines {
        inner: reader.lines(),
        line: 0,
    };

    let header = r.keyed(MAGIC)?;
    let version: u32 = r.parse(&header, "version")?;
    if version != MODEL_FORMAT_VERSION {
        return Err(r.err(format!("unsupported model version {version}")));
    }

    let target_lemma = {
        let s = r.keyed("target")?;
        r.string(&s)?
    };

    let config = {
        let s = r.keyed("config")?;
        let v = r.fields(&s, &["eta", "epsilon_min", "max_iters", "init", "seed"])?;
        let init: InitStrategy = v[3]
            .parse()
            .map_err(|_| r.err(format!("bad init `{}`", v[3])))?;
        TrainConfig {
            eta: r.parse(v[0], "eta")?,
            epsilon_min: r.parse(v[1], "epsilon_min")?,
            max_iters: r.parse(v[2], "max_iters")?,
            init,
            rng_seed: r.parse(v[4], "seed")?,
        }
    };
    config.validate().map_err(|e| r.err(e.to_string()))?;

    let (feature_config, n_train) = {
        let s = r.keyed("features")?;
        let parts: Vec<&str> = s.split(' ').collect();
        if parts.len() != 3 {
            return Err(r.err("expected `features <kind> <param> <n_train>`"));
        }
        let param: usize = r.parse(parts[1], "feature parameter")?;
        let cfg = match parts[0] {
            "topical" => FeatureConfig::Topical { num_topics: param },
            "local" => FeatureConfig::Local { omega: param },
            other => return Err(r.err(format!("unknown feature kind `{other}`"))),
        };
        (cfg, r.parse::<usize>(parts[2], "n_train")?)
    };

    let (iterations_run, converged, majority_class) = {
        let s = r.keyed("training")?;
        let v = r.fields(&s, &["iterations", "converged", "majority"])?;
        (
            r.parse::<usize>(v[0], "iterations")?,
            r.parse::<bool>(v[1], "converged")?,
            r.parse::<usize>(v[2], "majority")?,
        )
    };

    let history = {
        let s = r.keyed("history")?;
        let mut parts = s.split(' ');
        let n: usize = r.parse(parts.next().unwrap_or(""), "history length")?;
        let h = parts
            .map(|p| r.parse::<f64>(p, "history value"))
            .collect::<Result<Vec<_>>>()?;
        if h.len() != n || n != iterations_run {
            return Err(r.err("history length mismatch"));
        }
        h
    };

    let n_classes: usize = {
        let s = r.keyed("classes")?;
        r.parse(&s, "class count")?
    };
    let mut classes = Vec::with_capacity(n_classes);
    for _ in 0..n_classes {
        let l = r.next()?;
        classes.push(r.string(&l)?);
    }
    if majority_class >= n_classes {
        return Err(r.err("majority class out of range"));
    }

    let n_vocab: usize = {
        let s = r.keyed("vocabulary")?;
        r.parse(&s, "vocabulary size")?
    };
    let mut vocabulary = Vec::with_capacity(n_vocab);
    let mut df = Vec::new();
    for _ in 0..n_vocab {
        let l = r.next()?;
        let (word, d) = l
            .rsplit_once(' ')
            .ok_or_else(|| r.err("expected `<word> <df>`"))?;
        vocabulary.push(r.string(word)?);
        if d != "-" {
            df.push(r.parse::<usize>(d, "df")?);
        }
    }
    let space = FeatureSpace::from_parts(feature_config, vocabulary, df, n_train)
        .map_err(|e| r.err(e.to_string()))?;

    let relevance = {
        let s = r.keyed("relevance")?;
        let (a, b) = s
            .split_once(' ')
            .ok_or_else(|| r.err("expected `relevance <rows> <cols>`"))?;
        let (rows, cols): (usize, usize) = (r.parse(a, "rows")?, r.parse(b, "cols")?);
        if rows != n_vocab || cols != n_classes {
            return Err(r.err("relevance shape does not match vocabulary and classes"));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let l = r.next()?;
            let row = if l.is_empty() {
                Vec::new()
            } else {
                l.split(' ')
                    .map(|p| r.parse::<f64>(p, "relevance value"))
                    .collect::<Result<Vec<_>>>()?
            };
            if row.len() != cols {
                return Err(r.err(format!("expected {cols} values")));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(r.err("non-finite relevance value"));
            }
            data.extend(row);
        }
        Matrix::from_vec(rows, cols, data)
    };

    if r.next()? != "end" {
        return Err(r.err("expected `end`"));
    }

    Ok(TrainedModel {
        target_lemma,
        relevance,
        space,
        classes,
        history,
        iterations_run,
        converged,
        config,
        majority_class,
    })
}
