//! Lexical-sample corpora: loading, validation and context cleanup.
//!
//! A corpus holds every labeled occurrence of a single ambiguous target
//! word. Contexts arrive pre-tokenized; this module never splits raw text.
//!
//! The on-disk format is JSON lines, one record per occurrence:
//!
//! ```text
//! {"id": "interest.1", "target": "interest", "target_index": 4, "sense": "interest_6", "tokens": ["the", "rate", ...]}
//! ```

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../resources/stopwords_en.txt");

/// Characters beyond ASCII punctuation that count as punctuation.
const EXTRA_PUNCTUATION: &[char] = &[
    '\u{2018}', '\u{2019}', '\u{201C}', '\u{201D}', '\u{00AB}', '\u{00BB}', '\u{2013}', '\u{2014}',
    '\u{2026}', '\u{00A1}', '\u{00BF}', '\u{00B7}',
];

pub fn is_punctuation_char(c: char) -> bool {
    c.is_ascii_punctuation() || EXTRA_PUNCTUATION.contains(&c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    surface: String,
    is_punctuation: bool,
}

impl Token {
    /// Panics on an empty surface; use [`Instance::new`] for checked input.
    pub fn new(surface: impl Into<String>) -> Self {
        let surface = surface.into();
        assert!(!surface.is_empty(), "token surface must be non-empty");
        let is_punctuation = surface.chars().all(is_punctuation_char);
        Token {
            surface,
            is_punctuation,
        }
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn is_punctuation(&self) -> bool {
        self.is_punctuation
    }
}

/// One labeled occurrence of the target word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    pub target_lemma: String,
    pub context: Vec<Token>,
    pub target_index: usize,
    pub sense: String,
}

impl Instance {
    pub fn new<S: AsRef<str>>(
        id: impl Into<String>,
        target_lemma: impl Into<String>,
        tokens: &[S],
        target_index: usize,
        sense: impl Into<String>,
    ) -> Result<Self> {
        let id = id.into();
        if tokens.is_empty() {
            return Err(Error::Validation(format!(
                "instance `{id}` has an empty context"
            )));
        }
        if target_index >= tokens.len() {
            return Err(Error::Validation(format!(
                "instance `{id}`: target_index {target_index} out of range for {} tokens",
                tokens.len()
            )));
        }
        if let Some(pos) = tokens.iter().position(|t| t.as_ref().is_empty()) {
            return Err(Error::Validation(format!(
                "instance `{id}`: empty token at position {pos}"
            )));
        }
        Ok(Instance {
            id,
            target_lemma: target_lemma.into(),
            context: tokens.iter().map(|t| Token::new(t.as_ref())).collect(),
            target_index,
            sense: sense.into(),
        })
    }

    pub fn target(&self) -> &Token {
        &self.context[self.target_index]
    }

    pub fn len(&self) -> usize {
        self.context.len()
    }

    pub fn is_empty(&self) -> bool {
        self.context.is_empty()
    }

    /// True when `word` is the target itself: either the surface at the
    /// target position or the target lemma. Such words never become
    /// features.
    pub fn is_target_word(&self, word: &str) -> bool {
        word.eq_ignore_ascii_case(self.target().surface())
            || word.eq_ignore_ascii_case(&self.target_lemma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
}

/// All labeled occurrences of one target word.
#[derive(Debug, Clone)]
pub struct Corpus {
    target_lemma: String,
    instances: Vec<Instance>,
    sense_inventory: Vec<String>,
    stopwords: HashSet<String>,
}

impl Corpus {
    /// Builds a corpus from already-validated instances. The sense inventory
    /// fixes the class order used everywhere downstream.
    pub fn new(
        target_lemma: impl Into<String>,
        instances: Vec<Instance>,
        sense_inventory: Vec<String>,
    ) -> Result<Self> {
        let target_lemma = target_lemma.into();
        if sense_inventory.is_empty() {
            return Err(Error::Validation("sense inventory is empty".into()));
        }
        let mut seen = HashSet::new();
        for s in &sense_inventory {
            if !seen.insert(s.as_str()) {
                return Err(Error::Validation(format!(
                    "sense `{s}` listed twice in inventory"
                )));
            }
        }
        let mut ids = HashSet::new();
        for inst in &instances {
            if !ids.insert(inst.id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate instance id `{}`",
                    inst.id
                )));
            }
            if !seen.contains(inst.sense.as_str()) {
                return Err(Error::Validation(format!(
                    "instance `{}` has sense `{}` outside the inventory",
                    inst.id, inst.sense
                )));
            }
            if inst.target_lemma != target_lemma {
                return Err(Error::Validation(format!(
                    "instance `{}` targets `{}`, corpus targets `{}`",
                    inst.id, inst.target_lemma, target_lemma
                )));
            }
        }
        Ok(Corpus {
            target_lemma,
            instances,
            sense_inventory,
            stopwords: default_stopwords(),
        })
    }

    pub fn target_lemma(&self) -> &str {
        &self.target_lemma
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn sense_inventory(&self) -> &[String] {
        &self.sense_inventory
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    pub fn with_stopwords(mut self, stopwords: HashSet<String>) -> Self {
        self.stopwords = stopwords.into_iter().map(|w| w.to_lowercase()).collect();
        self
    }

    pub fn class_index(&self, sense: &str) -> Option<usize> {
        self.sense_inventory.iter().position(|s| s == sense)
    }

    /// Class index of every instance, in corpus order.
    pub fn labels(&self) -> Vec<usize> {
        let index: HashMap<&str, usize> = self
            .sense_inventory
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        self.instances
            .iter()
            .map(|inst| index[inst.sense.as_str()])
            .collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.sense_inventory.len()];
        for l in self.labels() {
            counts[l] += 1;
        }
        counts
    }

    /// The corpus restricted to the given instance positions, keeping the
    /// sense inventory and stopwords.
    pub fn subset(&self, positions: &[usize]) -> Corpus {
        Corpus {
            target_lemma: self.target_lemma.clone(),
            instances: positions
                .iter()
                .map(|&p| self.instances[p].clone())
                .collect(),
            sense_inventory: self.sense_inventory.clone(),
            stopwords: self.stopwords.clone(),
        }
    }

    /// Applies [`preprocess`] with this corpus's stopwords to every instance.
    pub fn preprocessed(&self) -> Corpus {
        Corpus {
            target_lemma: self.target_lemma.clone(),
            instances: self
                .instances
                .iter()
                .map(|i| preprocess(i, &self.stopwords))
                .collect(),
            sense_inventory: self.sense_inventory.clone(),
            stopwords: self.stopwords.clone(),
        }
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for inst in &self.instances {
            let rec = Record {
                id: &inst.id,
                target: &inst.target_lemma,
                target_index: inst.target_index,
                sense: &inst.sense,
                tokens: inst.context.iter().map(Token::surface).collect(),
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Serialize)]
struct Record<'a> {
    id: &'a str,
    target: &'a str,
    target_index: usize,
    sense: &'a str,
    tokens: Vec<&'a str>,
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<String>,
    target: Option<String>,
    target_index: Option<usize>,
    sense: Option<String>,
    tokens: Option<Vec<String>>,
}

/// Loads and validates a corpus. The sense inventory is ordered by first
/// appearance in the file; the default English stopword list is attached.
pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    match format {
        CorpusFormat::Jsonl => read_jsonl(BufReader::new(file), path),
    }
}

fn read_jsonl(reader: impl BufRead, path: &Path) -> Result<Corpus> {
    let mut instances = Vec::new();
    let mut inventory: Vec<String> = Vec::new();
    let mut target: Option<String> = None;

    for (n, line) in reader.lines().enumerate() {
        let line_no = n + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Format {
            line: line_no,
            message: e.to_string(),
        })?;
        let missing =
            |field: &str| Error::Validation(format!("line {line_no}: missing field `{field}`"));
        let id = raw.id.ok_or_else(|| missing("id"))?;
        let rec_target = raw.target.ok_or_else(|| missing("target"))?;
        let target_index = raw.target_index.ok_or_else(|| missing("target_index"))?;
        let sense = raw.sense.ok_or_else(|| missing("sense"))?;
        let tokens = raw.tokens.ok_or_else(|| missing("tokens"))?;

        match &target {
            None => target = Some(rec_target.clone()),
            Some(t) if *t != rec_target => {
                return Err(Error::Validation(format!(
                    "line {line_no}: target `{rec_target}` differs from `{t}`; one target word per corpus"
                )))
            }
            Some(_) => {}
        }
        if !inventory.contains(&sense) {
            inventory.push(sense.clone());
        }
        let inst = Instance::new(id, rec_target, &tokens, target_index, sense)
            .map_err(|e| Error::Validation(format!("line {line_no}: {e}")))?;
        instances.push(inst);
    }

    let target = target.ok_or(Error::EmptyCorpus)?;
    if inventory.len() < 2 {
        return Err(Error::Validation(format!(
            "corpus declares {} sense(s); at least 2 are required",
            inventory.len()
        )));
    }
    Corpus::new(target, instances, inventory)
}

pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(DEFAULT_STOPWORDS)
}

/// Reads a stopword list: one word per line, blank lines and `#` comments
/// ignored.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Drops punctuation and stopwords from the context, lowercases what
/// remains and remaps `target_index`. The target token always survives.
pub fn preprocess(instance: &Instance, stopwords: &HashSet<String>) -> Instance {
    let mut context = Vec::with_capacity(instance.context.len());
    let mut target_index = 0;
    for (pos, tok) in instance.context.iter().enumerate() {
        let lower = tok.surface().to_lowercase();
        if pos == instance.target_index {
            target_index = context.len();
        } else if tok.is_punctuation() || stopwords.contains(&lower) {
            continue;
        }
        context.push(Token::new(lower));
    }
    Instance {
        id: instance.id.clone(),
        target_lemma: instance.target_lemma.clone(),
        context,
        target_index,
        sense: instance.sense.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn inst(tokens: &[&str], target_index: usize) -> Instance {
        Instance::new("x", "t", tokens, target_index, "s").unwrap()
    }

    fn words(i: &Instance) -> Vec<&str> {
        i.context.iter().map(Token::surface).collect()
    }

    fn stop(ws: &[&str]) -> HashSet<String> {
        ws.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn preprocess_drops_stopwords_and_punctuation() {
        let out = preprocess(&inst(&["The", "hard", "truth", "."], 1), &stop(&["the"]));
        assert_eq!(words(&out), ["hard", "truth"]);
        assert_eq!(out.target_index, 0);

        let out = preprocess(
            &inst(&["a", "line", "of", ",", "credit"], 1),
            &stop(&["a", "of"]),
        );
        assert_eq!(words(&out), ["line", "credit"]);
        assert_eq!(out.target_index, 0);
    }

    #[test]
    fn preprocess_only_lowercases_clean_context() {
        let out = preprocess(&inst(&["Rising", "Interest", "Rates"], 1), &stop(&["the"]));
        assert_eq!(words(&out), ["rising", "interest", "rates"]);
        assert_eq!(out.target_index, 1);
    }

    #[test]
    fn preprocess_keeps_target_even_if_stopword() {
        let out = preprocess(&inst(&["over", "the", "line"], 1), &stop(&["the", "over"]));
        assert_eq!(words(&out), ["the", "line"]);
        assert_eq!(out.target_index, 0);
    }

    #[test]
    fn punctuation_class() {
        assert!(Token::new(",").is_punctuation());
        assert!(Token::new("``").is_punctuation());
        assert!(Token::new("\u{2014}").is_punctuation());
        assert!(!Token::new("U.S.").is_punctuation());
        assert!(!Token::new("3").is_punctuation());
    }

    #[test]
    fn instance_validation() {
        assert!(Instance::new("a", "t", &["x"], 1, "s").is_err());
        assert!(Instance::new::<&str>("a", "t", &[], 0, "s").is_err());
        assert!(Instance::new("a", "t", &["x", ""], 0, "s").is_err());
    }

    fn read(text: &str) -> Result<Corpus> {
        read_jsonl(Cursor::new(text), Path::new("<mem>"))
    }

    #[test]
    fn loads_small_file() {
        let c = read(concat!(
            r#"{"id":"1","target":"line","target_index":0,"sense":"cord","tokens":["line","rope"]}"#,
            "\n",
            r#"{"id":"2","target":"line","target_index":1,"sense":"text","tokens":["a","line"]}"#,
            "\n\n",
            r#"{"id":"3","target":"line","target_index":0,"sense":"cord","tokens":["line"]}"#,
        ))
        .unwrap();
        assert_eq!(c.len(), 3);
        assert_eq!(c.sense_inventory(), ["cord", "text"]);
        assert_eq!(c.labels(), [0, 1, 0]);
        assert_eq!(c.class_counts(), [2, 1]);
    }

    #[test]
    fn rejects_duplicate_ids() {
        let err = read(concat!(
            r#"{"id":"1","target":"line","target_index":0,"sense":"a","tokens":["line"]}"#,
            "\n",
            r#"{"id":"1","target":"line","target_index":0,"sense":"b","tokens":["line"]}"#,
        ))
        .unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
    }

    #[test]
    fn parse_error_reports_line() {
        let err = read(concat!(
            r#"{"id":"1","target":"line","target_index":0,"sense":"a","tokens":["line"]}"#,
            "\n{not json\n",
        ))
        .unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn missing_field_is_validation_error() {
        let err =
            read(r#"{"id":"1","target":"line","target_index":0,"tokens":["line"]}"#).unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref m) if m.contains("sense")),
            "{err:?}"
        );
    }

    #[test]
    fn rejects_single_sense_and_mixed_targets() {
        let one =
            read(r#"{"id":"1","target":"line","target_index":0,"sense":"a","tokens":["line"]}"#);
        assert!(one.is_err());
        let mixed = read(concat!(
            r#"{"id":"1","target":"line","target_index":0,"sense":"a","tokens":["line"]}"#,
            "\n",
            r#"{"id":"2","target":"hard","target_index":0,"sense":"b","tokens":["hard"]}"#,
        ));
        assert!(mixed.is_err());
        assert!(matches!(read(""), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn default_stopwords_exclude_target_words() {
        let sw = default_stopwords();
        assert!(sw.contains("the"));
        for w in ["interest", "line", "serve", "hard"] {
            assert!(!sw.contains(w));
        }
    }
}
