//! Labeled post collections.
//!
//! Datasets are tab-separated files with a header row naming the columns `id`, `tweet`
//! (or `headline` for flattened auxiliary news sets) and optionally `label`. Rows are
//! LF-terminated; a trailing CR is tolerated on read and never written.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Fake,
    Real,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Fake => "fake",
            Label::Real => "real",
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Fake => Label::Real,
            Label::Real => Label::Fake,
        }
    }

    /// +1 for the positive (fake) class, -1 otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Label::Fake => 1.0,
            Label::Real => -1.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown label {0:?} (expected \"fake\" or \"real\")")]
pub struct ParseLabelError(pub String);

impl FromStr for Label {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("fake") {
            Ok(Label::Fake)
        } else if t.eq_ignore_ascii_case("real") {
            Ok(Label::Real)
        } else {
            Err(ParseLabelError(s.to_string()))
        }
    }
}

/// Where a post came from. Auxiliary sources prefix their ids when merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Task,
    Coaid,
    Fakecovid,
}

impl Source {
    pub fn tag(self) -> &'static str {
        match self {
            Source::Task => "task",
            Source::Coaid => "coaid",
            Source::Fakecovid => "fakecovid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Post {
    pub id: String,
    pub text: String,
    pub label: Option<Label>,
    pub source: Source,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: missing header row")]
    MissingHeader { path: PathBuf },
    #[error("{path}: header lacks required column {column:?}")]
    MissingColumn { path: PathBuf, column: &'static str },
    #[error("row {row}: expected {expected} columns, found {found}")]
    ColumnCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: duplicate id {id:?}")]
    DuplicateId { row: usize, id: String },
    #[error("row {row}: {source}")]
    BadLabel {
        row: usize,
        #[source]
        source: ParseLabelError,
    },
    #[error("row {row}: empty text")]
    EmptyText { row: usize },
    #[error("row {row}: empty id")]
    EmptyId { row: usize },
    #[error("duplicate id {0:?}")]
    Duplicate(String),
    #[error("post {id:?}: text contains a tab or line break and cannot be written as TSV")]
    Unwritable { id: String },
    #[error("cannot write a corpus that mixes labeled and unlabeled posts (first unlabeled: {id:?})")]
    MixedLabels { id: String },
    #[error("auxiliary post {id:?} carries no label")]
    UnlabeledAuxiliary { id: String },
    #[error("id collision after prefixing auxiliary id: {0:?}")]
    Collision(String),
    #[error("hold-out size {n} must be smaller than the pool size {pool}")]
    HoldoutTooLarge { n: usize, pool: usize },
    #[error("split_holdout needs a hold-out split spec, got the official split")]
    NotHoldout,
}

/// An ordered, id-unique sequence of posts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub name: String,
    posts: Vec<Post>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate ids and empty texts.
    pub fn new(name: impl Into<String>, posts: Vec<Post>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(posts.len());
        for (i, p) in posts.iter().enumerate() {
            if p.text.trim().is_empty() {
                return Err(CorpusError::EmptyText { row: i + 1 });
            }
            if !seen.insert(p.id.as_str()) {
                return Err(CorpusError::Duplicate(p.id.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            posts,
        })
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Post> {
        self.posts.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Post> {
        self.posts.iter().find(|p| p.id == id)
    }

    /// Gold labels in corpus order, or the id of the first unlabeled post.
    pub fn labels(&self) -> Result<Vec<Label>, String> {
        self.posts
            .iter()
            .map(|p| p.label.ok_or_else(|| p.id.clone()))
            .collect()
    }

    pub fn is_labeled(&self) -> bool {
        self.posts.iter().all(|p| p.label.is_some())
    }

    /// Same ids and labels, text rewritten by `f`.
    pub fn map_text(&self, mut f: impl FnMut(&str) -> String) -> Corpus {
        let posts = self
            .posts
            .iter()
            .map(|p| Post {
                text: f(&p.text),
                ..p.clone()
            })
            .collect();
        Corpus {
            name: self.name.clone(),
            posts,
        }
    }

    /// Concatenates two corpora that are already known to have disjoint ids.
    pub fn concat(name: impl Into<String>, a: &Corpus, b: &Corpus) -> Result<Corpus, CorpusError> {
        let mut posts = a.posts.clone();
        posts.extend(b.posts.iter().cloned());
        Corpus::new(name, posts)
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Post;
    type IntoIter = std::slice::Iter<'a, Post>;

    fn into_iter(self) -> Self::IntoIter {
        self.posts.iter()
    }
}

/// How labeled data is divided into a training pool and a model-selection set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitSpec {
    /// Use the train and validation files as given.
    Official,
    /// Pool train and validation, then hold out `n` posts chosen with `seed`.
    Holdout { n: usize, seed: u64 },
}

/// Reads a dataset TSV. Posts get [`Source::Task`].
pub fn load_dataset(path: impl AsRef<Path>, expect_labels: bool) -> Result<Corpus, CorpusError> {
    load_with_source(path, expect_labels, Source::Task)
}

/// Reads a flattened auxiliary TSV (`id`, `headline` or `tweet`, `label`).
pub fn load_auxiliary(path: impl AsRef<Path>, source: Source) -> Result<Corpus, CorpusError> {
    load_with_source(path, true, source)
}

fn load_with_source(
    path: impl AsRef<Path>,
    expect_labels: bool,
    source: Source,
) -> Result<Corpus, CorpusError> {
    let path = path.as_ref();
    let raw = fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_dataset(&raw, expect_labels, source, name).map_err(|e| match e {
        CorpusError::MissingHeader { .. } => CorpusError::MissingHeader {
            path: path.to_path_buf(),
        },
        CorpusError::MissingColumn { column, .. } => CorpusError::MissingColumn {
            path: path.to_path_buf(),
            column,
        },
        other => other,
    })
}

/// Parses dataset TSV text. Row numbers in errors are 1-based file line numbers.
pub fn parse_dataset(
    raw: &str,
    expect_labels: bool,
    source: Source,
    name: impl Into<String>,
) -> Result<Corpus, CorpusError> {
    let mut lines = raw.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = lines
        .next()
        .filter(|h| !h.trim().is_empty())
        .ok_or(CorpusError::MissingHeader {
            path: PathBuf::new(),
        })?;
    let cols: Vec<&str> = header.split('\t').map(str::trim).collect();
    let find = |names: &[&str]| {
        cols.iter()
            .position(|c| names.iter().any(|n| c.eq_ignore_ascii_case(n)))
    };
    let id_col = find(&["id"]).ok_or(CorpusError::MissingColumn {
        path: PathBuf::new(),
        column: "id",
    })?;
    let text_col = find(&["tweet", "headline"]).ok_or(CorpusError::MissingColumn {
        path: PathBuf::new(),
        column: "tweet",
    })?;
    let label_col = find(&["label"]);
    if expect_labels && label_col.is_none() {
        return Err(CorpusError::MissingColumn {
            path: PathBuf::new(),
            column: "label",
        });
    }

    let mut posts = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != cols.len() {
            return Err(CorpusError::ColumnCount {
                row,
                expected: cols.len(),
                found: fields.len(),
            });
        }
        let id = fields[id_col].trim();
        if id.is_empty() {
            return Err(CorpusError::EmptyId { row });
        }
        let text = fields[text_col];
        if text.trim().is_empty() {
            return Err(CorpusError::EmptyText { row });
        }
        let label = match label_col {
            Some(c) => Some(
                fields[c]
                    .parse::<Label>()
                    .map_err(|source| CorpusError::BadLabel { row, source })?,
            ),
            None => None,
        };
        if !seen.insert(id.to_string()) {
            return Err(CorpusError::DuplicateId {
                row,
                id: id.to_string(),
            });
        }
        posts.push(Post {
            id: id.to_string(),
            text: text.to_string(),
            label,
            source,
        });
    }
    Ok(Corpus {
        name: name.into(),
        posts,
    })
}

/// Renders a corpus in the dataset TSV format. The label column is written only when
/// every post is labeled.
pub fn render_corpus(corpus: &Corpus) -> Result<String, CorpusError> {
    let labeled = corpus.posts.iter().any(|p| p.label.is_some());
    if labeled {
        if let Some(p) = corpus.posts.iter().find(|p| p.label.is_none()) {
            return Err(CorpusError::MixedLabels { id: p.id.clone() });
        }
    }
    let mut out = String::from(if labeled { "id\ttweet\tlabel\n" } else { "id\ttweet\n" });
    for p in &corpus.posts {
        if p.text.contains(['\t', '\n', '\r']) || p.id.contains(['\t', '\n', '\r']) {
            return Err(CorpusError::Unwritable { id: p.id.clone() });
        }
        out.push_str(&p.id);
        out.push('\t');
        out.push_str(&p.text);
        if let Some(l) = p.label {
            out.push('\t');
            out.push_str(l.as_str());
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let body = render_corpus(corpus)?;
    fs::write(path, body).map_err(|e| CorpusError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Appends labeled auxiliary posts to `base`, prefixing their ids with the source tag
/// (`coaid:7`) so they cannot shadow task ids.
pub fn merge_auxiliary(base: &Corpus, extra: &Corpus) -> Result<Corpus, CorpusError> {
    let mut seen: HashSet<&str> = base.posts.iter().map(|p| p.id.as_str()).collect();
    let mut prefixed = Vec::with_capacity(extra.len());
    for p in &extra.posts {
        if p.label.is_none() {
            return Err(CorpusError::UnlabeledAuxiliary { id: p.id.clone() });
        }
        let prefix = format!("{}:", p.source.tag());
        let id = if p.id.starts_with(&prefix) {
            p.id.clone()
        } else {
            format!("{prefix}{}", p.id)
        };
        prefixed.push(Post { id, ..p.clone() });
    }
    for p in &prefixed {
        if !seen.insert(p.id.as_str()) {
            return Err(CorpusError::Collision(p.id.clone()));
        }
    }
    let mut posts = base.posts.clone();
    posts.extend(prefixed);
    Ok(Corpus {
        name: base.name.clone(),
        posts,
    })
}

/// Holds out `n` posts picked by a seeded Fisher-Yates shuffle of the index order.
/// Both halves keep the pool's relative order.
pub fn split_holdout(pool: &Corpus, spec: SplitSpec) -> Result<(Corpus, Corpus), CorpusError> {
    let SplitSpec::Holdout { n, seed } = spec else {
        return Err(CorpusError::NotHoldout);
    };
    if n > 0 && n >= pool.len() {
        return Err(CorpusError::HoldoutTooLarge {
            n,
            pool: pool.len(),
        });
    }
    let order = rng::permutation(pool.len(), seed);
    let mut held = vec![false; pool.len()];
    for &i in &order[..n] {
        held[i] = true;
    }
    let (mut train, mut holdout) = (Vec::new(), Vec::new());
    for (p, h) in pool.posts.iter().zip(held) {
        if h {
            holdout.push(p.clone());
        } else {
            train.push(p.clone());
        }
    }
    Ok((
        Corpus {
            name: format!("{}-train", pool.name),
            posts: train,
        },
        Corpus {
            name: format!("{}-holdout", pool.name),
            posts: holdout,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post(id: &str, text: &str, label: Option<Label>) -> Post {
        Post {
            id: id.into(),
            text: text.into(),
            label,
            source: Source::Task,
        }
    }

    #[test]
    fn label_parsing_is_case_insensitive() {
        assert_eq!("FAKE".parse::<Label>().unwrap(), Label::Fake);
        assert_eq!("Real".parse::<Label>().unwrap(), Label::Real);
        assert!("satire".parse::<Label>().is_err());
        assert_eq!(serde_json::to_string(&Label::Fake).unwrap(), "\"fake\"");
    }

    #[test]
    fn parses_table_row() {
        let raw = "id\ttweet\tlabel\n1\tThe CDC currently reports 99031 deaths. In general the discrepancies in death counts between different sources are small and explicable.\treal\n";
        let c = parse_dataset(raw, true, Source::Task, "t").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.posts()[0].id, "1");
        assert_eq!(c.posts()[0].label, Some(Label::Real));
        assert!(c.posts()[0].text.starts_with("The CDC currently reports 99031 deaths"));
    }

    #[test]
    fn header_only_is_empty() {
        let c = parse_dataset("id\ttweet\tlabel\n", true, Source::Task, "t").unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn crlf_and_column_order_are_tolerated() {
        let raw = "label\tid\ttweet\r\nfake\t9\thello world\r\n";
        let c = parse_dataset(raw, true, Source::Task, "t").unwrap();
        assert_eq!(c.posts()[0], post("9", "hello world", Some(Label::Fake)));
    }

    #[test]
    fn row_errors_carry_row_numbers() {
        let bad_cols = "id\ttweet\tlabel\n1\tok\treal\n2\tmissing label\n";
        assert!(matches!(
            parse_dataset(bad_cols, true, Source::Task, "t"),
            Err(CorpusError::ColumnCount { row: 3, expected: 3, found: 2 })
        ));
        let dup = "id\ttweet\tlabel\n1\ta\treal\n1\tb\tfake\n";
        assert!(matches!(
            parse_dataset(dup, true, Source::Task, "t"),
            Err(CorpusError::DuplicateId { row: 3, .. })
        ));
        let unknown = "id\ttweet\tlabel\n1\ta\tsatire\n";
        assert!(matches!(
            parse_dataset(unknown, true, Source::Task, "t"),
            Err(CorpusError::BadLabel { row: 2, .. })
        ));
        let empty = "id\ttweet\tlabel\n1\t   \treal\n";
        assert!(matches!(
            parse_dataset(empty, true, Source::Task, "t"),
            Err(CorpusError::EmptyText { row: 2 })
        ));
    }

    #[test]
    fn unlabeled_input_needs_no_label_column() {
        let raw = "id\ttweet\n5\tsomething\n";
        let c = parse_dataset(raw, false, Source::Task, "t").unwrap();
        assert_eq!(c.posts()[0].label, None);
        assert!(matches!(
            parse_dataset(raw, true, Source::Task, "t"),
            Err(CorpusError::MissingColumn { column: "label", .. })
        ));
    }

    #[test]
    fn missing_file_is_reported() {
        assert!(matches!(
            load_dataset("/definitely/not/here.tsv", true),
            Err(CorpusError::Io { .. })
        ));
    }

    #[test]
    fn merge_prefixes_colliding_ids() {
        let base = Corpus::new("b", vec![post("7", "base post", Some(Label::Real))]).unwrap();
        let extra = Corpus::new(
            "x",
            vec![Post {
                source: Source::Coaid,
                ..post("7", "headline", Some(Label::Fake))
            }],
        )
        .unwrap();
        let merged = merge_auxiliary(&base, &extra).unwrap();
        let ids: Vec<_> = merged.iter().map(|p| p.id.as_str()).collect();
        assert_eq!(ids, ["7", "coaid:7"]);
    }

    #[test]
    fn merge_with_empty_extra_is_identity() {
        let base = Corpus::new("b", vec![post("1", "a", Some(Label::Real))]).unwrap();
        let merged = merge_auxiliary(&base, &Corpus::default()).unwrap();
        assert_eq!(merged, base);
    }

    #[test]
    fn merge_rejects_unlabeled_and_collisions() {
        let base = Corpus::new("b", vec![post("coaid:1", "a", Some(Label::Real))]).unwrap();
        let unlabeled = Corpus::new(
            "x",
            vec![Post {
                source: Source::Coaid,
                ..post("2", "h", None)
            }],
        )
        .unwrap();
        assert!(matches!(
            merge_auxiliary(&base, &unlabeled),
            Err(CorpusError::UnlabeledAuxiliary { .. })
        ));
        let colliding = Corpus::new(
            "x",
            vec![Post {
                source: Source::Coaid,
                ..post("1", "h", Some(Label::Fake))
            }],
        )
        .unwrap();
        assert!(matches!(
            merge_auxiliary(&base, &colliding),
            Err(CorpusError::Collision(id)) if id == "coaid:1"
        ));
    }

    fn pool(n: usize) -> Corpus {
        let posts = (0..n)
            .map(|i| post(&i.to_string(), &format!("post {i}"), Some(Label::Real)))
            .collect();
        Corpus::new("pool", posts).unwrap()
    }

    #[test]
    fn holdout_sizes() {
        let p = pool(8560);
        let (train, hold) = split_holdout(&p, SplitSpec::Holdout { n: 1000, seed: 23 }).unwrap();
        assert_eq!((train.len(), hold.len()), (7560, 1000));
    }

    #[test]
    fn zero_holdout_keeps_everything() {
        let p = pool(10);
        let (train, hold) = split_holdout(&p, SplitSpec::Holdout { n: 0, seed: 1 }).unwrap();
        assert_eq!(train.posts(), p.posts());
        assert!(hold.is_empty());
    }

    #[test]
    fn holdout_errors() {
        let p = pool(10);
        assert!(matches!(
            split_holdout(&p, SplitSpec::Holdout { n: 10, seed: 1 }),
            Err(CorpusError::HoldoutTooLarge { n: 10, pool: 10 })
        ));
        assert!(matches!(
            split_holdout(&p, SplitSpec::Official),
            Err(CorpusError::NotHoldout)
        ));
    }

    #[test]
    fn render_refuses_tabs_and_mixed_labels() {
        let c = Corpus::new("c", vec![post("1", "a\tb", None)]).unwrap();
        assert!(matches!(render_corpus(&c), Err(CorpusError::Unwritable { .. })));
        let c = Corpus::new(
            "c",
            vec![post("1", "a", Some(Label::Fake)), post("2", "b", None)],
        )
        .unwrap();
        assert!(matches!(render_corpus(&c), Err(CorpusError::MixedLabels { .. })));
    }
}
