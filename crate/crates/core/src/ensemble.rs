//! Hard-voting ensembles and the prediction exchange format.
//!
//! Exchange files are TSV with header `id<TAB>label<TAB>score`, one record per post.
//! `label` is `fake` or `real`; `score` is the confidence that the post is fake, written
//! with six decimals, or left empty when the scorer has none.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Label, ParseLabelError};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("cannot vote over zero labels")]
    NoVotes,
    #[error("{votes} votes but {scores} scores")]
    ScoreCount { votes: usize, scores: usize },
    #[error("the mean_score tie rule needs scores from every member (missing for id {0:?})")]
    MissingScores(String),
    #[error("an ensemble needs at least one member")]
    NoMembers,
    #[error("members {left:?} and {right:?} cover different ids; symmetric difference: {diff:?}")]
    IdMismatch {
        left: String,
        right: String,
        diff: Vec<String>,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: {source}")]
    BadLabel {
        line: usize,
        #[source]
        source: ParseLabelError,
    },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: score {score} outside [0, 1]")]
    ScoreRange { line: usize, score: f64 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<EnsembleError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Exact ties resolve to real.
    #[default]
    PreferReal,
    /// Exact ties resolve to fake iff the mean fake-confidence exceeds 0.5.
    MeanScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub id: String,
    pub label: Label,
    pub score: Option<f64>,
}

/// Per-post predictions of one model, in insertion order with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionSet {
    pub model_id: String,
    records: Vec<PredictionRecord>,
    index: HashMap<String, usize>,
}

impl PredictionSet {
    pub fn new(model_id: impl Into<String>) -> Self {
        Self {
            model_id: model_id.into(),
            ..Default::default()
        }
    }

    pub fn from_records(
        model_id: impl Into<String>,
        records: impl IntoIterator<Item = PredictionRecord>,
    ) -> Result<Self, EnsembleError> {
        let mut set = Self::new(model_id);
        for (i, r) in records.into_iter().enumerate() {
            set.insert(r).map_err(|e| match e {
                EnsembleError::DuplicateId { id, .. } => EnsembleError::DuplicateId { line: i + 1, id },
                EnsembleError::ScoreRange { score, .. } => EnsembleError::ScoreRange { line: i + 1, score },
                other => other,
            })?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, record: PredictionRecord) -> Result<(), EnsembleError> {
        if let Some(s) = record.score {
            if !(0.0..=1.0).contains(&s) {
                return Err(EnsembleError::ScoreRange { line: 0, score: s });
            }
        }
        if self.index.contains_key(&record.id) {
            return Err(EnsembleError::DuplicateId {
                line: 0,
                id: record.id,
            });
        }
        self.index.insert(record.id.clone(), self.records.len());
        self.records.push(record);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&PredictionRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[PredictionRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.id.as_str())
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }
}

/// Majority label; exact ties are settled by `tie_rule`.
pub fn hard_vote(votes: &[Label], scores: Option<&[f64]>, tie_rule: TieRule) -> Result<Label, EnsembleError> {
    if votes.is_empty() {
        return Err(EnsembleError::NoVotes);
    }
    if let Some(s) = scores {
        if s.len() != votes.len() {
            return Err(EnsembleError::ScoreCount {
                votes: votes.len(),
                scores: s.len(),
            });
        }
    }
    let fake = votes.iter().filter(|&&v| v == Label::Fake).count();
    let real = votes.len() - fake;
    Ok(match fake.cmp(&real) {
        std::cmp::Ordering::Greater => Label::Fake,
        std::cmp::Ordering::Less => Label::Real,
        std::cmp::Ordering::Equal => match tie_rule {
            TieRule::PreferReal => Label::Real,
            TieRule::MeanScore => {
                let s = scores.ok_or_else(|| EnsembleError::MissingScores(String::new()))?;
                let mean = s.iter().sum::<f64>() / s.len() as f64;
                if mean > 0.5 {
                    Label::Fake
                } else {
                    Label::Real
                }
            }
        },
    })
}

pub struct EnsembleConfig<'a> {
    pub members: Vec<&'a PredictionSet>,
    pub tie_rule: TieRule,
}

/// Votes per id across all members. The output id is the sorted member ids joined by
/// `+`, its score is the fraction of members voting fake, and record order follows the
/// member with the smallest model id, so the result does not depend on member order.
pub fn combine(cfg: &EnsembleConfig<'_>) -> Result<PredictionSet, EnsembleError> {
    let mut members = cfg.members.clone();
    if members.is_empty() {
        return Err(EnsembleError::NoMembers);
    }
    members.sort_by(|a, b| {
        a.model_id
            .cmp(&b.model_id)
            .then_with(|| a.ids().cmp(b.ids()))
    });
    let reference = members[0];
    for m in &members[1..] {
        if m.len() != reference.len() || reference.ids().any(|id| m.get(id).is_none()) {
            let left: BTreeSet<&str> = reference.ids().collect();
            let right: BTreeSet<&str> = m.ids().collect();
            return Err(EnsembleError::IdMismatch {
                left: reference.model_id.clone(),
                right: m.model_id.clone(),
                diff: left.symmetric_difference(&right).map(|s| s.to_string()).collect(),
            });
        }
    }

    let model_id = members
        .iter()
        .map(|m| m.model_id.as_str())
        .collect::<Vec<_>>()
        .join("+");
    let mut out = PredictionSet::new(model_id);
    let mut votes = Vec::with_capacity(members.len());
    let mut scores = Vec::with_capacity(members.len());
    for rec in reference.records() {
        votes.clear();
        scores.clear();
        let mut all_scored = true;
        for m in &members {
            let r = m.get(&rec.id).expect("id sets checked above");
            votes.push(r.label);
            match r.score {
                Some(s) => scores.push(s),
                None => all_scored = false,
            }
        }
        let label = hard_vote(&votes, all_scored.then_some(scores.as_slice()), cfg.tie_rule)
            .map_err(|e| match e {
                EnsembleError::MissingScores(_) => EnsembleError::MissingScores(rec.id.clone()),
                other => other,
            })?;
        let fake_share = votes.iter().filter(|&&v| v == Label::Fake).count() as f64 / votes.len() as f64;
        out.insert(PredictionRecord {
            id: rec.id.clone(),
            label,
            score: Some(fake_share),
        })?;
    }
    Ok(out)
}

pub fn render_predictions(set: &PredictionSet) -> String {
    let mut out = String::from("id\tlabel\tscore\n");
    for r in set.records() {
        match r.score {
            Some(s) => writeln!(out, "{}\t{}\t{:.6}", r.id, r.label, s).unwrap(),
            None => writeln!(out, "{}\t{}\t", r.id, r.label).unwrap(),
        }
    }
    out
}

pub fn parse_predictions(src: &str, model_id: impl Into<String>) -> Result<PredictionSet, EnsembleError> {
    let mut lines = src.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    match lines.next() {
        Some("id\tlabel\tscore") => {}
        _ => {
            return Err(EnsembleError::Malformed {
                line: 1,
                reason: "expected header `id<TAB>label<TAB>score`".into(),
            })
        }
    }
    let mut set = PredictionSet::new(model_id);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, label, score] = fields[..] else {
            return Err(EnsembleError::Malformed {
                line: line_no,
                reason: format!("expected 3 fields, found {}", fields.len()),
            });
        };
        if id.is_empty() {
            return Err(EnsembleError::Malformed {
                line: line_no,
                reason: "empty id".into(),
            });
        }
        let label = label
            .parse::<Label>()
            .map_err(|source| EnsembleError::BadLabel { line: line_no, source })?;
        let score = if score.is_empty() {
            None
        } else {
            let s: f64 = score.parse().map_err(|_| EnsembleError::Malformed {
                line: line_no,
                reason: format!("bad score {score:?}"),
            })?;
            Some(s)
        };
        set.insert(PredictionRecord {
            id: id.to_string(),
            label,
            score,
        })
        .map_err(|e| match e {
            EnsembleError::DuplicateId { id, .. } => EnsembleError::DuplicateId { line: line_no, id },
            EnsembleError::ScoreRange { score, .. } => EnsembleError::ScoreRange { line: line_no, score },
            other => other,
        })?;
    }
    Ok(set)
}

/// Loads an exchange file; the model id is the file stem.
pub fn load_predictions(path: impl AsRef<Path>) -> Result<PredictionSet, EnsembleError> {
    let path = path.as_ref();
    let src = fs::read_to_string(path).map_err(|source| EnsembleError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let model_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_predictions(&src, model_id).map_err(|e| EnsembleError::File {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

pub fn save_predictions(set: &PredictionSet, path: impl AsRef<Path>) -> Result<(), EnsembleError> {
    let path = path.as_ref();
    fs::write(path, render_predictions(set)).map_err(|source| EnsembleError::Io {
        path: path.to_path_buf(),
        source,
    })
}
