//! Binary classification metrics with fake as the positive class.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Label, Post};
use crate::ensemble::PredictionSet;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("{gold} gold labels but {pred} predictions")]
    LengthMismatch { gold: usize, pred: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("prediction for id {0:?} has no post in the corpus")]
    UnknownId(String),
    #[error("post {0:?} has no gold label")]
    Unlabeled(String),
    #[error("post {0:?} has no prediction")]
    MissingPrediction(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same counts seen with real as the positive class.
    pub fn transpose(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }

    pub fn class_metrics(&self) -> ClassMetrics {
        let tp = self.tp as f64;
        let precision = ratio(tp, tp + self.fp as f64);
        let recall = ratio(tp, tp + self.fn_ as f64);
        ClassMetrics {
            precision,
            recall,
            f1: ratio(2.0 * precision * recall, precision + recall),
            support: self.tp + self.fn_,
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub fake: ClassMetrics,
    pub real: ClassMetrics,
    pub weighted_f1: f64,
    pub matrix: ConfusionMatrix,
}

/// Flat JSON form of [`EvalReport`] with fixed key names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReportJson {
    pub precision_fake: f64,
    pub recall_fake: f64,
    pub f1_fake: f64,
    pub support_fake: u64,
    pub precision_real: f64,
    pub recall_real: f64,
    pub f1_real: f64,
    pub support_real: u64,
    pub weighted_f1: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl EvalReport {
    pub fn to_json_value(&self) -> EvalReportJson {
        EvalReportJson {
            precision_fake: self.fake.precision,
            recall_fake: self.fake.recall,
            f1_fake: self.fake.f1,
            support_fake: self.fake.support,
            precision_real: self.real.precision,
            recall_real: self.real.recall,
            f1_real: self.real.f1,
            support_real: self.real.support,
            weighted_f1: self.weighted_f1,
            tp: self.matrix.tp,
            fp: self.matrix.fp,
            fn_: self.matrix.fn_,
            tn: self.matrix.tn,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("plain struct serializes")
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "class  precision  recall  f1      support")?;
        for (name, m) in [("fake", &self.fake), ("real", &self.real)] {
            writeln!(
                f,
                "{name:<5}  {:>9.4}  {:>6.4}  {:>6.4}  {:>7}",
                m.precision, m.recall, m.f1, m.support
            )?;
        }
        writeln!(f, "weighted F1: {:.4}", self.weighted_f1)?;
        writeln!(f, "confusion (positive = fake):")?;
        writeln!(f, "               pred fake  pred real")?;
        writeln!(f, "  gold fake  {:>10}  {:>9}", self.matrix.tp, self.matrix.fn_)?;
        write!(f, "  gold real  {:>10}  {:>9}", self.matrix.fp, self.matrix.tn)
    }
}

pub fn confusion(gold: &[Label], pred: &[Label]) -> Result<ConfusionMatrix, MetricsError> {
    if gold.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            gold: gold.len(),
            pred: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut m = ConfusionMatrix::default();
    for (&g, &p) in gold.iter().zip(pred) {
        match (g, p) {
            (Label::Fake, Label::Fake) => m.tp += 1,
            (Label::Real, Label::Fake) => m.fp += 1,
            (Label::Fake, Label::Real) => m.fn_ += 1,
            (Label::Real, Label::Real) => m.tn += 1,
        }
    }
    Ok(m)
}

/// Per-class precision, recall and F1 plus the support-weighted F1.
pub fn evaluate(gold: &[Label], pred: &[Label]) -> Result<EvalReport, MetricsError> {
    let matrix = confusion(gold, pred)?;
    Ok(report_from_matrix(matrix))
}

pub fn report_from_matrix(matrix: ConfusionMatrix) -> EvalReport {
    let fake = matrix.class_metrics();
    let real = matrix.transpose().class_metrics();
    let total = (fake.support + real.support) as f64;
    let weighted_f1 = ratio(
        fake.f1 * fake.support as f64 + real.f1 * real.support as f64,
        total,
    );
    EvalReport {
        fake,
        real,
        weighted_f1,
        matrix,
    }
}

/// Gold and predicted labels aligned in corpus order, for every post that has a
/// prediction. Predictions for unknown ids are an error.
pub fn align(corpus: &Corpus, pred: &PredictionSet) -> Result<(Vec<Label>, Vec<Label>), MetricsError> {
    let positions: HashMap<&str, usize> = corpus.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
    if let Some(id) = pred.ids().find(|id| !positions.contains_key(id)) {
        return Err(MetricsError::UnknownId(id.to_string()));
    }
    let mut gold = Vec::with_capacity(pred.len());
    let mut guess = Vec::with_capacity(pred.len());
    for post in corpus {
        let Some(r) = pred.get(&post.id) else { continue };
        gold.push(post.label.ok_or_else(|| MetricsError::Unlabeled(post.id.clone()))?);
        guess.push(r.label);
    }
    Ok((gold, guess))
}

/// Like [`align`] but every corpus post must have a prediction.
pub fn align_complete(corpus: &Corpus, pred: &PredictionSet) -> Result<(Vec<Label>, Vec<Label>), MetricsError> {
    if let Some(p) = corpus.iter().find(|p| pred.get(&p.id).is_none()) {
        return Err(MetricsError::MissingPrediction(p.id.clone()));
    }
    align(corpus, pred)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Misclassified {
    pub post: Post,
    pub gold: Label,
    pub pred: Label,
}

/// All misclassified posts: false positives first, then false negatives, each in
/// corpus order.
pub fn error_report(corpus: &Corpus, pred: &PredictionSet) -> Result<Vec<Misclassified>, MetricsError> {
    align(corpus, pred)?;
    let mut fps = Vec::new();
    let mut fns = Vec::new();
    for post in corpus {
        let Some(r) = pred.get(&post.id) else { continue };
        let gold = post.label.ok_or_else(|| MetricsError::Unlabeled(post.id.clone()))?;
        let entry = || Misclassified {
            post: post.clone(),
            gold,
            pred: r.label,
        };
        match (gold, r.label) {
            (Label::Real, Label::Fake) => fps.push(entry()),
            (Label::Fake, Label::Real) => fns.push(entry()),
            _ => {}
        }
    }
    fps.extend(fns);
    Ok(fps)
}

/// TSV rendering `id<TAB>gold<TAB>pred<TAB>tweet`.
pub fn render_error_report(rows: &[Misclassified]) -> String {
    let mut out = String::from("id\tgold\tpred\ttweet\n");
    for r in rows {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", r.post.id, r.gold, r.pred, r.post.text));
    }
    out
}
