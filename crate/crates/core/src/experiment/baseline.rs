//! The bag-of-words linear SVC bundle: preprocessing, vocabulary and weights.

use std::fs;
use std::path::Path;

use crate::corpus::Corpus;
use crate::ensemble::{PredictionRecord, PredictionSet};
use crate::features::{build_vocabulary, vectorize, SparseVector, Vocabulary};
use crate::linear_model::{self, Hyper, LinearModel};
use crate::preprocess::{apply_pipeline, normalize_baseline, PreprocessConfig, StopWords, TokenList};

use super::BoxError;

pub const MODEL_FILE: &str = "svc.model";
pub const VOCABULARY_FILE: &str = "vocabulary.txt";
pub const PREPROCESS_FILE: &str = "preprocess.toml";

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub preprocess: PreprocessConfig,
    pub vocabulary: Vocabulary,
    pub model: LinearModel,
}

pub fn tokenize_corpus(corpus: &Corpus, preprocess: &PreprocessConfig) -> Vec<TokenList> {
    let stopwords = StopWords::builtin();
    corpus
        .iter()
        .map(|p| normalize_baseline(&apply_pipeline(&p.text, preprocess), stopwords))
        .collect()
}

/// Tokenized training data with its vocabulary, shared by all seeds of a run.
pub struct TrainingSet {
    pub vocabulary: Vocabulary,
    pub xs: Vec<SparseVector>,
    pub ys: Vec<crate::corpus::Label>,
}

impl TrainingSet {
    pub fn build(corpus: &Corpus, preprocess: &PreprocessConfig, max_features: usize) -> Result<Self, BoxError> {
        let ys = corpus
            .labels()
            .map_err(|id| format!("training post {id:?} has no label"))?;
        let docs = tokenize_corpus(corpus, preprocess);
        let vocabulary = build_vocabulary(&docs, max_features)?;
        let xs = docs.iter().map(|d| vectorize(d, &vocabulary)).collect();
        Ok(Self { vocabulary, xs, ys })
    }

    pub fn train(&self, preprocess: &PreprocessConfig, hyper: &Hyper) -> Result<BaselineModel, BoxError> {
        let model = linear_model::train_svc(&self.xs, &self.ys, hyper)?;
        Ok(BaselineModel {
            preprocess: *preprocess,
            vocabulary: self.vocabulary.clone(),
            model,
        })
    }
}

pub fn train_baseline(
    corpus: &Corpus,
    preprocess: &PreprocessConfig,
    max_features: usize,
    hyper: &Hyper,
) -> Result<BaselineModel, BoxError> {
    TrainingSet::build(corpus, preprocess, max_features)?.train(preprocess, hyper)
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

impl BaselineModel {
    /// Predicts every post. The score is the logistic squashing of the decision value,
    /// so `score > 0.5` agrees with the predicted label; it is not a calibrated probability.
    pub fn predict_corpus(&self, corpus: &Corpus, model_id: &str) -> Result<PredictionSet, BoxError> {
        let docs = tokenize_corpus(corpus, &self.preprocess);
        let mut set = PredictionSet::new(model_id);
        for (post, doc) in corpus.iter().zip(&docs) {
            let x = vectorize(doc, &self.vocabulary);
            let dv = self.model.decision_value(&x)?;
            set.insert(PredictionRecord {
                id: post.id.clone(),
                label: linear_model::label_for(dv),
                score: Some(sigmoid(dv)),
            })?;
        }
        Ok(set)
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), BoxError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        self.model.save(dir.join(MODEL_FILE))?;
        self.vocabulary.save(dir.join(VOCABULARY_FILE))?;
        fs::write(dir.join(PREPROCESS_FILE), toml::to_string(&self.preprocess)?)?;
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self, BoxError> {
        let dir = dir.as_ref();
        let model = LinearModel::load(dir.join(MODEL_FILE))?;
        let vocabulary = Vocabulary::load(dir.join(VOCABULARY_FILE))?;
        let preprocess: PreprocessConfig = toml::from_str(&fs::read_to_string(dir.join(PREPROCESS_FILE))?)?;
        if model.dimension() != vocabulary.len() {
            return Err(format!(
                "model dimension {} does not match vocabulary size {}",
                model.dimension(),
                vocabulary.len()
            )
            .into());
        }
        Ok(Self {
            preprocess,
            vocabulary,
            model,
        })
    }
}
