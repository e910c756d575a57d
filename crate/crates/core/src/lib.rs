//! Fake-news detection toolkit for COVID-19 social-media posts.
//!
//! The crate is organised as a pipeline:
//!
//! - [`corpus`]: labeled post collections, TSV I/O, auxiliary merging and seeded hold-out splits
//! - [`preprocess`]: tweet-aware normalization (URLs, mentions, hashtags, emoji) and the
//!   bag-of-words token normalizer with stop-words and a Porter stemmer
//! - [`features`]: vocabulary construction and sparse count vectors
//! - [`linear_model`]: L2-regularized hinge-loss linear classifier trained by dual coordinate descent
//! - [`ensemble`]: hard voting over prediction sets and the prediction exchange format
//! - [`metrics`]: confusion matrices, per-class and weighted F1, misclassification reports
//! - [`experiment`]: config-driven runs that tie the stages together

pub mod corpus;
pub mod ensemble;
pub mod experiment;
pub mod features;
pub mod linear_model;
pub mod metrics;
pub mod preprocess;
pub mod rng;

pub use corpus::{Corpus, Label, Post, Source, SplitSpec};
pub use ensemble::{PredictionRecord, PredictionSet, TieRule};
pub use features::{SparseVector, Vocabulary};
pub use linear_model::{Hyper, LinearModel};
pub use metrics::{ConfusionMatrix, EvalReport};
pub use preprocess::{PreprocessConfig, SpanKind, TokenList};
