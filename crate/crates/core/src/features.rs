//! Bag-of-words vocabulary and sparse count vectors.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::preprocess::TokenList;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("max_features must be at least 1")]
    ZeroMaxFeatures,
    #[error("cannot build a vocabulary from a corpus without tokens")]
    EmptyCorpus,
    #[error("vocabulary line {line}: {reason}")]
    BadVocabulary { line: usize, reason: &'static str },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Term list with dense indices `0..len`, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    max_features: usize,
}

impl Vocabulary {
    /// Builds a vocabulary from terms in the order given; duplicates are rejected.
    pub fn from_terms(terms: Vec<String>, max_features: usize) -> Result<Self, FeatureError> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if t.is_empty() || t.chars().any(char::is_whitespace) {
                return Err(FeatureError::BadVocabulary {
                    line: i + 1,
                    reason: "empty term or term with whitespace",
                });
            }
            if index.insert(t.clone(), i).is_some() {
                return Err(FeatureError::BadVocabulary {
                    line: i + 1,
                    reason: "duplicate term",
                });
            }
        }
        Ok(Self {
            terms,
            index,
            max_features: max_features.max(1),
        })
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_features(&self) -> usize {
        self.max_features
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// One term per line in index order.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(t);
            out.push('\n');
        }
        out
    }

    pub fn parse(src: &str) -> Result<Self, FeatureError> {
        let terms: Vec<String> = src.lines().map(str::to_string).collect();
        let n = terms.len();
        Self::from_terms(terms, n)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FeatureError> {
        let path = path.as_ref();
        fs::write(path, self.render()).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FeatureError> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(|source| FeatureError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&src)
    }
}

/// Keeps the `max_features` most frequent tokens by total count, ties broken by the
/// lexicographically smaller token, then orders the survivors lexicographically.
pub fn build_vocabulary(docs: &[TokenList], max_features: usize) -> Result<Vocabulary, FeatureError> {
    if max_features == 0 {
        return Err(FeatureError::ZeroMaxFeatures);
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for doc in docs {
        for tok in doc.iter() {
            *counts.entry(tok.as_str()).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    ranked.truncate(max_features);
    let mut terms: Vec<String> = ranked.into_iter().map(|(t, _)| t.to_string()).collect();
    terms.sort_unstable();
    Vocabulary::from_terms(terms, max_features)
}

/// Sparse document vector: `(index, count)` pairs with strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseVector {
    entries: Vec<(u32, u32)>,
    dimension: usize,
}

impl SparseVector {
    /// Builds a vector from arbitrary-order pairs, summing duplicate indices and
    /// dropping zero counts. Panics if an index is out of range.
    pub fn from_pairs(dimension: usize, pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut entries: Vec<(u32, u32)> = pairs.into_iter().filter(|&(_, c)| c > 0).collect();
        entries.sort_unstable_by_key(|&(i, _)| i);
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        if let Some(&(last, _)) = entries.last() {
            assert!((last as usize) < dimension, "index {last} out of range for dimension {dimension}");
        }
        Self { entries, dimension }
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_count(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, c)| f64::from(c) * f64::from(c)).sum()
    }

    /// Entrywise sum of two vectors of the same dimension.
    pub fn add(&self, other: &SparseVector) -> SparseVector {
        assert_eq!(self.dimension, other.dimension);
        SparseVector::from_pairs(
            self.dimension,
            self.entries.iter().chain(other.entries.iter()).copied(),
        )
    }
}

pub fn vectorize(doc: &TokenList, vocab: &Vocabulary) -> SparseVector {
    SparseVector::from_pairs(
        vocab.len(),
        doc.iter()
            .filter_map(|t| vocab.index_of(t))
            .map(|i| (i as u32, 1)),
    )
}
