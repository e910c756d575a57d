//! Flat TOML experiment configuration.
//!
//! One file describes one experiment. Relative paths are resolved against the
//! directory containing the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::SplitSpec;
use crate::ensemble::TieRule;
use crate::linear_model::Hyper;
use crate::preprocess::{EmojiMode, PreprocessConfig, SpanMode};

use super::BoxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    BaselineSvc,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    Official,
    Holdout,
}

fn default_true() -> bool {
    true
}
fn default_max_features() -> usize {
    10_000
}
fn default_c() -> f64 {
    Hyper::default().c
}
fn default_tol() -> f64 {
    Hyper::default().tol
}
fn default_max_iter() -> usize {
    Hyper::default().max_iter
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub model: ModelKind,
    /// Label for the model column of ablation tables; defaults by model kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,

    pub train: PathBuf,
    pub validation: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_coaid: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_fakecovid: Option<PathBuf>,
    /// Score the ensemble against gold test labels.
    #[serde(default = "default_true")]
    pub evaluate: bool,

    pub split: SplitMode,
    #[serde(default)]
    pub holdout_n: usize,
    #[serde(default)]
    pub split_seed: u64,

    /// Training seeds for baseline members, or tie-break keys for external members.
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Number of members kept in the ensemble.
    pub k: usize,
    #[serde(default)]
    pub tie_rule: TieRule,

    /// External member predictions on the model-selection split, one file per member.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub external_validation: Vec<PathBuf>,
    /// External member predictions on the test split, aligned with `external_validation`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub external_test: Vec<PathBuf>,

    #[serde(default)]
    pub url: SpanMode,
    #[serde(default)]
    pub mention: SpanMode,
    #[serde(default)]
    pub hashtag: SpanMode,
    #[serde(default)]
    pub emoji: EmojiMode,
    #[serde(default)]
    pub lowercase: bool,

    #[serde(default = "default_max_features")]
    pub max_features: usize,
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,

    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn parse(src: &str) -> Result<Self, BoxError> {
        Ok(toml::from_str(src)?)
    }

    /// Reads, resolves relative paths against the file's directory, and validates.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BoxError> {
        let path = path.as_ref();
        let src = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg = Self::parse(&src).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        let base = fs::canonicalize(&base).unwrap_or(base);
        cfg.resolve_paths(&base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.train);
        fix(&mut self.validation);
        fix(&mut self.out);
        for p in [&mut self.test, &mut self.aux_coaid, &mut self.aux_fakecovid]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        self.external_validation.iter_mut().for_each(fix);
        self.external_test.iter_mut().for_each(fix);
    }

    pub fn validate(&self) -> Result<(), BoxError> {
        self.preprocess().validate()?;
        self.hyper(0).validate()?;
        if self.k == 0 {
            return Err("k must be at least 1".into());
        }
        if self.split_seed > i64::MAX as u64 || self.seeds.iter().any(|&s| s > i64::MAX as u64) {
            return Err("seeds must fit in a signed 64-bit TOML integer".into());
        }
        if self.max_features == 0 {
            return Err("max_features must be at least 1".into());
        }
        let members = self.member_count();
        if self.model == ModelKind::BaselineSvc && self.seeds.is_empty() {
            return Err("baseline runs need at least one seed".into());
        }
        if self.k > members {
            return Err(format!("k = {} exceeds the {members} available members", self.k).into());
        }
        if self.split == SplitMode::Official && self.holdout_n != 0 {
            return Err("holdout_n is only meaningful with split = \"holdout\"".into());
        }
        if self.model == ModelKind::External {
            if !self.seeds.is_empty() && self.seeds.len() != members {
                return Err("external runs need one seed per member file (or none)".into());
            }
            let has_selection = self.split == SplitMode::Official || self.holdout_n > 0;
            if has_selection && self.external_validation.is_empty() {
                return Err("external runs need external_validation files for the selection split".into());
            }
            if !self.external_validation.is_empty()
                && !self.external_test.is_empty()
                && self.external_validation.len() != self.external_test.len()
            {
                return Err("external_validation and external_test must list the same members".into());
            }
            if self.test.is_some() && self.external_test.is_empty() {
                return Err("a test split is configured but no external_test files are given".into());
            }
        } else if !self.external_validation.is_empty() || !self.external_test.is_empty() {
            return Err("external_* files are only used with model = \"external\"".into());
        }
        Ok(())
    }

    pub fn member_count(&self) -> usize {
        match self.model {
            ModelKind::BaselineSvc => self.seeds.len(),
            ModelKind::External => self.external_validation.len().max(self.external_test.len()),
        }
    }

    pub fn preprocess(&self) -> PreprocessConfig {
        PreprocessConfig {
            url: self.url,
            mention: self.mention,
            hashtag: self.hashtag,
            emoji: self.emoji,
            lowercase: self.lowercase,
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        match self.split {
            SplitMode::Official => SplitSpec::Official,
            SplitMode::Holdout => SplitSpec::Holdout {
                n: self.holdout_n,
                seed: self.split_seed,
            },
        }
    }

    pub fn hyper(&self, seed: u64) -> Hyper {
        Hyper {
            c: self.c,
            tol: self.tol,
            max_iter: self.max_iter,
            seed,
        }
    }

    pub fn model_label(&self) -> String {
        self.model_name.clone().unwrap_or_else(|| match self.model {
            ModelKind::BaselineSvc => "LinearSVC".to_string(),
            ModelKind::External => "external".to_string(),
        })
    }

    /// Preprocessing column of an ablation row.
    pub fn description(&self) -> String {
        match self.model {
            ModelKind::BaselineSvc => "converting into a bag of words".to_string(),
            ModelKind::External => self.preprocess().describe(),
        }
    }

    /// Additional-data column of an ablation row.
    pub fn additional_data(&self) -> String {
        let mut parts = Vec::new();
        if self.aux_coaid.is_some() {
            parts.push("CoAID");
        }
        if self.aux_fakecovid.is_some() {
            parts.push("FakeCovid");
        }
        if parts.is_empty() {
            "no".to_string()
        } else {
            parts.join(", ")
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
