//! Config-driven experiment runs.
//!
//! A run loads the datasets, optionally merges auxiliary headlines, splits, trains one
//! baseline member per seed (or loads external member predictions), keeps the `k`
//! members with the best fake-class F1 on the selection split, hard-votes them and
//! writes predictions, reports and a config snapshot. Outputs depend only on the input
//! files and the config.

pub mod baseline;
pub mod config;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{self, Corpus, Source, SplitSpec};
use crate::ensemble::{self, EnsembleConfig, PredictionSet};
use crate::metrics::{self, EvalReport, EvalReportJson};

pub use baseline::{train_baseline, BaselineModel, TrainingSet};
pub use config::{ExperimentConfig, ModelKind, SplitMode};

pub type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Merge,
    Split,
    Train,
    Predict,
    Select,
    Ensemble,
    Evaluate,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Merge => "merge",
            Stage::Split => "split",
            Stage::Train => "train",
            Stage::Predict => "predict",
            Stage::Select => "select",
            Stage::Ensemble => "ensemble",
            Stage::Evaluate => "evaluate",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, Error)]
#[error("[{stage}] {source}")]
pub struct ExperimentError {
    pub stage: Stage,
    #[source]
    pub source: BoxError,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, ExperimentError>;
}

impl<T, E: Into<BoxError>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, ExperimentError> {
        self.map_err(|e| ExperimentError {
            stage,
            source: e.into(),
        })
    }
}

/// One candidate model of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberSummary {
    pub model_id: String,
    pub seed: u64,
    /// Fake-class F1 on the selection split, when there is one.
    pub selection_f1_fake: Option<f64>,
    pub selected: bool,
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub config_snapshot: PathBuf,
    pub member_files: Vec<PathBuf>,
    pub ensemble_files: Vec<PathBuf>,
    pub report_json: PathBuf,
    pub report_text: PathBuf,
    pub error_report: Option<PathBuf>,
    pub members: Vec<MemberSummary>,
    /// Ensemble scored on the selection split.
    pub selection_report: Option<EvalReport>,
    /// Ensemble scored on the test split.
    pub test_report: Option<EvalReport>,
}

impl RunArtifacts {
    pub fn all_files(&self) -> Vec<&Path> {
        let mut files: Vec<&Path> = vec![&self.config_snapshot, &self.report_json, &self.report_text];
        files.extend(self.member_files.iter().map(PathBuf::as_path));
        files.extend(self.ensemble_files.iter().map(PathBuf::as_path));
        files.extend(self.error_report.as_deref());
        files
    }
}

#[derive(Serialize)]
struct ReportJson<'a> {
    name: &'a str,
    model: String,
    preprocessing: String,
    additional_data: String,
    members: &'a [MemberSummary],
    ensemble: String,
    selection: Option<EvalReportJson>,
    test: Option<EvalReportJson>,
}

struct Member {
    seed: u64,
    selection: Option<PredictionSet>,
    test: Option<PredictionSet>,
}

/// Resolved datasets for a run.
#[derive(Debug, Clone)]
pub struct Splits {
    /// Training posts, auxiliary data included.
    pub fit: Corpus,
    /// Posts used to rank members, if the protocol has any.
    pub selection: Option<Corpus>,
    pub test: Option<Corpus>,
}

/// Loads the configured files and applies the split protocol and auxiliary merge.
pub fn load_splits(cfg: &ExperimentConfig) -> Result<Splits, ExperimentError> {
    let train = corpus::load_dataset(&cfg.train, true).at(Stage::Load)?;
    let validation = corpus::load_dataset(&cfg.validation, true).at(Stage::Load)?;
    let test = cfg
        .test
        .as_ref()
        .map(|p| corpus::load_dataset(p, false))
        .transpose()
        .at(Stage::Load)?;
    let mut aux = Vec::new();
    for (path, source) in [(&cfg.aux_coaid, Source::Coaid), (&cfg.aux_fakecovid, Source::Fakecovid)] {
        if let Some(p) = path {
            aux.push(corpus::load_auxiliary(p, source).at(Stage::Load)?);
        }
    }

    let (mut fit, selection) = match cfg.split_spec() {
        SplitSpec::Official => (train, Some(validation)),
        spec @ SplitSpec::Holdout { n, .. } => {
            let pool = Corpus::concat("pool", &train, &validation).at(Stage::Split)?;
            let (fit, held) = corpus::split_holdout(&pool, spec).at(Stage::Split)?;
            (fit, (n > 0).then_some(held))
        }
    };
    for extra in &aux {
        fit = corpus::merge_auxiliary(&fit, extra).at(Stage::Merge)?;
    }
    Ok(Splits { fit, selection, test })
}

fn baseline_members(cfg: &ExperimentConfig, splits: &Splits, out: &Path) -> Result<Vec<Member>, ExperimentError> {
    let preprocess = cfg.preprocess();
    let training = TrainingSet::build(&splits.fit, &preprocess, cfg.max_features).at(Stage::Train)?;
    training.vocabulary.save(out.join("vocabulary.txt")).at(Stage::Write)?;
    let mut members = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let model = training.train(&preprocess, &cfg.hyper(seed)).at(Stage::Train)?;
        model
            .model
            .save(out.join("models").join(format!("svc-seed{seed}.model")))
            .at(Stage::Write)?;
        let id = format!("svc-seed{seed}");
        let predict = |c: &Corpus| model.predict_corpus(c, &id);
        members.push(Member {
            seed,
            selection: splits.selection.as_ref().map(predict).transpose().at(Stage::Predict)?,
            test: splits.test.as_ref().map(predict).transpose().at(Stage::Predict)?,
        });
    }
    Ok(members)
}

fn external_members(cfg: &ExperimentConfig, splits: &Splits) -> Result<Vec<Member>, ExperimentError> {
    let n = cfg.member_count();
    let load = |paths: &[PathBuf], i: usize, corpus: Option<&Corpus>| -> Result<Option<PredictionSet>, ExperimentError> {
        let (Some(path), Some(corpus)) = (paths.get(i), corpus) else {
            return Ok(None);
        };
        let set = ensemble::load_predictions(path).at(Stage::Load)?;
        ensure_covers(corpus, &set)
            .map_err(|e| format!("{}: {e}", path.display()))
            .at(Stage::Load)?;
        Ok(Some(set))
    };
    (0..n)
        .map(|i| {
            Ok(Member {
                seed: cfg.seeds.get(i).copied().unwrap_or(i as u64),
                selection: load(&cfg.external_validation, i, splits.selection.as_ref())?,
                test: load(&cfg.external_test, i, splits.test.as_ref())?,
            })
        })
        .collect()
}

/// Every post scored, and nothing else.
fn ensure_covers(corpus: &Corpus, set: &PredictionSet) -> Result<(), String> {
    if let Some(p) = corpus.iter().find(|p| set.get(&p.id).is_none()) {
        return Err(format!("no prediction for post {:?}", p.id));
    }
    if set.len() != corpus.len() {
        let known: std::collections::HashSet<&str> = corpus.iter().map(|p| p.id.as_str()).collect();
        let stray = set.ids().find(|id| !known.contains(id)).unwrap_or_default();
        return Err(format!("prediction for unknown id {stray:?}"));
    }
    Ok(())
}

fn member_id(m: &Member) -> String {
    m.selection
        .as_ref()
        .or(m.test.as_ref())
        .map(|s| s.model_id.clone())
        .unwrap_or_else(|| format!("member-{}", m.seed))
}

/// Ranks by selection fake-class F1 (descending), ties to the lower seed, and keeps `k`.
fn select_members(
    cfg: &ExperimentConfig,
    members: &[Member],
    selection: Option<&Corpus>,
) -> Result<(Vec<usize>, Vec<MemberSummary>), ExperimentError> {
    let mut summaries: Vec<MemberSummary> = members
        .iter()
        .map(|m| MemberSummary {
            model_id: member_id(m),
            seed: m.seed,
            selection_f1_fake: None,
            selected: false,
        })
        .collect();
    let chosen: Vec<usize> = match selection {
        Some(corpus) => {
            for (m, s) in members.iter().zip(summaries.iter_mut()) {
                let preds = m.selection.as_ref().ok_or("member has no selection predictions").at(Stage::Select)?;
                let (gold, pred) = metrics::align_complete(corpus, preds).at(Stage::Select)?;
                s.selection_f1_fake = Some(metrics::evaluate(&gold, &pred).at(Stage::Select)?.fake.f1);
            }
            let mut order: Vec<usize> = (0..members.len()).collect();
            order.sort_by(|&a, &b| {
                let fa = summaries[a].selection_f1_fake.unwrap_or(0.0);
                let fb = summaries[b].selection_f1_fake.unwrap_or(0.0);
                fb.total_cmp(&fa).then(summaries[a].seed.cmp(&summaries[b].seed))
            });
            order.truncate(cfg.k);
            order.sort_unstable();
            order
        }
        None => {
            if cfg.k != members.len() {
                return Err("without a selection split every member is used, so k must equal the member count")
                    .at(Stage::Select);
            }
            (0..members.len()).collect()
        }
    };
    for &i in &chosen {
        summaries[i].selected = true;
    }
    Ok((chosen, summaries))
}

fn combine_split(
    cfg: &ExperimentConfig,
    members: &[Member],
    chosen: &[usize],
    pick: impl Fn(&Member) -> Option<&PredictionSet>,
) -> Result<Option<PredictionSet>, ExperimentError> {
    let sets: Option<Vec<&PredictionSet>> = chosen.iter().map(|&i| pick(&members[i])).collect();
    match sets {
        Some(sets) if !sets.is_empty() => ensemble::combine(&EnsembleConfig {
            members: sets,
            tie_rule: cfg.tie_rule,
        })
        .map(Some)
        .at(Stage::Ensemble),
        _ => Ok(None),
    }
}

fn write(path: &Path, body: impl AsRef<[u8]>) -> Result<(), ExperimentError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).at(Stage::Write)?;
    }
    fs::write(path, body)
        .map_err(|e| format!("{}: {e}", path.display()))
        .at(Stage::Write)
}

/// Runs one experiment end to end and writes its artifacts under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts, ExperimentError> {
    cfg.validate().at(Stage::Config)?;
    let out = cfg.out.clone();
    fs::create_dir_all(out.join("models")).at(Stage::Write)?;
    fs::create_dir_all(out.join("members")).at(Stage::Write)?;

    let splits = load_splits(cfg)?;
    let members = match cfg.model {
        ModelKind::BaselineSvc => baseline_members(cfg, &splits, &out)?,
        ModelKind::External => external_members(cfg, &splits)?,
    };
    let (chosen, summaries) = select_members(cfg, &members, splits.selection.as_ref())?;

    let mut member_files = Vec::new();
    for m in &members {
        for (split, set) in [("selection", &m.selection), ("test", &m.test)] {
            if let Some(set) = set {
                let path = out.join("members").join(format!("{}.{split}.tsv", set.model_id));
                write(&path, ensemble::render_predictions(set))?;
                member_files.push(path);
            }
        }
    }

    let ens_selection = combine_split(cfg, &members, &chosen, |m| m.selection.as_ref())?;
    let ens_test = combine_split(cfg, &members, &chosen, |m| m.test.as_ref())?;
    let mut ensemble_files = Vec::new();
    for (split, set) in [("selection", &ens_selection), ("test", &ens_test)] {
        if let Some(set) = set {
            let path = out.join(format!("ensemble.{split}.tsv"));
            write(&path, ensemble::render_predictions(set))?;
            ensemble_files.push(path);
        }
    }

    let score = |corpus: &Corpus, set: &PredictionSet| -> Result<EvalReport, ExperimentError> {
        let (gold, pred) = metrics::align_complete(corpus, set).at(Stage::Evaluate)?;
        metrics::evaluate(&gold, &pred).at(Stage::Evaluate)
    };
    let selection_report = match (&splits.selection, &ens_selection) {
        (Some(c), Some(s)) => Some(score(c, s)?),
        _ => None,
    };
    let test_report = match (&splits.test, &ens_test) {
        (Some(c), Some(s)) if cfg.evaluate => {
            if !c.is_labeled() {
                return Err("evaluation requested but the test file has no gold labels (set evaluate = false)")
                    .at(Stage::Evaluate);
            }
            Some(score(c, s)?)
        }
        _ => None,
    };

    // misclassifications on the most final labeled split available
    let error_rows = match (&test_report, &splits.test, &ens_test, &splits.selection, &ens_selection) {
        (Some(_), Some(c), Some(s), _, _) | (None, _, _, Some(c), Some(s)) => {
            Some(metrics::error_report(c, s).at(Stage::Evaluate)?)
        }
        _ => None,
    };
    let error_report = match error_rows {
        Some(rows) => {
            let path = out.join("errors.tsv");
            write(&path, metrics::render_error_report(&rows))?;
            Some(path)
        }
        None => None,
    };

    let ensemble_id = ens_test
        .as_ref()
        .or(ens_selection.as_ref())
        .map(|s| s.model_id.clone())
        .unwrap_or_default();
    let json = ReportJson {
        name: &cfg.name,
        model: cfg.model_label(),
        preprocessing: cfg.description(),
        additional_data: cfg.additional_data(),
        members: &summaries,
        ensemble: ensemble_id.clone(),
        selection: selection_report.as_ref().map(EvalReport::to_json_value),
        test: test_report.as_ref().map(EvalReport::to_json_value),
    };
    let report_json = out.join("report.json");
    write(&report_json, serde_json::to_string_pretty(&json).at(Stage::Write)? + "\n")?;

    let mut text = format!(
        "experiment: {}\nmodel: {}\npreprocessing: {}\nadditional data: {}\n\nmembers:\n",
        cfg.name,
        cfg.model_label(),
        cfg.description(),
        cfg.additional_data()
    );
    for s in &summaries {
        let f1 = s
            .selection_f1_fake
            .map_or_else(|| "-".to_string(), |v| format!("{:.2}", v * 100.0));
        text.push_str(&format!(
            "  {:<24} seed {:<6} selection F1(fake) {:>6}{}\n",
            s.model_id,
            s.seed,
            f1,
            if s.selected { "  *" } else { "" }
        ));
    }
    text.push_str(&format!("\nensemble: {ensemble_id}\n"));
    if let Some(r) = &selection_report {
        text.push_str(&format!("\n[selection split]\n{r}\n"));
    }
    if let Some(r) = &test_report {
        text.push_str(&format!("\n[test split]\n{r}\n"));
    }
    let report_text = out.join("report.txt");
    write(&report_text, text)?;

    let config_snapshot = out.join("config.toml");
    write(&config_snapshot, cfg.to_toml())?;

    Ok(RunArtifacts {
        out_dir: out,
        config_snapshot,
        member_files,
        ensemble_files,
        report_json,
        report_text,
        error_report,
        members: summaries,
        selection_report,
        test_report,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub model: String,
    pub description: String,
    pub additional_data: String,
    /// Fake-class F1 on the selection split, as a fraction.
    pub f1_fake: f64,
}

/// Runs every config and reports the ensemble's fake-class F1 on its selection split.
pub fn ablation_table(cfgs: &[ExperimentConfig]) -> Result<Vec<AblationRow>, ExperimentError> {
    cfgs.iter()
        .map(|cfg| {
            let run = run_experiment(cfg)?;
            let report = run
                .selection_report
                .ok_or("ablation rows need a validation split to score")
                .at(Stage::Evaluate)?;
            Ok(AblationRow {
                model: cfg.model_label(),
                description: cfg.description(),
                additional_data: cfg.additional_data(),
                f1_fake: report.fake.f1,
            })
        })
        .collect()
}

/// Fixed-width table with F1 as a percentage to two decimals.
pub fn render_ablation_table(rows: &[AblationRow]) -> String {
    let w_model = rows.iter().map(|r| r.model.len()).chain([5]).max().unwrap_or(5);
    let w_desc = rows.iter().map(|r| r.description.len()).chain([18]).max().unwrap_or(18);
    let w_aux = rows.iter().map(|r| r.additional_data.len()).chain([15]).max().unwrap_or(15);
    let mut out = format!(
        "{:<w_model$} | {:<w_desc$} | {:<w_aux$} | F1 (fake, %)\n",
        "Model", "Data preprocessing", "Additional data"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<w_model$} | {:<w_desc$} | {:<w_aux$} | {:.2}\n",
            r.model,
            r.description,
            r.additional_data,
            r.f1_fake * 100.0
        ));
    }
    out
}
