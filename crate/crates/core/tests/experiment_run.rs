mod support;

use std::fs;
use std::path::Path;

use infodemic::corpus::{render_corpus, save_corpus, Corpus, Label, Post};
use infodemic::ensemble::{load_predictions, render_predictions, PredictionRecord, PredictionSet};
use infodemic::experiment::{
    ablation_table, render_ablation_table, run_experiment, ExperimentConfig, ModelKind, SplitMode, Stage,
};

fn write_data(dir: &Path) {
    save_corpus(&support::synthetic_corpus("train", 240, 1, 0), dir.join("train.tsv")).unwrap();
    save_corpus(&support::synthetic_corpus("val", 80, 2, 1000), dir.join("val.tsv")).unwrap();
    let test = support::synthetic_corpus("test", 60, 3, 2000);
    save_corpus(&test, dir.join("test.tsv")).unwrap();
    let aux = support::synthetic_corpus("aux", 30, 4, 0);
    let aux_src = render_corpus(&aux).unwrap().replacen("id\ttweet", "id\theadline", 1);
    fs::write(dir.join("coaid.tsv"), aux_src).unwrap();
}

fn baseline_config(dir: &Path, out: &str) -> ExperimentConfig {
    let src = format!(
        r#"
name = "synthetic"
model = "baseline_svc"
train = "train.tsv"
validation = "val.tsv"
test = "test.tsv"
split = "official"
seeds = [3, 1, 2]
k = 3
url = "tokenize"
hashtag = "tokenize"
lowercase = true
max_features = 200
out = "{out}"
"#
    );
    let path = dir.join(format!("{out}.toml"));
    fs::write(&path, src).unwrap();
    ExperimentConfig::load(&path).unwrap()
}

fn read(p: &Path) -> Vec<u8> {
    fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn baseline_run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    write_data(dir.path());
    let run = run_experiment(&baseline_config(dir.path(), "run")).unwrap();
    for f in run.all_files() {
        assert!(f.is_file(), "missing {}", f.display());
    }
    assert_eq!(run.member_files.len(), 6);
    assert_eq!(run.ensemble_files.len(), 2);
    assert!(run.out_dir.join("vocabulary.txt").is_file());
    assert!(run.out_dir.join("models/svc-seed1.model").is_file());
    let sel = run.selection_report.as_ref().unwrap();
    assert!(sel.fake.f1 > 0.8, "synthetic data should be easy: {}", sel.fake.f1);
    assert!(run.test_report.is_some());

    let ens = load_predictions(run.out_dir.join("ensemble.test.tsv")).unwrap();
    assert_eq!(ens.len(), 60);
    let json: serde_json::Value = serde_json::from_slice(&read(&run.report_json)).unwrap();
    assert_eq!(json["ensemble"], "svc-seed1+svc-seed2+svc-seed3");
    assert!(json["test"]["weighted_f1"].as_f64().is_some());
}

#[test]
fn reruns_are_byte_identical_and_the_snapshot_reproduces_them() {
    let dir = tempfile::tempdir().unwrap();
    write_data(dir.path());
    let a = run_experiment(&baseline_config(dir.path(), "a")).unwrap();
    let b = run_experiment(&baseline_config(dir.path(), "b")).unwrap();
    let compared: Vec<_> = a
        .all_files()
        .into_iter()
        .filter(|p| p.file_name().unwrap() != "config.toml")
        .map(|p| p.strip_prefix(&a.out_dir).unwrap().to_path_buf())
        .collect();
    assert!(compared.len() >= 10);
    for rel in &compared {
        assert_eq!(read(&a.out_dir.join(rel)), read(&b.out_dir.join(rel)), "{}", rel.display());
    }

    let before: Vec<Vec<u8>> = compared.iter().map(|r| read(&a.out_dir.join(r))).collect();
    let snapshot = ExperimentConfig::load(&a.config_snapshot).unwrap();
    let again = run_experiment(&snapshot).unwrap();
    assert_eq!(again.out_dir, a.out_dir);
    for (rel, old) in compared.iter().zip(&before) {
        assert_eq!(&read(&a.out_dir.join(rel)), old, "{}", rel.display());
    }
}

#[test]
fn holdout_with_auxiliary_data_selects_the_best_members() {
    let dir = tempfile::tempdir().unwrap();
    write_data(dir.path());
    let mut cfg = baseline_config(dir.path(), "holdout");
    cfg.split = SplitMode::Holdout;
    cfg.holdout_n = 100;
    cfg.split_seed = 7;
    cfg.aux_coaid = Some(dir.path().join("coaid.tsv"));
    cfg.k = 2;
    let run = run_experiment(&cfg).unwrap();
    assert_eq!(run.members.iter().filter(|m| m.selected).count(), 2);
    let best_unselected = run
        .members
        .iter()
        .filter(|m| !m.selected)
        .map(|m| m.selection_f1_fake.unwrap())
        .fold(f64::MIN, f64::max);
    assert!(run
        .members
        .iter()
        .filter(|m| m.selected)
        .all(|m| m.selection_f1_fake.unwrap() >= best_unselected));
    let sel = load_predictions(run.out_dir.join("ensemble.selection.tsv")).unwrap();
    assert_eq!(sel.len(), 100);
    assert_eq!(cfg.additional_data(), "CoAID");
}

#[test]
fn pooled_training_without_holdout_uses_every_member() {
    let dir = tempfile::tempdir().unwrap();
    write_data(dir.path());
    let mut cfg = baseline_config(dir.path(), "pooled");
    cfg.split = SplitMode::Holdout;
    cfg.holdout_n = 0;
    let run = run_experiment(&cfg).unwrap();
    assert!(run.selection_report.is_none());
    assert!(run.members.iter().all(|m| m.selected));
    cfg.k = 2;
    let err = run_experiment(&cfg).unwrap_err();
    assert_eq!(err.stage, Stage::Select);
}

fn member(id: &str, ids: &[String], fake: &[bool]) -> PredictionSet {
    PredictionSet::from_records(
        id,
        ids.iter().zip(fake).map(|(i, &f)| PredictionRecord {
            id: i.clone(),
            label: if f { Label::Fake } else { Label::Real },
            score: None,
        }),
    )
    .unwrap()
}

#[test]
fn external_members_vote_by_hand_computed_majority() {
    let dir = tempfile::tempdir().unwrap();
    write_data(dir.path());
    let val = infodemic::corpus::load_dataset(dir.path().join("val.tsv"), true).unwrap();
    let test = infodemic::corpus::load_dataset(dir.path().join("test.tsv"), false).unwrap();
    let gold_val: Vec<bool> = val.iter().map(|p| p.label == Some(Label::Fake)).collect();
    let val_ids: Vec<String> = val.iter().map(|p| p.id.clone()).collect();
    let test_ids: Vec<String> = test.iter().map(|p| p.id.clone()).collect();
    // member i is wrong on posts where index % 3 == i, so every majority is right
    let wrong = |i: usize, gold: &[bool]| -> Vec<bool> {
        gold.iter().enumerate().map(|(j, &g)| if j % 3 == i { !g } else { g }).collect()
    };
    let gold_test: Vec<bool> = test.iter().map(|p| p.label == Some(Label::Fake)).collect();
    let mut cfg_src = String::from(
        "name = \"external\"\nmodel = \"external\"\ntrain = \"train.tsv\"\nvalidation = \"val.tsv\"\ntest = \"test.tsv\"\nsplit = \"official\"\nk = 3\nout = \"ext\"\n",
    );
    let (mut vals, mut tests) = (Vec::new(), Vec::new());
    for i in 0..3 {
        let name = format!("model{i}");
        fs::write(
            dir.path().join(format!("{name}.val.tsv")),
            render_predictions(&member(&name, &val_ids, &wrong(i, &gold_val))),
        )
        .unwrap();
        fs::write(
            dir.path().join(format!("{name}.test.tsv")),
            render_predictions(&member(&name, &test_ids, &wrong(i, &gold_test))),
        )
        .unwrap();
        vals.push(format!("\"{name}.val.tsv\""));
        tests.push(format!("\"{name}.test.tsv\""));
    }
    cfg_src.push_str(&format!(
        "external_validation = [{}]\nexternal_test = [{}]\n",
        vals.join(", "),
        tests.join(", ")
    ));
    let path = dir.path().join("ext.toml");
    fs::write(&path, cfg_src).unwrap();
    let cfg = ExperimentConfig::load(&path).unwrap();
    assert_eq!(cfg.model, ModelKind::External);
    let run = run_experiment(&cfg).unwrap();
    assert_eq!(run.selection_report.as_ref().unwrap().weighted_f1, 1.0);
    assert_eq!(run.test_report.as_ref().unwrap().weighted_f1, 1.0);
    let ens = load_predictions(run.out_dir.join("ensemble.test.tsv")).unwrap();
    for (rec, &g) in ens.records().iter().zip(&gold_test) {
        assert_eq!(rec.label == Label::Fake, g);
        assert_eq!(rec.score, Some(if g { 2.0 / 3.0 } else { 1.0 / 3.0 }).map(|s: f64| (s * 1e6).round() / 1e6));
    }
}

#[test]
fn failures_name_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    write_data(dir.path());
    let mut cfg = baseline_config(dir.path(), "bad");
    cfg.train = dir.path().join("missing.tsv");
    let err = run_experiment(&cfg).unwrap_err();
    assert_eq!(err.stage, Stage::Load);
    assert!(err.to_string().starts_with("[load] "), "{err}");

    let unlabeled = Corpus::new(
        "u",
        vec![Post {
            id: "1".into(),
            text: "text".into(),
            label: None,
            source: infodemic::corpus::Source::Task,
        }],
    )
    .unwrap();
    save_corpus(&unlabeled, dir.path().join("test.tsv")).unwrap();
    let cfg = baseline_config(dir.path(), "bad2");
    let err = run_experiment(&cfg).unwrap_err();
    assert_eq!(err.stage, Stage::Evaluate);
}

#[test]
fn ablation_rows_mirror_the_config() {
    let dir = tempfile::tempdir().unwrap();
    write_data(dir.path());
    let a = baseline_config(dir.path(), "abl1");
    let mut b = baseline_config(dir.path(), "abl2");
    b.aux_coaid = Some(dir.path().join("coaid.tsv"));
    let rows = ablation_table(&[a, b]).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].model, "LinearSVC");
    assert_eq!(rows[0].description, "converting into a bag of words");
    assert_eq!(rows[1].additional_data, "CoAID");
    let table = render_ablation_table(&rows);
    assert_eq!(table.lines().count(), 3);
    assert!(table.contains(&format!("{:.2}", rows[0].f1_fake * 100.0)));
}
