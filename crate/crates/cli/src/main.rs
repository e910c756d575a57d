use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use infodemic::corpus;
use infodemic::ensemble::{self, EnsembleConfig, PredictionSet, TieRule};
use infodemic::experiment::{
    self, ablation_table, render_ablation_table, BaselineModel, ExperimentConfig, ExperimentError, ModelKind,
    Stage, TrainingSet,
};
use infodemic::metrics;
use infodemic::preprocess::{apply_pipeline, normalize_baseline, StopWords};

#[derive(Parser)]
#[command(name = "infodemic", version, about = "COVID-19 fake news detection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a config's preprocessing to the text column of a dataset file.
    Preprocess {
        #[arg(long)]
        config: PathBuf,
        /// Dataset TSV to rewrite.
        #[arg(long)]
        input: PathBuf,
        /// Emit the baseline's space-joined stemmed tokens instead of rewritten text.
        #[arg(long)]
        tokens: bool,
        /// Output directory (defaults to the config's `out`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one baseline model on the config's training split.
    TrainBaseline {
        #[arg(long)]
        config: PathBuf,
        /// Training seed (defaults to the first seed in the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Model directory (defaults to `<out>/model-seed<seed>`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a dataset file with a trained baseline model.
    Predict {
        /// Model directory written by `train-baseline`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Model id written into the output file name (defaults to the model directory name).
        #[arg(long)]
        id: Option<String>,
        /// Output directory; the file is `<out>/<id>.tsv`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Hard-vote prediction files that cover the same ids.
    Ensemble {
        /// Member prediction files (repeat the flag).
        #[arg(long = "member", required = true)]
        members: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "prefer-real")]
        tie_rule: TieArg,
        /// Output directory for `ensemble.tsv`; prints to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predictions against a labeled dataset file.
    Evaluate {
        /// Labeled dataset TSV.
        #[arg(long)]
        gold: PathBuf,
        /// Prediction file.
        #[arg(long)]
        pred: PathBuf,
        /// Directory for `report.json`, `report.txt` and `errors.tsv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several configs and print a fake-class F1 table.
    Report {
        /// Experiment configs (repeat the flag), one table row each.
        #[arg(long = "config", required = true)]
        configs: Vec<PathBuf>,
        /// Directory for `ablation.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one experiment end to end.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `split_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    PreferReal,
    MeanScore,
}

impl From<TieArg> for TieRule {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::PreferReal => TieRule::PreferReal,
            TieArg::MeanScore => TieRule::MeanScore,
        }
    }
}

type Result<T> = std::result::Result<T, ExperimentError>;

fn at<T, E: Into<experiment::BoxError>>(r: std::result::Result<T, E>, stage: Stage) -> Result<T> {
    r.map_err(|e| ExperimentError {
        stage,
        source: e.into(),
    })
}

fn write(path: &Path, body: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        at(fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display())), Stage::Write)?;
    }
    at(fs::write(path, body).map_err(|e| format!("{}: {e}", path.display())), Stage::Write)
}

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    at(ExperimentConfig::load(path), Stage::Config)
}

fn preprocess(config: &Path, input: &Path, tokens: bool, out: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(config)?;
    let corpus = at(corpus::load_dataset(input, false), Stage::Load)?;
    let pp = cfg.preprocess();
    let stopwords = StopWords::builtin();
    let rewritten = corpus.map_text(|t| {
        let text = apply_pipeline(t, &pp);
        if tokens {
            normalize_baseline(&text, stopwords).0.join(" ")
        } else {
            text
        }
    });
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let path = out.unwrap_or(cfg.out).join(format!("{stem}.preprocessed.tsv"));
    write(&path, at(corpus::render_corpus(&rewritten), Stage::Write)?)?;
    println!("{}", path.display());
    Ok(())
}

fn train_baseline(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(config)?;
    if cfg.model != ModelKind::BaselineSvc {
        return at(Err("train-baseline needs model = \"baseline_svc\""), Stage::Config);
    }
    let seed = seed.or(cfg.seeds.first().copied()).unwrap_or(0);
    let splits = experiment::load_splits(&cfg)?;
    let pp = cfg.preprocess();
    let training = at(TrainingSet::build(&splits.fit, &pp, cfg.max_features), Stage::Train)?;
    let model = at(training.train(&pp, &cfg.hyper(seed)), Stage::Train)?;
    let dir = out.unwrap_or_else(|| cfg.out.join(format!("model-seed{seed}")));
    at(model.save(&dir), Stage::Write)?;
    if let Some(sel) = &splits.selection {
        let preds = at(model.predict_corpus(sel, &format!("svc-seed{seed}")), Stage::Predict)?;
        let (gold, pred) = at(metrics::align_complete(sel, &preds), Stage::Evaluate)?;
        let report = at(metrics::evaluate(&gold, &pred), Stage::Evaluate)?;
        println!("selection split F1(fake) {:.2}", report.fake.f1 * 100.0);
    }
    println!("{}", dir.display());
    Ok(())
}

fn predict(model_dir: &Path, input: &Path, id: Option<String>, out: &Path) -> Result<()> {
    let model = at(BaselineModel::load(model_dir), Stage::Load)?;
    let corpus = at(corpus::load_dataset(input, false), Stage::Load)?;
    let id = id.unwrap_or_else(|| {
        model_dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".into())
    });
    let set = at(model.predict_corpus(&corpus, &id), Stage::Predict)?;
    let path = out.join(format!("{id}.tsv"));
    write(&path, ensemble::render_predictions(&set))?;
    println!("{}", path.display());
    Ok(())
}

fn run_ensemble(paths: &[PathBuf], tie_rule: TieRule, out: Option<PathBuf>) -> Result<()> {
    let sets: Vec<PredictionSet> = paths
        .iter()
        .map(|p| at(ensemble::load_predictions(p), Stage::Load))
        .collect::<Result<_>>()?;
    let combined = at(
        ensemble::combine(&EnsembleConfig {
            members: sets.iter().collect(),
            tie_rule,
        }),
        Stage::Ensemble,
    )?;
    let body = ensemble::render_predictions(&combined);
    match out {
        Some(dir) => {
            let path = dir.join("ensemble.tsv");
            write(&path, body)?;
            println!("{}", path.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn evaluate(gold: &Path, pred: &Path, out: Option<PathBuf>) -> Result<()> {
    let corpus = at(corpus::load_dataset(gold, true), Stage::Load)?;
    let preds = at(ensemble::load_predictions(pred), Stage::Load)?;
    let (g, p) = at(metrics::align_complete(&corpus, &preds), Stage::Evaluate)?;
    let report = at(metrics::evaluate(&g, &p), Stage::Evaluate)?;
    print!("{report}");
    if let Some(dir) = out {
        let rows = at(metrics::error_report(&corpus, &preds), Stage::Evaluate)?;
        write(&dir.join("report.json"), report.to_json() + "\n")?;
        write(&dir.join("report.txt"), report.to_string())?;
        write(&dir.join("errors.tsv"), metrics::render_error_report(&rows))?;
    }
    Ok(())
}

fn report(configs: &[PathBuf], out: Option<PathBuf>) -> Result<()> {
    let cfgs: Vec<ExperimentConfig> = configs.iter().map(|p| load_config(p)).collect::<Result<_>>()?;
    let table = render_ablation_table(&ablation_table(&cfgs)?);
    print!("{table}");
    if let Some(dir) = out {
        write(&dir.join("ablation.txt"), table)?;
    }
    Ok(())
}

fn run(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.split_seed = s;
    }
    if let Some(o) = out {
        cfg.out = o;
    }
    let run = experiment::run_experiment(&cfg)?;
    let text = at(fs::read_to_string(&run.report_text), Stage::Write)?;
    print!("{text}");
    println!("\nartifacts: {}", run.out_dir.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess { config, input, tokens, out } => preprocess(&config, &input, tokens, out),
        Command::TrainBaseline { config, seed, out } => train_baseline(&config, seed, out),
        Command::Predict { model, input, id, out } => predict(&model, &input, id, &out),
        Command::Ensemble { members, tie_rule, out } => run_ensemble(&members, tie_rule.into(), out),
        Command::Evaluate { gold, pred, out } => evaluate(&gold, &pred, out),
        Command::Report { configs, out } => report(&configs, out),
        Command::Run { config, seed, out } => run(&config, seed, out),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&*e.source);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
