//! `cascade`: synthesize, ingest, featurize and classify information
//! cascades from the command line.
//!
//! Exit codes: 0 on success, 1 when the input or configuration fails
//! validation, 2 on any runtime error.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;
use sha2::{Digest, Sha256};

use cascade_core::builder::{build_final_graph, build_snapshot, DEFAULT_HORIZON_MINUTES, DEFAULT_STEP_MINUTES};
use cascade_core::classify::{ClassifierKind, HyperParams};
use cascade_core::eval::{
    format_table, run_early_stage, run_final_stage, write_curves_csv, write_metrics_json, write_roc_csv,
    ExperimentConfig, ExperimentReport, Scenario,
};
use cascade_core::features::extract_dataset;
use cascade_core::io::{load_dataset, write_early_features, write_final_features, write_graph_dump, DatasetPaths};
use cascade_core::model::validate_dataset;
use cascade_core::synth::{gen_dataset_with, write_dataset, Preset, PresetConfig};
use cascade_core::{CascadeDataset, Execution, Label};

#[derive(Parser, Debug)]
#[command(name = "cascade", version, about = "Information-cascade analytics: graphs, features and classifiers")]
struct Cli {
    /// Worker threads for data-parallel stages (0 = one per core, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic labelled dataset.
    Synth(SynthArgs),
    /// Load and validate a dataset, printing a summary.
    Ingest(InputArgs),
    /// Write final-stage and/or early-stage feature matrices.
    Features(FeaturesArgs),
    /// Run the early- or final-stage classification experiment.
    Experiment(ExperimentArgs),
    /// Print propagation graphs in the dump format.
    DumpGraph(DumpArgs),
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    #[arg(long)]
    posts: PathBuf,
    #[arg(long)]
    interactions: PathBuf,
    #[arg(long)]
    friendships: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_enum, default_value_t = PresetArg::Null)]
    preset: PresetArg,
    /// TOML file overriding the bundled preset parameters.
    #[arg(long)]
    preset_config: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    n_per_class: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Snapshot step in minutes.
    #[arg(long, default_value_t = DEFAULT_STEP_MINUTES)]
    step: u32,
    /// Observation horizon in minutes.
    #[arg(long, default_value_t = DEFAULT_HORIZON_MINUTES)]
    horizon: u32,
}

#[derive(Args, Debug)]
struct FeaturesArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = FeatureMode::Both)]
    mode: FeatureMode,
    /// Comma-separated δ values (minutes) for early features; defaults to
    /// every step up to the horizon.
    #[arg(long, value_delimiter = ',')]
    deltas: Vec<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = ScenarioArg::Final)]
    scenario: ScenarioArg,
    #[arg(long, value_delimiter = ',', default_values_t = ["ld".to_string(), "rf".to_string(), "mlp".to_string()])]
    classifiers: Vec<String>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Only this post (default: every post).
    #[arg(long)]
    post_id: Option<String>,
    /// Snapshot at δ minutes instead of the final graph.
    #[arg(long)]
    delta: Option<u32>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PresetArg {
    Separable,
    Null,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum FeatureMode {
    Final,
    Early,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum ScenarioArg {
    Early,
    Final,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<cascade_core::CascadeError> for Failure {
    fn from(e: cascade_core::CascadeError) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Everything that determines an experiment's results. Output location and
/// worker count only affect where and how fast, so they are not part of it.
#[derive(Debug, Serialize)]
struct RunConfig {
    posts: PathBuf,
    interactions: PathBuf,
    friendships: PathBuf,
    scenario: Scenario,
    classifiers: Vec<ClassifierKind>,
    step_minutes: u32,
    horizon_minutes: u32,
    folds: usize,
    repetitions: usize,
    seed: u64,
    hyperparameters: HyperParams,
}

impl RunConfig {
    fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            classifiers: self.classifiers.clone(),
            folds: self.folds,
            repetitions: self.repetitions,
            seed: self.seed,
            step_minutes: self.step_minutes,
            horizon_minutes: self.horizon_minutes,
            hyper: self.hyperparameters.clone(),
        }
    }
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    config_hash: &'a str,
    config: &'a RunConfig,
    report: &'a ExperimentReport,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let exec = match configure_workers(cli.workers) {
        Ok(e) => e,
        Err(e) => return report_failure(Failure::Runtime(e)),
    };
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a, exec),
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Features(a) => cmd_features(a, exec),
        Command::Experiment(a) => cmd_experiment(a, exec),
        Command::DumpGraph(a) => cmd_dump_graph(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report_failure(f),
    }
}

fn report_failure(f: Failure) -> ExitCode {
    match f {
        Failure::Validation(msg) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(1)
        }
        Failure::Runtime(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_workers(workers: usize) -> Result<Execution> {
    if workers == 1 {
        return Ok(Execution::Sequential);
    }
    #[cfg(feature = "parallel")]
    if workers > 1 {
        rayon::ThreadPoolBuilder::new().num_threads(workers).build_global().context("building worker pool")?;
    }
    Ok(Execution::Parallel)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().with_context(|| format!("writing {}", path.display()))
}

fn load(input: &InputArgs) -> std::result::Result<CascadeDataset, Failure> {
    let paths = DatasetPaths { posts: &input.posts, interactions: &input.interactions, friendships: &input.friendships };
    Ok(load_dataset(&paths)?)
}

/// Loads and validates; violations are a validation failure.
fn load_valid(input: &InputArgs) -> std::result::Result<CascadeDataset, Failure> {
    let ds = load(input)?;
    let report = validate_dataset(&ds.posts, &ds.interactions, &ds.friends);
    for w in &report.warnings {
        warn!("{w}");
    }
    if !report.is_accepted() {
        let lines: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        return Err(Failure::Validation(format!("{} violation(s):\n  {}", lines.len(), lines.join("\n  "))));
    }
    Ok(ds)
}

fn cmd_synth(a: SynthArgs, exec: Execution) -> CmdResult {
    let cfg = match &a.preset_config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            PresetConfig::from_toml(&text).map_err(|e| Failure::Validation(e.to_string()))?
        }
        None => match a.preset {
            PresetArg::Separable => Preset::Separable.config(),
            PresetArg::Null => Preset::Null.config(),
        },
    };
    let ds = gen_dataset_with(&cfg, a.n_per_class, a.seed, exec).map_err(|e| Failure::Validation(e.to_string()))?;
    write_dataset(&ds, &a.out)?;
    println!(
        "wrote {} posts ({} science, {} conspiracy), {} interactions, {} friendships to {}",
        ds.posts.len(),
        ds.count_by_label(Label::Science),
        ds.count_by_label(Label::Conspiracy),
        ds.interactions.len(),
        ds.friends.n_edges(),
        a.out.display()
    );
    Ok(())
}

fn cmd_ingest(input: &InputArgs) -> CmdResult {
    let ds = load(input)?;
    let report = validate_dataset(&ds.posts, &ds.interactions, &ds.friends);
    if ds.posts.is_empty() {
        warn!("dataset has no posts");
    }
    println!(
        "{} posts: {} science, {} conspiracy",
        ds.posts.len(),
        ds.count_by_label(Label::Science),
        ds.count_by_label(Label::Conspiracy)
    );
    let untimed = ds.interactions.iter().filter(|i| i.timestamp.is_none()).count();
    println!("{} interactions ({} untimed)", ds.interactions.len(), untimed);
    println!("{} users, {} friendship edges", ds.friends.n_users(), ds.friends.n_edges());
    for w in &report.warnings {
        println!("warning: {w}");
    }
    for v in &report.violations {
        println!("violation: {v}");
    }
    if report.is_accepted() {
        println!("validation: ok");
        Ok(())
    } else {
        Err(Failure::Validation(format!("{} violation(s)", report.violations.len())))
    }
}

fn cmd_features(a: FeaturesArgs, exec: Execution) -> CmdResult {
    let ds = load_valid(&a.input)?;
    let table = extract_dataset(&ds, a.grid.step, a.grid.horizon, exec).map_err(|e| Failure::Validation(e.to_string()))?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    #[derive(Serialize)]
    struct FeatureConfig<'a> {
        posts: &'a Path,
        interactions: &'a Path,
        friendships: &'a Path,
        step_minutes: u32,
        horizon_minutes: u32,
    }
    let hash = hex::encode(Sha256::digest(
        serde_json::to_string(&FeatureConfig {
            posts: &a.input.posts,
            interactions: &a.input.interactions,
            friendships: &a.input.friendships,
            step_minutes: a.grid.step,
            horizon_minutes: a.grid.horizon,
        })
        .expect("config serializes"),
    ));
    let comment = format!("config_hash={hash}");
    if a.mode != FeatureMode::Early {
        let path = a.out.join("features.csv");
        let mut w = create(&path)?;
        write_final_features(&mut w, &table, Some(&comment))?;
        finish(w, &path)?;
        info!("wrote {}", path.display());
    }
    if a.mode != FeatureMode::Final {
        let deltas: Vec<u32> = if a.deltas.is_empty() {
            (1..=table.n_steps() as u32).map(|i| i * a.grid.step).collect()
        } else {
            a.deltas.clone()
        };
        let path = a.out.join("early_features.csv");
        let mut w = create(&path)?;
        write_early_features(&mut w, &table, &deltas, Some(&comment)).map_err(|e| Failure::Validation(e.to_string()))?;
        finish(w, &path)?;
        info!("wrote {}", path.display());
    }
    println!("features for {} posts written to {} (config_hash={hash})", table.posts.len(), a.out.display());
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs, exec: Execution) -> CmdResult {
    let classifiers = a
        .classifiers
        .iter()
        .map(|s| s.parse::<ClassifierKind>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(Failure::Validation)?;
    let config = RunConfig {
        posts: a.input.posts.clone(),
        interactions: a.input.interactions.clone(),
        friendships: a.input.friendships.clone(),
        scenario: match a.scenario {
            ScenarioArg::Early => Scenario::Early,
            ScenarioArg::Final => Scenario::Final,
        },
        classifiers,
        step_minutes: a.grid.step,
        horizon_minutes: a.grid.horizon,
        folds: a.folds,
        repetitions: a.reps,
        seed: a.seed,
        hyperparameters: HyperParams::default(),
    };
    let exp = config.experiment();
    exp.validate().map_err(|e| Failure::Validation(e.to_string()))?;
    let hash = config.hash();
    info!("config_hash={hash}");

    let ds = load_valid(&a.input)?;
    let table = extract_dataset(&ds, config.step_minutes, config.horizon_minutes, exec)?;
    let report = match config.scenario {
        Scenario::Final => run_final_stage(&table, &exp, exec)?,
        Scenario::Early => run_early_stage(&table, &exp, exec)?,
    };

    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let comment = format!("config_hash={hash}");
    let path = a.out.join("metrics.json");
    let mut w = create(&path)?;
    write_metrics_json(&mut w, &MetricsFile { config_hash: &hash, config: &config, report: &report })?;
    finish(w, &path)?;
    match config.scenario {
        Scenario::Early => {
            let path = a.out.join("curves_early.csv");
            let mut w = create(&path)?;
            write_curves_csv(&mut w, &report, Some(&comment))?;
            finish(w, &path)?;
        }
        Scenario::Final => {
            let path = a.out.join("roc.csv");
            let mut w = create(&path)?;
            write_roc_csv(&mut w, &report, Some(&comment))?;
            finish(w, &path)?;
        }
    }

    println!("{} stage, {} posts ({} conspiracy), config_hash={hash}", config.scenario.as_str(), report.n_posts, report.n_conspiracy);
    if let Some(results) = &report.final_stage {
        for r in results {
            println!(
                "{:<4} full-dataset AUC {:.3}  kappa {:.3}",
                r.classifier.display_name(),
                r.full_mean.auc,
                r.full_mean.kappa_scaled
            );
        }
    }
    if let Some(last) = report.early_stage.as_ref().and_then(|s| s.last()) {
        println!("balanced pass at δ = {} minutes:", last.delta_minutes);
    } else {
        println!("balanced pass ({} repetitions × {}-fold):", report.repetitions, report.folds);
    }
    print!("{}", format_table(&report.table()));
    println!("artifacts written to {}", a.out.display());
    Ok(())
}

fn cmd_dump_graph(a: DumpArgs) -> CmdResult {
    let ds = load(&a.input)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut found = false;
    for c in ds.cascades() {
        if a.post_id.as_deref().is_some_and(|id| id != c.post.post_id) {
            continue;
        }
        found = true;
        let its = c.interactions.iter().copied();
        let g = match a.delta {
            Some(d) => build_snapshot(c.post, its, &ds.friends, d)?,
            None => build_final_graph(c.post, its, &ds.friends)?,
        };
        write_graph_dump(&mut out, &g)?;
    }
    if let (Some(id), false) = (&a.post_id, found) {
        return Err(Failure::Validation(format!("unknown post {id}")));
    }
    Ok(())
}
