//! Final Stage and Early Stage experiment drivers.
//!
//! Both scenarios run two passes per feature matrix:
//!
//! * a full-dataset pass: stratified k-fold CV on every post, reporting
//!   AUC and scaled kappa (and, for the final stage, a pooled out-of-fold ROC);
//! * a balanced pass: `repetitions` rounds of majority undersampling, each
//!   followed by stratified k-fold CV, reporting precision/recall/accuracy/F1.
//!
//! Every (pass, repetition, fold, classifier) fit is an independent work
//! unit whose seed is derived from the master seed, so any schedule gives
//! bit-identical reports.

use log::info;
use serde::{Deserialize, Serialize};

use super::metrics::{auc, roc_curve, MetricSet, RocPoint};
use super::split::{stratified_kfold, undersample_balanced, Fold};
use crate::builder::{DEFAULT_HORIZON_MINUTES, DEFAULT_STEP_MINUTES};
use crate::classify::{fit_matrix, ClassifierKind, DenseMatrix, HyperParams};
use crate::error::{CascadeError, Result};
use crate::exec::{self, Execution};
use crate::features::FeatureTable;
use crate::model::Schema;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Early,
    Final,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Early => "early",
            Scenario::Final => "final",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "early" => Ok(Scenario::Early),
            "final" => Ok(Scenario::Final),
            other => Err(format!("unknown scenario {other:?} (expected early or final)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pass {
    Full,
    Balanced,
}

impl Pass {
    fn tag(self) -> u64 {
        match self {
            Pass::Full => seed::tag("full"),
            Pass::Balanced => seed::tag("balanced"),
        }
    }
}

/// Experiment protocol settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub classifiers: Vec<ClassifierKind>,
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub step_minutes: u32,
    pub horizon_minutes: u32,
    pub hyper: HyperParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            classifiers: ClassifierKind::ALL.to_vec(),
            folds: 5,
            repetitions: 10,
            seed: 0,
            step_minutes: DEFAULT_STEP_MINUTES,
            horizon_minutes: DEFAULT_HORIZON_MINUTES,
            hyper: HyperParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.classifiers.is_empty() {
            return Err(CascadeError::InvalidParams("no classifiers selected".into()));
        }
        if self.folds < 2 {
            return Err(CascadeError::InvalidParams(format!("folds must be >= 2, got {}", self.folds)));
        }
        if self.repetitions == 0 {
            return Err(CascadeError::InvalidParams("repetitions must be >= 1".into()));
        }
        crate::builder::check_step(self.step_minutes, self.horizon_minutes)?;
        Ok(())
    }
}

/// Metrics of one held-out fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldRecord {
    pub pass: Pass,
    pub repetition: usize,
    pub fold: usize,
    pub metrics: MetricSet,
}

/// All results of one classifier on one feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierResult {
    pub classifier: ClassifierKind,
    /// Mean over the full-pass folds (AUC and kappa are the headline values).
    pub full_mean: MetricSet,
    /// Mean over every balanced-pass fold of every repetition (precision,
    /// recall, accuracy and F1 are the headline values).
    pub balanced_mean: MetricSet,
    /// AUC of the out-of-fold scores pooled over the full pass (final stage).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pooled_auc: Option<f64>,
    /// ROC of the pooled out-of-fold scores (final stage).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub roc: Option<Vec<RocPoint>>,
    pub folds: Vec<FoldRecord>,
}

impl ClassifierResult {
    /// Recomputes both means from the stored fold records.
    pub fn rederived_means(&self) -> (MetricSet, MetricSet) {
        let of = |pass| self.folds.iter().filter(|f| f.pass == pass).map(|f| f.metrics).collect::<Vec<_>>();
        (MetricSet::mean(&of(Pass::Full)), MetricSet::mean(&of(Pass::Balanced)))
    }
}

/// Early-stage aggregates at one δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimestepResult {
    pub delta_minutes: u32,
    pub classifiers: Vec<ClassifierResult>,
}

/// Seeds actually used; every fit seed is further derived from `master`
/// and the unit's (δ, pass, repetition, fold, classifier) coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedLog {
    pub master: u64,
    pub full_split: u64,
    pub undersample: Vec<u64>,
    pub balanced_split: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: Scenario,
    pub schema: Schema,
    pub n_posts: usize,
    pub n_conspiracy: usize,
    pub n_science: usize,
    pub folds: usize,
    pub repetitions: usize,
    pub step_minutes: u32,
    pub horizon_minutes: u32,
    pub hyperparameters: HyperParams,
    pub seeds: SeedLog,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub final_stage: Option<Vec<ClassifierResult>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub early_stage: Option<Vec<TimestepResult>>,
}

/// One row of the precision/recall/accuracy/F1 summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub classifier: ClassifierKind,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub f1: f64,
}

/// One point of an early-stage curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub classifier: ClassifierKind,
    pub delta_minutes: u32,
    pub metric: &'static str,
    pub value: f64,
}

impl ExperimentReport {
    /// Balanced-pass summary: the final stage, or the last δ of the early
    /// stage.
    pub fn table(&self) -> Vec<TableRow> {
        let results = match (&self.final_stage, &self.early_stage) {
            (Some(r), _) => r.as_slice(),
            (None, Some(steps)) => steps.last().map_or(&[][..], |s| s.classifiers.as_slice()),
            (None, None) => &[],
        };
        results
            .iter()
            .map(|r| TableRow {
                classifier: r.classifier,
                precision: r.balanced_mean.precision,
                recall: r.balanced_mean.recall,
                accuracy: r.balanced_mean.accuracy,
                f1: r.balanced_mean.f1,
            })
            .collect()
    }

    /// Early-stage curves, classifier-major then δ then metric. AUC and
    /// kappa come from the full pass; the other four from the balanced pass.
    pub fn curves(&self) -> Vec<CurvePoint> {
        let Some(steps) = &self.early_stage else {
            return Vec::new();
        };
        let kinds: Vec<ClassifierKind> =
            steps.first().map(|s| s.classifiers.iter().map(|c| c.classifier).collect()).unwrap_or_default();
        let mut out = Vec::new();
        for (ci, &kind) in kinds.iter().enumerate() {
            for step in steps {
                let r = &step.classifiers[ci];
                let values = [
                    r.full_mean.auc,
                    r.full_mean.kappa_scaled,
                    r.balanced_mean.precision,
                    r.balanced_mean.recall,
                    r.balanced_mean.accuracy,
                    r.balanced_mean.f1,
                ];
                for (metric, value) in MetricSet::NAMES.into_iter().zip(values) {
                    out.push(CurvePoint { classifier: kind, delta_minutes: step.delta_minutes, metric, value });
                }
            }
        }
        out
    }
}

/// Fold assignments for both passes, in global row indices.
struct Plan {
    full: Vec<Fold>,
    balanced: Vec<Vec<Fold>>,
    seeds: SeedLog,
}

fn plan(labels: &[bool], cfg: &ExperimentConfig) -> Result<Plan> {
    let master = cfg.seed;
    let full_split = seed::derive(master, &[Pass::Full.tag()]);
    let full = stratified_kfold(labels, cfg.folds, full_split)?;
    let mut seeds = SeedLog { master, full_split, undersample: Vec::new(), balanced_split: Vec::new() };
    let mut balanced = Vec::with_capacity(cfg.repetitions);
    for rep in 0..cfg.repetitions {
        let us = seed::derive(master, &[seed::tag("undersample"), rep as u64]);
        let bs = seed::derive(master, &[Pass::Balanced.tag(), rep as u64]);
        let subset = undersample_balanced(labels, us)?;
        let sub_labels: Vec<bool> = subset.iter().map(|&i| labels[i]).collect();
        let folds = stratified_kfold(&sub_labels, cfg.folds, bs)?
            .into_iter()
            .map(|f| Fold {
                train: f.train.iter().map(|&j| subset[j]).collect(),
                test: f.test.iter().map(|&j| subset[j]).collect(),
            })
            .collect();
        balanced.push(folds);
        seeds.undersample.push(us);
        seeds.balanced_split.push(bs);
    }
    Ok(Plan { full, balanced, seeds })
}

#[derive(Debug, Clone, Copy)]
struct Unit {
    pass: Pass,
    repetition: usize,
    fold: usize,
    classifier: usize,
}

fn units(plan: &Plan, n_classifiers: usize) -> Vec<Unit> {
    let mut out = Vec::new();
    for classifier in 0..n_classifiers {
        for fold in 0..plan.full.len() {
            out.push(Unit { pass: Pass::Full, repetition: 0, fold, classifier });
        }
        for (repetition, folds) in plan.balanced.iter().enumerate() {
            for fold in 0..folds.len() {
                out.push(Unit { pass: Pass::Balanced, repetition, fold, classifier });
            }
        }
    }
    out
}

/// Runs every unit on one feature matrix and assembles per-classifier
/// results. `delta` keys the fit seeds (0 for the final stage).
fn evaluate_matrix(
    x: &DenseMatrix,
    schema: Schema,
    labels: &[bool],
    plan: &Plan,
    cfg: &ExperimentConfig,
    delta: u32,
    pooled: bool,
    exec: Execution,
) -> Result<Vec<ClassifierResult>> {
    let units = units(plan, cfg.classifiers.len());
    let outcomes = exec::try_map(exec, &units, |u| -> Result<(MetricSet, Vec<f64>)> {
        let fold = match u.pass {
            Pass::Full => &plan.full[u.fold],
            Pass::Balanced => &plan.balanced[u.repetition][u.fold],
        };
        let kind = cfg.classifiers[u.classifier];
        let fit_seed = seed::derive(
            cfg.seed,
            &[u64::from(delta), u.pass.tag(), u.repetition as u64, u.fold as u64, seed::tag(kind.as_str())],
        );
        let train_y: Vec<bool> = fold.train.iter().map(|&i| labels[i]).collect();
        let test_y: Vec<bool> = fold.test.iter().map(|&i| labels[i]).collect();
        let model = fit_matrix(kind, schema, &x.select(&fold.train), &train_y, fit_seed, &cfg.hyper)?;
        let scores = model.predict_matrix(&x.select(&fold.test))?;
        Ok((MetricSet::evaluate(&scores, &test_y)?, scores))
    })?;

    let mut results = Vec::with_capacity(cfg.classifiers.len());
    let mut it = units.iter().zip(outcomes).peekable();
    for (ci, &kind) in cfg.classifiers.iter().enumerate() {
        let mut folds = Vec::new();
        let mut oof = vec![f64::NAN; labels.len()];
        while let Some((u, _)) = it.peek() {
            if u.classifier != ci {
                break;
            }
            let (u, (metrics, scores)) = it.next().expect("peeked");
            if u.pass == Pass::Full {
                for (&i, s) in plan.full[u.fold].test.iter().zip(scores) {
                    oof[i] = s;
                }
            }
            folds.push(FoldRecord { pass: u.pass, repetition: u.repetition, fold: u.fold, metrics });
        }
        let mut r = ClassifierResult {
            classifier: kind,
            full_mean: MetricSet::default(),
            balanced_mean: MetricSet::default(),
            pooled_auc: None,
            roc: None,
            folds,
        };
        (r.full_mean, r.balanced_mean) = r.rederived_means();
        if pooled {
            r.pooled_auc = Some(auc(&oof, labels)?);
            r.roc = Some(roc_curve(&oof, labels)?);
        }
        results.push(r);
    }
    Ok(results)
}

fn report_shell(table: &FeatureTable, cfg: &ExperimentConfig, scenario: Scenario, schema: Schema, seeds: SeedLog) -> ExperimentReport {
    let labels = table.labels();
    let n_conspiracy = labels.iter().filter(|l| l.is_positive()).count();
    ExperimentReport {
        scenario,
        schema,
        n_posts: labels.len(),
        n_conspiracy,
        n_science: labels.len() - n_conspiracy,
        folds: cfg.folds,
        repetitions: cfg.repetitions,
        step_minutes: table.step_minutes,
        horizon_minutes: table.horizon_minutes,
        hyperparameters: cfg.hyper.clone(),
        seeds,
        final_stage: None,
        early_stage: None,
    }
}

fn bool_labels(table: &FeatureTable) -> Vec<bool> {
    table.posts.iter().map(|p| p.label.is_positive()).collect()
}

/// Final Stage: classification from the 28 features of the complete
/// propagation graphs.
pub fn run_final_stage(table: &FeatureTable, cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    cfg.validate()?;
    let labels = bool_labels(table);
    let plan = plan(&labels, cfg)?;
    let x = DenseMatrix::from_rows(&table.final_rows());
    let results = evaluate_matrix(&x, Schema::Final28, &labels, &plan, cfg, 0, true, exec)?;
    let mut report = report_shell(table, cfg, Scenario::Final, Schema::Final28, plan.seeds);
    report.final_stage = Some(results);
    Ok(report)
}

/// Early Stage at every δ = step, 2·step, …, horizon.
pub fn run_early_stage(table: &FeatureTable, cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentReport> {
    let deltas: Vec<u32> = (1..=table.n_steps() as u32).map(|i| i * table.step_minutes).collect();
    run_early_stage_at(table, cfg, &deltas, exec)
}

/// Early Stage restricted to the given δ values (each a multiple of the
/// table's step and at most its horizon). Features at δ use only the
/// snapshots up to δ, so results at δ do not depend on later interactions.
pub fn run_early_stage_at(
    table: &FeatureTable,
    cfg: &ExperimentConfig,
    deltas: &[u32],
    exec: Execution,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let labels = bool_labels(table);
    let plan = plan(&labels, cfg)?;
    let mut steps = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        if delta == 0 || delta % table.step_minutes != 0 || delta > table.horizon_minutes {
            return Err(CascadeError::InvalidStep { step: table.step_minutes, horizon: delta });
        }
        let n = (delta / table.step_minutes) as usize;
        let rows = table.early_rows(n)?;
        let x = DenseMatrix::from_rows(&rows.iter().map(|v| v.values()).collect::<Vec<_>>());
        let classifiers = evaluate_matrix(&x, Schema::Early18, &labels, &plan, cfg, delta, false, exec)?;
        info!("early stage δ={delta}: done");
        steps.push(TimestepResult { delta_minutes: delta, classifiers });
    }
    let mut report = report_shell(table, cfg, Scenario::Early, Schema::Early18, plan.seeds);
    report.early_stage = Some(steps);
    Ok(report)
}
