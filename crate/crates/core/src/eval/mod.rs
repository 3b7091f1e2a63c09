//! Imbalance-aware evaluation: metrics, stratified folds, undersampling, the
//! two experiment drivers and their report artifacts.

mod experiment;
mod metrics;
mod report;
mod split;

pub use experiment::{
    run_early_stage, run_early_stage_at, run_final_stage, ClassifierResult, CurvePoint, ExperimentConfig,
    ExperimentReport, FoldRecord, Pass, Scenario, SeedLog, TableRow, TimestepResult,
};
pub use metrics::{
    accuracy, auc, basic_metrics, f1, kappa_from_confusion, kappa_scaled, precision, recall, roc_area, roc_curve,
    BasicMetrics, Confusion, MetricSet, RocPoint,
};
pub use report::{format_table, write_curves_csv, write_metrics_json, write_roc_csv};
pub use split::{stratified_kfold, undersample_balanced, undersample_rows, Fold};
