//! Report artifacts: `metrics.json`, `curves_early.csv`, `roc.csv` and the
//! printed summary table.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use super::experiment::{ExperimentReport, TableRow};
use crate::error::{CascadeError, Result};

fn io_err(e: std::io::Error) -> CascadeError {
    CascadeError::io("<report>", e)
}

fn comment_line(w: &mut impl Write, comment: Option<&str>) -> Result<()> {
    if let Some(c) = comment {
        writeln!(w, "# {c}").map_err(io_err)?;
    }
    Ok(())
}

/// Pretty-printed JSON followed by a newline.
pub fn write_metrics_json(w: &mut impl Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    w.write_all(b"\n").map_err(io_err)
}

/// `classifier,delta,metric,value`, one row per classifier × δ × metric.
pub fn write_curves_csv(w: &mut impl Write, report: &ExperimentReport, comment: Option<&str>) -> Result<()> {
    comment_line(w, comment)?;
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["classifier", "delta", "metric", "value"])?;
    for p in report.curves() {
        wtr.write_record([p.classifier.as_str(), &p.delta_minutes.to_string(), p.metric, &p.value.to_string()])?;
    }
    wtr.flush().map_err(io_err)
}

/// `classifier,threshold,fpr,tpr` for the pooled final-stage ROC curves.
pub fn write_roc_csv(w: &mut impl Write, report: &ExperimentReport, comment: Option<&str>) -> Result<()> {
    comment_line(w, comment)?;
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["classifier", "threshold", "fpr", "tpr"])?;
    for r in report.final_stage.iter().flatten() {
        for p in r.roc.iter().flatten() {
            wtr.write_record([r.classifier.as_str(), &p.threshold.to_string(), &p.fpr.to_string(), &p.tpr.to_string()])?;
        }
    }
    wtr.flush().map_err(io_err)
}

/// Fixed-width rendering of the precision/recall/accuracy/F1 table.
pub fn format_table(rows: &[TableRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<6}{:>10}{:>10}{:>10}{:>10}", "", "Precision", "Recall", "Accuracy", "F1");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<6}{:>10.3}{:>10.3}{:>10.3}{:>10.3}",
            r.classifier.display_name(),
            r.precision,
            r.recall,
            r.accuracy,
            r.f1
        );
    }
    s
}
