//! Binary classifiers behind one contract: fit on labelled feature rows,
//! emit the probability of the positive (conspiracy) class.
//!
//! Inputs are standardised with parameters frozen at fit time for every
//! kind. Random forest and MLP scores depend on feature order; the linear
//! discriminant is invariant to a consistent permutation.

mod data;
mod forest;
mod lda;
mod mlp;

use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use data::{DenseMatrix, Standardizer};
pub use forest::{ForestModel, ForestParams, Node, Tree};
pub use lda::{LdaModel, LdaParams};
pub use mlp::{MlpModel, MlpParams};

use crate::error::{CascadeError, Result};
use crate::model::{FeatureVector, Label, Schema};

/// Magic first line of a saved model.
pub const MODEL_MAGIC: &str = "CASCADE-MODEL";
pub const MODEL_FORMAT_VERSION: u32 = 1;

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Ld,
    Rf,
    Mlp,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Ld, ClassifierKind::Rf, ClassifierKind::Mlp];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Ld => "ld",
            ClassifierKind::Rf => "rf",
            ClassifierKind::Mlp => "mlp",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ClassifierKind::Ld => "LD",
            ClassifierKind::Rf => "RF",
            ClassifierKind::Mlp => "MLP",
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ld" | "lda" => Ok(ClassifierKind::Ld),
            "rf" => Ok(ClassifierKind::Rf),
            "mlp" => Ok(ClassifierKind::Mlp),
            other => Err(format!("unknown classifier {other:?} (expected ld, rf or mlp)")),
        }
    }
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hyperparameters for all three kinds. The defaults are fixed so that
/// experiments are reproducible; override them through config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct HyperParams {
    pub ld: LdaParams,
    pub rf: ForestParams,
    pub mlp: MlpParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParams {
    Ld(LdaModel),
    Rf(ForestModel),
    Mlp(MlpModel),
}

/// An immutable fitted classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub schema: Schema,
    pub scaler: Standardizer,
    pub model: ModelParams,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match self.model {
            ModelParams::Ld(_) => ClassifierKind::Ld,
            ModelParams::Rf(_) => ClassifierKind::Rf,
            ModelParams::Mlp(_) => ClassifierKind::Mlp,
        }
    }

    /// Positive-class probabilities for raw (unstandardised) rows.
    pub fn predict_matrix(&self, x: &DenseMatrix) -> Result<Vec<f64>> {
        if x.n_rows() > 0 && x.n_cols() != self.schema.len() {
            return Err(CascadeError::SchemaMismatch {
                expected: self.schema.to_string(),
                found: format!("{} columns", x.n_cols()),
            });
        }
        let mut buf = vec![0.0; self.schema.len()];
        Ok(x.rows()
            .map(|r| {
                self.scaler.transform_row(r, &mut buf);
                match &self.model {
                    ModelParams::Ld(m) => m.proba(&buf),
                    ModelParams::Rf(m) => m.proba(&buf),
                    ModelParams::Mlp(m) => m.proba(&buf),
                }
            })
            .collect())
    }

    pub fn save(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "{MODEL_MAGIC} {MODEL_FORMAT_VERSION}").map_err(|e| CascadeError::io("<model>", e))?;
        serde_json::to_writer(&mut *w, self)?;
        writeln!(w).map_err(|e| CascadeError::io("<model>", e))?;
        Ok(())
    }

    pub fn load(r: &mut impl BufRead) -> Result<Self> {
        let mut header = String::new();
        r.read_line(&mut header).map_err(|e| CascadeError::io("<model>", e))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(MODEL_MAGIC) {
            return Err(CascadeError::ModelFormat("missing magic header".into()));
        }
        match parts.next().map(str::parse::<u32>) {
            Some(Ok(MODEL_FORMAT_VERSION)) => {}
            other => return Err(CascadeError::ModelFormat(format!("unsupported version {other:?}"))),
        }
        Ok(serde_json::from_reader(r)?)
    }

    pub fn save_to(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| CascadeError::io(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        self.save(&mut w)?;
        w.flush().map_err(|e| CascadeError::io(path, e))
    }

    pub fn load_from(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| CascadeError::io(path, e))?;
        Self::load(&mut std::io::BufReader::new(f))
    }
}

/// Fits a classifier on a raw matrix with boolean labels (true = positive).
pub fn fit_matrix(
    kind: ClassifierKind,
    schema: Schema,
    x: &DenseMatrix,
    y: &[bool],
    seed: u64,
    hp: &HyperParams,
) -> Result<TrainedModel> {
    if x.n_rows() != y.len() {
        return Err(CascadeError::LengthMismatch { left: x.n_rows(), right: y.len() });
    }
    if x.n_cols() != schema.len() {
        return Err(CascadeError::SchemaMismatch { expected: schema.to_string(), found: format!("{} columns", x.n_cols()) });
    }
    let pos = y.iter().filter(|&&b| b).count();
    let neg = y.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(CascadeError::SingleClassTraining);
    }
    if pos < 2 || neg < 2 {
        let (class, count) = if pos < 2 { ("conspiracy", pos) } else { ("science", neg) };
        return Err(CascadeError::TooFewSamples { class, count, needed: 2 });
    }
    let scaler = Standardizer::fit(x);
    let z = scaler.transform(x);
    let model = match kind {
        ClassifierKind::Ld => ModelParams::Ld(LdaModel::fit(&z, y, &hp.ld)?),
        ClassifierKind::Rf => ModelParams::Rf(ForestModel::fit(&z, y, &hp.rf, seed)?),
        ClassifierKind::Mlp => ModelParams::Mlp(MlpModel::fit(&z, y, &hp.mlp, seed)?),
    };
    Ok(TrainedModel { schema, scaler, model })
}

fn common_schema<'a>(mut rows: impl Iterator<Item = &'a FeatureVector>) -> Result<Schema> {
    let first = rows.next().ok_or(CascadeError::SingleClassTraining)?.schema();
    for r in rows {
        if r.schema() != first {
            return Err(CascadeError::SchemaMismatch { expected: first.to_string(), found: r.schema().to_string() });
        }
    }
    Ok(first)
}

/// Fits `kind` on labelled feature vectors sharing one schema.
pub fn fit(kind: ClassifierKind, rows: &[(FeatureVector, Label)], seed: u64, hp: &HyperParams) -> Result<TrainedModel> {
    let schema = common_schema(rows.iter().map(|(v, _)| v))?;
    let x = DenseMatrix::from_rows(&rows.iter().map(|(v, _)| v.values()).collect::<Vec<_>>());
    let y: Vec<bool> = rows.iter().map(|(_, l)| l.is_positive()).collect();
    fit_matrix(kind, schema, &x, &y, seed, hp)
}

/// Positive-class (conspiracy) probabilities.
pub fn predict_proba(model: &TrainedModel, rows: &[FeatureVector]) -> Result<Vec<f64>> {
    for r in rows {
        if r.schema() != model.schema {
            return Err(CascadeError::SchemaMismatch { expected: model.schema.to_string(), found: r.schema().to_string() });
        }
    }
    let x = DenseMatrix::from_rows(&rows.iter().map(FeatureVector::values).collect::<Vec<_>>());
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    model.predict_matrix(&x)
}

/// Hard labels at the 0.5 threshold (score ≥ 0.5 → positive).
pub fn threshold(scores: &[f64]) -> Vec<bool> {
    scores.iter().map(|&s| s >= 0.5).collect()
}
