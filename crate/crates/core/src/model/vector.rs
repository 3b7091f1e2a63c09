use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};

/// Early-stage schema: six summary statistics for each of the three evolution
/// series, in series-major order.
pub const EARLY_FEATURE_NAMES: [&str; 18] = [
    "evo_friendships_ratio_mean",
    "evo_friendships_ratio_lin_weighted_mean",
    "evo_friendships_ratio_quad_weighted_mean",
    "evo_friendships_ratio_std_dev",
    "evo_friendships_ratio_avg_abs_change",
    "evo_friendships_ratio_max",
    "evo_size_mean",
    "evo_size_lin_weighted_mean",
    "evo_size_quad_weighted_mean",
    "evo_size_std_dev",
    "evo_size_avg_abs_change",
    "evo_size_max",
    "evo_interactions_ratio_mean",
    "evo_interactions_ratio_lin_weighted_mean",
    "evo_interactions_ratio_quad_weighted_mean",
    "evo_interactions_ratio_std_dev",
    "evo_interactions_ratio_avg_abs_change",
    "evo_interactions_ratio_max",
];

/// Final-stage schema: five high-level, five topological, then the 18
/// evolution features computed over the full horizon.
pub const FINAL_FEATURE_NAMES: [&str; 28] = [
    "size",
    "friendships_ratio",
    "interactions_ratio",
    "lifetime_minutes",
    "time_to_90pct_minutes",
    "avg_degree",
    "clustering_coefficient",
    "assortativity",
    "avg_path_length",
    "diameter",
    "evo_friendships_ratio_mean",
    "evo_friendships_ratio_lin_weighted_mean",
    "evo_friendships_ratio_quad_weighted_mean",
    "evo_friendships_ratio_std_dev",
    "evo_friendships_ratio_avg_abs_change",
    "evo_friendships_ratio_max",
    "evo_size_mean",
    "evo_size_lin_weighted_mean",
    "evo_size_quad_weighted_mean",
    "evo_size_std_dev",
    "evo_size_avg_abs_change",
    "evo_size_max",
    "evo_interactions_ratio_mean",
    "evo_interactions_ratio_lin_weighted_mean",
    "evo_interactions_ratio_quad_weighted_mean",
    "evo_interactions_ratio_std_dev",
    "evo_interactions_ratio_avg_abs_change",
    "evo_interactions_ratio_max",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schema {
    Early18,
    Final28,
    /// Ad-hoc schema of the given width (features named `f0`, `f1`, ...).
    Custom(usize),
}

impl Schema {
    pub fn len(self) -> usize {
        match self {
            Schema::Early18 => 18,
            Schema::Final28 => 28,
            Schema::Custom(d) => d,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    pub fn names(self) -> Vec<String> {
        match self {
            Schema::Early18 => EARLY_FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            Schema::Final28 => FINAL_FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
            Schema::Custom(d) => (0..d).map(|i| format!("f{i}")).collect(),
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schema::Early18 => f.write_str("early-18"),
            Schema::Final28 => f.write_str("final-28"),
            Schema::Custom(d) => write!(f, "custom-{d}"),
        }
    }
}

/// Ordered, named, finite feature values under a fixed schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    schema: Schema,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(schema: Schema, values: Vec<f64>) -> Result<Self> {
        if values.len() != schema.len() {
            return Err(CascadeError::SchemaMismatch {
                expected: schema.to_string(),
                found: format!("{} values", values.len()),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(CascadeError::InvalidParams(format!(
                "feature {} is not finite ({})",
                schema.names()[i],
                values[i]
            )));
        }
        Ok(Self { schema, values })
    }

    pub fn schema(&self) -> Schema {
        self.schema
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.schema.names().iter().position(|n| n == name).map(|i| self.values[i])
    }

    pub fn entries(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        self.schema.names().into_iter().zip(self.values.iter().copied())
    }
}
