//! Two-class linear discriminant with pooled, ridge-regularised covariance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::data::DenseMatrix;
use super::sigmoid;
use crate::error::{CascadeError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    /// Added to the diagonal of the pooled covariance.
    pub ridge: f64,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self { ridge: 1e-4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LdaModel {
    /// Posterior P(positive | x) under shared-covariance Gaussians:
    /// σ(wᵀx + b) with w = Σ⁻¹(μ₁ − μ₀) and
    /// b = −wᵀ(μ₀ + μ₁)/2 + ln(π₁/π₀).
    pub fn fit(x: &DenseMatrix, y: &[bool], params: &LdaParams) -> Result<Self> {
        let d = x.n_cols();
        let n1 = y.iter().filter(|&&b| b).count();
        let n0 = y.len() - n1;
        if n0 == 0 || n1 == 0 {
            return Err(CascadeError::SingleClassTraining);
        }
        let mut mu = [DVector::<f64>::zeros(d), DVector::<f64>::zeros(d)];
        for (r, &c) in x.rows().zip(y) {
            mu[c as usize] += DVector::from_column_slice(r);
        }
        mu[0] /= n0 as f64;
        mu[1] /= n1 as f64;

        let mut scatter = DMatrix::<f64>::zeros(d, d);
        for (r, &c) in x.rows().zip(y) {
            let diff = DVector::from_column_slice(r) - &mu[c as usize];
            scatter.ger(1.0, &diff, &diff, 1.0);
        }
        let dof = (y.len() as f64 - 2.0).max(1.0);
        let mut cov = scatter / dof;
        for i in 0..d {
            cov[(i, i)] += params.ridge;
        }
        let diff = &mu[1] - &mu[0];
        let w = match cov.clone().cholesky() {
            Some(ch) => ch.solve(&diff),
            None => cov
                .lu()
                .solve(&diff)
                .ok_or_else(|| CascadeError::InvalidParams("singular pooled covariance".into()))?,
        };
        let mid = (&mu[0] + &mu[1]) * 0.5;
        let bias = -w.dot(&mid) + (n1 as f64 / n0 as f64).ln();
        Ok(Self { weights: w.as_slice().to_vec(), bias })
    }

    pub fn decision(&self, row: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
    }

    pub fn proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision(row))
    }
}
