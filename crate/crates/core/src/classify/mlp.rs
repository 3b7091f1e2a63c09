//! Single-hidden-layer perceptron: ReLU hidden units, logistic output,
//! mean cross-entropy loss, full-batch gradient descent.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::DenseMatrix;
use super::sigmoid;
use crate::error::{CascadeError, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for MlpParams {
    fn default() -> Self {
        Self { hidden: 64, learning_rate: 0.01, epochs: 500 }
    }
}

/// Parameters are stored flat as `[W1 (h×d, row per hidden unit) | b1 (h) |
/// w2 (h) | b2]`; gradients use the same layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub n_inputs: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Per-sample cross-entropy with a logit input, stable for large |z|.
fn bce_with_logit(z: f64, y: bool) -> f64 {
    // −[y ln σ(z) + (1−y) ln(1−σ(z))] = softplus(z) − y·z
    let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
    softplus - if y { z } else { 0.0 }
}

impl MlpModel {
    fn offsets(&self) -> (usize, usize, usize) {
        let w1 = self.hidden * self.n_inputs;
        (w1, w1 + self.hidden, w1 + 2 * self.hidden)
    }

    /// He-uniform first layer, Glorot-uniform output layer, zero biases.
    pub fn init(n_inputs: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = seed::rng(seed);
        let mut params = vec![0.0; hidden * n_inputs + 2 * hidden + 1];
        let lim1 = (6.0 / n_inputs.max(1) as f64).sqrt();
        let lim2 = (6.0 / (hidden + 1) as f64).sqrt();
        let w1 = hidden * n_inputs;
        for p in &mut params[..w1] {
            *p = rng.gen_range(-lim1..lim1);
        }
        for p in &mut params[w1 + hidden..w1 + 2 * hidden] {
            *p = rng.gen_range(-lim2..lim2);
        }
        Self { n_inputs, hidden, params }
    }

    /// Hidden pre-activations for every sample, hidden-major: `z[j*n + i]`.
    /// `xt` is the column-major (feature-major) input.
    fn hidden_pre(&self, xt: &[f64], n: usize) -> Vec<f64> {
        let (w1_end, b1_end, _) = self.offsets();
        let (w1, b1) = (&self.params[..w1_end], &self.params[w1_end..b1_end]);
        let d = self.n_inputs;
        let mut z = vec![0.0; self.hidden * n];
        for j in 0..self.hidden {
            let zj = &mut z[j * n..(j + 1) * n];
            zj.fill(b1[j]);
            for k in 0..d {
                axpy(w1[j * d + k], &xt[k * n..(k + 1) * n], zj);
            }
        }
        z
    }

    fn logits(&self, z: &[f64], n: usize) -> Vec<f64> {
        let (_, b1_end, w2_end) = self.offsets();
        let w2 = &self.params[b1_end..w2_end];
        let b2 = self.params[w2_end];
        let mut out = vec![b2; n];
        for j in 0..self.hidden {
            let zj = &z[j * n..(j + 1) * n];
            for (o, &v) in out.iter_mut().zip(zj) {
                if v > 0.0 {
                    *o += w2[j] * v;
                }
            }
        }
        out
    }

    /// Mean cross-entropy and its gradient with respect to `params`.
    pub fn loss_and_gradient(&self, xt: &[f64], n: usize, y: &[bool]) -> (f64, Vec<f64>) {
        let (w1_end, b1_end, w2_end) = self.offsets();
        let d = self.n_inputs;
        let z = self.hidden_pre(xt, n);
        let logit = self.logits(&z, n);
        let inv_n = 1.0 / n as f64;
        let mut loss = 0.0;
        let mut g_out = vec![0.0; n];
        for i in 0..n {
            loss += bce_with_logit(logit[i], y[i]);
            g_out[i] = (sigmoid(logit[i]) - if y[i] { 1.0 } else { 0.0 }) * inv_n;
        }
        let mut grad = vec![0.0; self.params.len()];
        grad[w2_end] = g_out.iter().sum();
        let w2 = &self.params[b1_end..w2_end];
        let mut dz = vec![0.0; n];
        for j in 0..self.hidden {
            let zj = &z[j * n..(j + 1) * n];
            let mut gw2 = 0.0;
            for i in 0..n {
                if zj[i] > 0.0 {
                    gw2 += g_out[i] * zj[i];
                    dz[i] = g_out[i] * w2[j];
                } else {
                    dz[i] = 0.0;
                }
            }
            grad[b1_end + j] = gw2;
            grad[w1_end + j] = dz.iter().sum();
            for k in 0..d {
                grad[j * d + k] = dot(&dz, &xt[k * n..(k + 1) * n]);
            }
        }
        (loss * inv_n, grad)
    }

    pub fn fit(x: &DenseMatrix, y: &[bool], params: &MlpParams, seed: u64) -> Result<Self> {
        if !y.iter().any(|&b| b) || y.iter().all(|&b| b) {
            return Err(CascadeError::SingleClassTraining);
        }
        if params.hidden == 0 || params.learning_rate.is_nan() || params.learning_rate <= 0.0 {
            return Err(CascadeError::InvalidParams("MLP needs ≥1 hidden unit and a positive step".into()));
        }
        let n = x.n_rows();
        let xt = x.transposed();
        let mut model = Self::init(x.n_cols(), params.hidden, seed);

        // Start the output bias at the training log-odds so the initial mean
        // logit matches the class prior.
        let prior = y.iter().filter(|&&b| b).count() as f64 / n as f64;
        let z = model.hidden_pre(&xt, n);
        let w2_end = model.offsets().2;
        let mean_logit = model.logits(&z, n).iter().sum::<f64>() / n as f64;
        model.params[w2_end] = (prior / (1.0 - prior)).ln() - mean_logit;

        for _ in 0..params.epochs {
            let (_, grad) = model.loss_and_gradient(&xt, n, y);
            axpy(-params.learning_rate, &grad, &mut model.params);
        }
        Ok(model)
    }

    pub fn proba(&self, row: &[f64]) -> f64 {
        let (w1_end, b1_end, w2_end) = self.offsets();
        let d = self.n_inputs;
        let mut logit = self.params[w2_end];
        for j in 0..self.hidden {
            let zj = self.params[w1_end + j] + dot(&self.params[j * d..(j + 1) * d], row);
            if zj > 0.0 {
                logit += self.params[b1_end + j] * zj;
            }
        }
        sigmoid(logit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_instance() -> (MlpModel, Vec<f64>, Vec<bool>) {
        let x = DenseMatrix::from_rows(&[
            [0.3, -1.2, 0.8],
            [1.1, 0.4, -0.5],
            [-0.7, 0.9, 1.3],
            [0.2, 0.1, -1.0],
            [-1.4, -0.6, 0.5],
        ]);
        let y = vec![true, false, true, false, true];
        let mut m = MlpModel::init(3, 4, 99);
        // non-zero biases so every parameter is exercised
        let (b1_start, _, b2) = m.offsets();
        for j in 0..4 {
            m.params[b1_start + j] = 0.05 * (j as f64 + 1.0);
        }
        m.params[b2] = -0.2;
        (m, x.transposed(), y)
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (m, xt, y) = small_instance();
        let (_, grad) = m.loss_and_gradient(&xt, 5, &y);
        let h = 1e-6;
        for p in 0..m.params.len() {
            let mut plus = m.clone();
            plus.params[p] += h;
            let mut minus = m.clone();
            minus.params[p] -= h;
            let fd = (plus.loss_and_gradient(&xt, 5, &y).0 - minus.loss_and_gradient(&xt, 5, &y).0) / (2.0 * h);
            let rel = (fd - grad[p]).abs() / fd.abs().max(grad[p].abs()).max(1e-8);
            assert!(rel < 1e-5, "param {p}: analytic {} vs fd {fd} (rel {rel})", grad[p]);
        }
    }

    #[test]
    fn prediction_matches_batch_forward() {
        let (m, xt, _) = small_instance();
        let z = m.hidden_pre(&xt, 5);
        let logits = m.logits(&z, 5);
        for i in 0..5 {
            let row: Vec<f64> = (0..3).map(|k| xt[k * 5 + i]).collect();
            assert!((m.proba(&row) - sigmoid(logits[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn training_reduces_loss() {
        let rows: Vec<[f64; 2]> = (0..60).map(|i| [(i % 10) as f64 / 5.0 - 1.0, (i / 10) as f64 / 3.0 - 1.0]).collect();
        let y: Vec<bool> = rows.iter().map(|r| r[0] + r[1] > 0.0).collect();
        let x = DenseMatrix::from_rows(&rows);
        let short = MlpModel::fit(&x, &y, &MlpParams { epochs: 1, ..Default::default() }, 5).unwrap();
        let long = MlpModel::fit(&x, &y, &MlpParams { epochs: 400, learning_rate: 0.5, ..Default::default() }, 5).unwrap();
        let xt = x.transposed();
        assert!(long.loss_and_gradient(&xt, 60, &y).0 < short.loss_and_gradient(&xt, 60, &y).0);
    }
}
