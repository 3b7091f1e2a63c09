use serde::{Deserialize, Serialize};

/// Row-major dense matrix of feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n_rows * n_cols, "matrix shape mismatch");
        Self { n_rows, n_cols, data }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), n_cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self { n_rows: rows.len(), n_cols, data }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.n_cols.max(1)).take(self.n_rows)
    }

    /// Rows selected by index, in the given order.
    pub fn select(&self, idx: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.n_cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        DenseMatrix { n_rows: idx.len(), n_cols: self.n_cols, data }
    }

    /// Column-major copy: `out[f * n_rows + i]`.
    pub fn transposed(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.data.len()];
        for (i, r) in self.rows().enumerate() {
            for (f, &v) in r.iter().enumerate() {
                out[f * self.n_rows + i] = v;
            }
        }
        out
    }

    pub fn map_rows(&self, f: impl Fn(&[f64], &mut [f64])) -> DenseMatrix {
        let mut data = vec![0.0; self.data.len()];
        for (src, dst) in self.rows().zip(data.chunks_exact_mut(self.n_cols.max(1))) {
            f(src, dst);
        }
        DenseMatrix { n_rows: self.n_rows, n_cols: self.n_cols, data }
    }
}

/// Per-feature centring and scaling frozen at fit time. Features that are
/// constant in the training data map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; 0 marks a constant feature.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DenseMatrix) -> Self {
        let (n, d) = (x.n_rows(), x.n_cols());
        let mut mean = vec![0.0; d];
        let mut std = vec![0.0; d];
        for f in 0..d {
            let first = x.row(0)[f];
            if x.rows().all(|r| r[f] == first) {
                mean[f] = first;
                continue;
            }
            let m = x.rows().map(|r| r[f]).sum::<f64>() / n as f64;
            let var = x.rows().map(|r| (r[f] - m) * (r[f] - m)).sum::<f64>() / n as f64;
            mean[f] = m;
            std[f] = var.sqrt();
        }
        Self { mean, std }
    }

    pub fn transform_row(&self, src: &[f64], dst: &mut [f64]) {
        for (f, (&v, out)) in src.iter().zip(dst.iter_mut()).enumerate() {
            *out = if self.std[f] > 0.0 { (v - self.mean[f]) / self.std[f] } else { 0.0 };
        }
    }

    pub fn transform(&self, x: &DenseMatrix) -> DenseMatrix {
        x.map_rows(|src, dst| self.transform_row(src, dst))
    }
}
