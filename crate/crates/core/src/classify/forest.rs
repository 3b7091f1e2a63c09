//! Random forest of unpruned Gini trees on bootstrap samples.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::DenseMatrix;
use crate::error::{CascadeError, Result};
use crate::exec::{self, Execution};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Candidate features per split; `None` means ⌊√d⌋.
    pub max_features: Option<usize>,
    pub min_samples_leaf: usize,
    /// `None` grows trees until leaves are pure.
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 100, max_features: None, min_samples_leaf: 1, max_depth: None, bootstrap: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Fraction of positive training samples in the leaf.
    Leaf(f64),
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_value(&self, row: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match self.nodes[i] {
                Node::Leaf(p) => return p,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature as usize] <= threshold { left as usize } else { right as usize };
                }
            }
        }
    }

    /// 1 for a positive majority, 0 for negative, ½ on a tie.
    pub fn vote(&self, row: &[f64]) -> f64 {
        let p = self.leaf_value(row);
        if p > 0.5 {
            1.0
        } else if p < 0.5 {
            0.0
        } else {
            0.5
        }
    }

    pub fn depth(&self) -> usize {
        fn rec(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + rec(nodes, left as usize).max(rec(nodes, right as usize)),
            }
        }
        rec(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
}

impl ForestModel {
    pub fn fit(x: &DenseMatrix, y: &[bool], params: &ForestParams, seed: u64) -> Result<Self> {
        if !y.iter().any(|&b| b) || y.iter().all(|&b| b) {
            return Err(CascadeError::SingleClassTraining);
        }
        if params.n_trees == 0 || params.min_samples_leaf == 0 {
            return Err(CascadeError::InvalidParams("forest needs ≥1 tree and min_samples_leaf ≥ 1".into()));
        }
        let cols = x.transposed();
        let d = x.n_cols();
        let mtry = params.max_features.unwrap_or(((d as f64).sqrt().floor() as usize).max(1)).clamp(1, d.max(1));
        let ctx = TreeContext { cols: &cols, y, n: x.n_rows(), d, mtry, params };
        let trees = exec::map_range(Execution::Parallel, params.n_trees, |t| {
            ctx.grow(seed::derive(seed, &[t as u64]))
        });
        Ok(Self { trees })
    }

    /// Fraction of trees voting positive.
    pub fn proba(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.vote(row)).sum::<f64>() / self.trees.len() as f64
    }
}

struct TreeContext<'a> {
    cols: &'a [f64],
    y: &'a [bool],
    n: usize,
    d: usize,
    mtry: usize,
    params: &'a ForestParams,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl TreeContext<'_> {
    fn value(&self, f: usize, i: u32) -> f64 {
        self.cols[f * self.n + i as usize]
    }

    fn grow(&self, seed: u64) -> Tree {
        let mut rng = seed::rng(seed);
        let mut samples: Vec<u32> = if self.params.bootstrap {
            (0..self.n).map(|_| rng.gen_range(0..self.n as u32)).collect()
        } else {
            (0..self.n as u32).collect()
        };
        let mut nodes = vec![Node::Leaf(0.0)];
        // (node index, range start, range end, depth)
        let mut stack = vec![(0usize, 0usize, samples.len(), 0usize)];
        let mut features: Vec<usize> = (0..self.d).collect();
        let mut buf: Vec<(f64, bool)> = Vec::with_capacity(samples.len());

        while let Some((node, lo, hi, depth)) = stack.pop() {
            let idx = &mut samples[lo..hi];
            let pos = idx.iter().filter(|&&i| self.y[i as usize]).count();
            let leaf = Node::Leaf(pos as f64 / idx.len() as f64);
            let depth_ok = self.params.max_depth.is_none_or(|m| depth < m);
            if pos == 0 || pos == idx.len() || idx.len() < 2 * self.params.min_samples_leaf || !depth_ok {
                nodes[node] = leaf;
                continue;
            }
            let Some(best) = self.best_split(idx, &mut features, &mut buf, &mut rng) else {
                nodes[node] = leaf;
                continue;
            };
            // partition: left = value <= threshold
            let mut split = 0;
            for k in 0..idx.len() {
                if self.value(best.feature, idx[k]) <= best.threshold {
                    idx.swap(k, split);
                    split += 1;
                }
            }
            let left = nodes.len();
            nodes.push(Node::Leaf(0.0));
            nodes.push(Node::Leaf(0.0));
            nodes[node] =
                Node::Split { feature: best.feature as u32, threshold: best.threshold, left: left as u32, right: left as u32 + 1 };
            stack.push((left + 1, lo + split, hi, depth + 1));
            stack.push((left, lo, lo + split, depth + 1));
        }
        Tree { nodes }
    }

    /// Examines features in random order until `mtry` non-constant ones
    /// have been scanned; returns the split with the lowest weighted Gini.
    fn best_split(
        &self,
        idx: &[u32],
        features: &mut [usize],
        buf: &mut Vec<(f64, bool)>,
        rng: &mut impl Rng,
    ) -> Option<BestSplit> {
        features.shuffle(rng);
        let min_leaf = self.params.min_samples_leaf;
        let n = idx.len();
        let total_pos = idx.iter().filter(|&&i| self.y[i as usize]).count() as f64;
        let mut best: Option<BestSplit> = None;
        let mut scanned = 0;
        for &f in features.iter() {
            if scanned == self.mtry {
                break;
            }
            buf.clear();
            buf.extend(idx.iter().map(|&i| (self.value(f, i), self.y[i as usize])));
            buf.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            if buf[0].0 == buf[n - 1].0 {
                continue;
            }
            scanned += 1;
            let mut left_pos = 0.0;
            for k in 1..n {
                if buf[k - 1].1 {
                    left_pos += 1.0;
                }
                if buf[k - 1].0 == buf[k].0 || k < min_leaf || n - k < min_leaf {
                    continue;
                }
                let nl = k as f64;
                let nr = (n - k) as f64;
                let right_pos = total_pos - left_pos;
                // Σ n_side · 2p(1−p), dropping the constant factor 2
                let impurity = left_pos * (nl - left_pos) / nl + right_pos * (nr - right_pos) / nr;
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let (a, b) = (buf[k - 1].0, buf[k].0);
                    let mut threshold = a + (b - a) / 2.0;
                    if threshold >= b {
                        threshold = a;
                    }
                    best = Some(BestSplit { feature: f, threshold, impurity });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_data() -> (DenseMatrix, Vec<bool>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let a = (i % 2) as f64;
            let b = ((i / 2) % 2) as f64;
            rows.push(vec![a + 0.01 * i as f64 / 40.0, b]);
            y.push((a as i32 ^ b as i32) == 1);
        }
        (DenseMatrix::from_rows(&rows), y)
    }

    #[test]
    fn single_tree_without_bootstrap_fits_training_data() {
        let (x, y) = xor_data();
        let params = ForestParams { n_trees: 1, max_features: Some(2), bootstrap: false, ..Default::default() };
        let m = ForestModel::fit(&x, &y, &params, 3).unwrap();
        for (r, &label) in x.rows().zip(&y) {
            assert_eq!(m.proba(r), if label { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let (x, y) = xor_data();
        let p = ForestParams { n_trees: 10, ..Default::default() };
        let a = ForestModel::fit(&x, &y, &p, 11).unwrap();
        let b = ForestModel::fit(&x, &y, &p, 11).unwrap();
        assert_eq!(a, b);
        let c = ForestModel::fit(&x, &y, &p, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn depth_limit_and_single_class() {
        let (x, y) = xor_data();
        let p = ForestParams { n_trees: 3, max_depth: Some(1), ..Default::default() };
        let m = ForestModel::fit(&x, &y, &p, 0).unwrap();
        assert!(m.trees.iter().all(|t| t.depth() <= 1));
        let ones = vec![true; y.len()];
        assert!(matches!(ForestModel::fit(&x, &ones, &p, 0), Err(CascadeError::SingleClassTraining)));
    }

    #[test]
    fn tie_votes_count_half() {
        let t = Tree { nodes: vec![Node::Leaf(0.5)] };
        assert_eq!(t.vote(&[0.0]), 0.5);
    }
}
