//! Evolution features: per-snapshot time series of three high-level
//! properties and the six summary statistics computed over them.

use serde::{Deserialize, Serialize};

use crate::builder::{check_step, CascadeBuilder, GraphCounts};
use crate::error::{CascadeError, Result};
use crate::model::{FeatureVector, FriendshipStore, InteractionRecord, PostRecord, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    FriendshipsRatio,
    Size,
    InteractionsRatio,
}

impl SeriesKind {
    /// Order used in the early-stage vector.
    pub const ALL: [SeriesKind; 3] = [SeriesKind::FriendshipsRatio, SeriesKind::Size, SeriesKind::InteractionsRatio];
}

/// Values v_1..v_n of one property sampled at δ = step, 2·step, …, n·step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSeries {
    pub kind: SeriesKind,
    pub values: Vec<f64>,
}

/// The three evolution series of one post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeSeries {
    pub post_id: String,
    pub step_minutes: u32,
    pub friendships_ratio: Vec<f64>,
    pub size: Vec<f64>,
    pub interactions_ratio: Vec<f64>,
}

impl CascadeSeries {
    pub fn len(&self) -> usize {
        self.size.len()
    }

    pub fn is_empty(&self) -> bool {
        self.size.is_empty()
    }

    pub fn series(&self) -> [EvolutionSeries; 3] {
        [
            EvolutionSeries { kind: SeriesKind::FriendshipsRatio, values: self.friendships_ratio.clone() },
            EvolutionSeries { kind: SeriesKind::Size, values: self.size.clone() },
            EvolutionSeries { kind: SeriesKind::InteractionsRatio, values: self.interactions_ratio.clone() },
        ]
    }

    pub(crate) fn push(&mut self, counts: GraphCounts) {
        let (fr, size, ir) = snapshot_values(counts);
        self.friendships_ratio.push(fr);
        self.size.push(size);
        self.interactions_ratio.push(ir);
    }

    /// Early-stage vector over the first `n_steps` samples, i.e. at
    /// δ = n_steps · step.
    pub fn early_vector(&self, n_steps: usize) -> Result<FeatureVector> {
        if n_steps == 0 || n_steps > self.len() {
            return Err(CascadeError::InvalidParams(format!(
                "n_steps {n_steps} outside 1..={}",
                self.len()
            )));
        }
        let mut values = Vec::with_capacity(18);
        for s in [&self.friendships_ratio, &self.size, &self.interactions_ratio] {
            values.extend_from_slice(&series_stats(&s[..n_steps])?.to_array());
        }
        FeatureVector::new(Schema::Early18, values)
    }
}

/// Friendships ratio, size and interactions ratio of one snapshot; zero-edge
/// snapshots impute 0 for all three.
pub fn snapshot_values(c: GraphCounts) -> (f64, f64, f64) {
    if c.edges == 0 {
        return (0.0, 0.0, 0.0);
    }
    let e = c.edges as f64;
    (c.friendship_edges as f64 / e, e, c.vertices as f64 / e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub mean: f64,
    pub linear_weighted_mean: f64,
    pub quadratic_weighted_mean: f64,
    pub std_dev: f64,
    pub avg_abs_change: f64,
    pub maximum: f64,
}

impl SeriesStats {
    pub fn to_array(self) -> [f64; 6] {
        [
            self.mean,
            self.linear_weighted_mean,
            self.quadratic_weighted_mean,
            self.std_dev,
            self.avg_abs_change,
            self.maximum,
        ]
    }
}

/// The six summary statistics, indices starting at 1:
///
/// * mean (1/n) Σ v_i
/// * linear weighted mean 2/(n(n+1)) Σ i·v_i
/// * quadratic weighted mean 6/(n(n+1)(2n+1)) Σ i²·v_i
/// * population standard deviation
/// * average absolute change (1/n) Σ_{i<n} |v_i − v_{i+1}| (note the divisor
///   is n although the sum has n − 1 terms)
/// * maximum
///
/// The weighted means are convex combinations, so they are clamped to
/// `[min, max]` to absorb rounding; constant series return exact values.
pub fn series_stats(values: &[f64]) -> Result<SeriesStats> {
    let n = values.len();
    if n == 0 {
        return Err(CascadeError::EmptySeries);
    }
    let first = values[0];
    if values.iter().all(|&v| v == first) {
        return Ok(SeriesStats {
            mean: first,
            linear_weighted_mean: first,
            quadratic_weighted_mean: first,
            std_dev: 0.0,
            avg_abs_change: 0.0,
            maximum: first,
        });
    }
    let nf = n as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut lin, mut quad) = (0.0, 0.0, 0.0);
    for (i, &v) in values.iter().enumerate() {
        let w = (i + 1) as f64;
        sum += v;
        lin += w * v;
        quad += w * w * v;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let n64 = n as u64;
    let lin_norm = (n64 * (n64 + 1) / 2) as f64;
    let quad_norm = (n64 * (n64 + 1) * (2 * n64 + 1) / 6) as f64;
    let mean = (sum / nf).clamp(lo, hi);
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / nf;
    let aac = values.windows(2).map(|w| (w[0] - w[1]).abs()).sum::<f64>() / nf;
    Ok(SeriesStats {
        mean,
        linear_weighted_mean: (lin / lin_norm).clamp(lo, hi),
        quadratic_weighted_mean: (quad / quad_norm).clamp(lo, hi),
        std_dev: var.sqrt(),
        avg_abs_change: aac,
        maximum: hi,
    })
}

/// Samples the three series at δ = step, …, n_steps · step.
pub fn build_series<'a, I>(
    post: &'a PostRecord,
    interactions: I,
    friends: &'a FriendshipStore,
    step_minutes: u32,
    n_steps: usize,
) -> Result<CascadeSeries>
where
    I: IntoIterator<Item = &'a InteractionRecord>,
{
    if step_minutes == 0 || n_steps == 0 {
        return Err(CascadeError::InvalidStep { step: step_minutes, horizon: step_minutes * n_steps as u32 });
    }
    let mut b = CascadeBuilder::new(post, interactions, friends)?;
    let mut out = CascadeSeries {
        post_id: post.post_id.clone(),
        step_minutes,
        friendships_ratio: Vec::with_capacity(n_steps),
        size: Vec::with_capacity(n_steps),
        interactions_ratio: Vec::with_capacity(n_steps),
    };
    for k in 1..=n_steps as u64 {
        b.advance_to(k * u64::from(step_minutes) * 60);
        out.push(b.counts());
    }
    Ok(out)
}

/// Early-stage 18-feature vector at δ minutes using the given step.
pub fn early_features<'a, I>(
    post: &'a PostRecord,
    interactions: I,
    friends: &'a FriendshipStore,
    step_minutes: u32,
    delta_minutes: u32,
) -> Result<FeatureVector>
where
    I: IntoIterator<Item = &'a InteractionRecord>,
{
    let n = check_step(step_minutes, delta_minutes)?;
    build_series(post, interactions, friends, step_minutes, n)?.early_vector(n)
}
