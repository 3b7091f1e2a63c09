//! High-level and topological features of a final propagation graph, and
//! the per-post/per-dataset extraction pipeline for both schemas.

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::builder::{check_step, CascadeBuilder};
use crate::error::{CascadeError, Result};
use crate::evolution::CascadeSeries;
use crate::exec::{self, Execution};
use crate::model::{
    CascadeDataset, EdgeType, FeatureVector, FriendshipStore, InteractionRecord, Label, PostRecord,
    PropagationGraph, Schema,
};
use crate::topology::{self, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighLevelFeatures {
    /// |E|
    pub size: f64,
    pub friendships_ratio: f64,
    /// |V| / |E|
    pub interactions_ratio: f64,
    pub lifetime_minutes: f64,
    pub time_to_90pct_minutes: f64,
}

impl HighLevelFeatures {
    /// Imputed values for graphs without edges.
    pub const DEGENERATE: HighLevelFeatures = HighLevelFeatures {
        size: 0.0,
        friendships_ratio: 0.0,
        interactions_ratio: 0.0,
        lifetime_minutes: 0.0,
        time_to_90pct_minutes: 0.0,
    };
}

/// Size, friendships ratio, interactions ratio, lifetime and the time at
/// which ⌈0.9·T⌉ of the T timed edges have appeared. Lifetime and the 90%
/// time only consider timed edges (0 when there are none).
pub fn high_level(g: &PropagationGraph) -> Result<HighLevelFeatures> {
    let e = g.edge_count();
    if e == 0 {
        return Err(CascadeError::DegenerateGraph("no edges"));
    }
    let friendships = g.edges().filter(|x| x.kind == EdgeType::Friendship).count();
    let mut times: Vec<u64> = g.edges().filter_map(|x| x.time).collect();
    times.sort_unstable();
    let (lifetime, t90) = match times.len() {
        0 => (0.0, 0.0),
        t => {
            // ⌈9t/10⌉ in integers
            let need = (9 * t).div_ceil(10);
            (times[t - 1] as f64 / 60.0, times[need - 1] as f64 / 60.0)
        }
    };
    Ok(HighLevelFeatures {
        size: e as f64,
        friendships_ratio: friendships as f64 / e as f64,
        interactions_ratio: g.vertex_count() as f64 / e as f64,
        lifetime_minutes: lifetime,
        time_to_90pct_minutes: t90,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologicalFeatures {
    pub avg_degree: f64,
    pub clustering: f64,
    pub assortativity: f64,
    pub avg_path_length: f64,
    pub diameter: f64,
}

/// Topological features with degenerate cases imputed as 0. Path metrics
/// are restricted to the seed's component.
pub fn topological(g: &PropagationGraph) -> TopologicalFeatures {
    topological_of(&Topology::from_graph(g), g.post_id())
}

fn topological_of(t: &Topology, post_id: &str) -> TopologicalFeatures {
    let paths = t.path_stats();
    if paths.disconnected {
        warn!("post {post_id}: graph is disconnected; path metrics use the seed component");
    }
    TopologicalFeatures {
        avg_degree: topology::avg_degree(t),
        clustering: topology::global_clustering(t).unwrap_or(0.0),
        assortativity: topology::assortativity(t).unwrap_or(0.0),
        avg_path_length: paths.avg_path_length(),
        diameter: f64::from(paths.diameter),
    }
}

/// Everything extracted for one post: the final-28 vector and the evolution
/// series it was derived from (early-18 vectors are prefixes of these).
#[derive(Debug, Clone, PartialEq)]
pub struct PostFeatures {
    pub post_id: String,
    pub label: Label,
    pub final_vector: FeatureVector,
    pub series: CascadeSeries,
}

/// Single pass over one post: the snapshot series up to `horizon`, then the
/// remaining interactions for the final graph.
pub fn extract_post<'a, I>(
    post: &'a PostRecord,
    interactions: I,
    friends: &'a FriendshipStore,
    step_minutes: u32,
    horizon_minutes: u32,
) -> Result<PostFeatures>
where
    I: IntoIterator<Item = &'a InteractionRecord>,
{
    let n = check_step(step_minutes, horizon_minutes)?;
    let mut b = CascadeBuilder::new(post, interactions, friends)?;
    let mut series = CascadeSeries {
        post_id: post.post_id.clone(),
        step_minutes,
        friendships_ratio: Vec::with_capacity(n),
        size: Vec::with_capacity(n),
        interactions_ratio: Vec::with_capacity(n),
    };
    for k in 1..=n as u64 {
        b.advance_to(k * u64::from(step_minutes) * 60);
        series.push(b.counts());
    }
    b.finish();
    let graph = b.graph(None);
    let final_vector = final_vector(&graph, &series)?;
    Ok(PostFeatures { post_id: post.post_id.clone(), label: post.label, final_vector, series })
}

/// Assembles the final-28 vector from a final graph and its full series.
pub fn final_vector(graph: &PropagationGraph, series: &CascadeSeries) -> Result<FeatureVector> {
    let hl = high_level(graph).unwrap_or(HighLevelFeatures::DEGENERATE);
    let topo = topological(graph);
    let mut values = vec![
        hl.size,
        hl.friendships_ratio,
        hl.interactions_ratio,
        hl.lifetime_minutes,
        hl.time_to_90pct_minutes,
        topo.avg_degree,
        topo.clustering,
        topo.assortativity,
        topo.avg_path_length,
        topo.diameter,
    ];
    values.extend_from_slice(series.early_vector(series.len())?.values());
    FeatureVector::new(Schema::Final28, values)
}

/// Features for every post of a dataset, in dataset order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub step_minutes: u32,
    pub horizon_minutes: u32,
    pub posts: Vec<PostFeatures>,
}

impl FeatureTable {
    pub fn labels(&self) -> Vec<Label> {
        self.posts.iter().map(|p| p.label).collect()
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon_minutes / self.step_minutes) as usize
    }

    pub fn final_rows(&self) -> Vec<&[f64]> {
        self.posts.iter().map(|p| p.final_vector.values()).collect()
    }

    /// Early-18 vectors at δ = n_steps · step.
    pub fn early_rows(&self, n_steps: usize) -> Result<Vec<FeatureVector>> {
        self.posts.iter().map(|p| p.series.early_vector(n_steps)).collect()
    }
}

pub fn extract_dataset(
    dataset: &CascadeDataset,
    step_minutes: u32,
    horizon_minutes: u32,
    exec: Execution,
) -> Result<FeatureTable> {
    check_step(step_minutes, horizon_minutes)?;
    let start = std::time::Instant::now();
    let cascades = dataset.cascades();
    let posts = exec::try_map(exec, &cascades, |c| {
        extract_post(c.post, c.interactions.iter().copied(), &dataset.friends, step_minutes, horizon_minutes)
    })?;
    let secs = start.elapsed().as_secs_f64();
    info!(
        "extracted features for {} posts in {:.2}s ({:.0} posts/s)",
        posts.len(),
        secs,
        posts.len() as f64 / secs.max(1e-9)
    );
    Ok(FeatureTable { step_minutes, horizon_minutes, posts })
}
