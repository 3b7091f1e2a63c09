//! Unweighted, undirected graph metrics over a compact adjacency structure.
//!
//! Counting is done in integers wherever possible so results are exact and
//! invariant under vertex relabelling.

use std::collections::{HashMap, VecDeque};

use crate::error::{CascadeError, Result};
use crate::model::PropagationGraph;

/// Simple undirected graph with sorted adjacency lists and a root vertex
/// used to pick the component for path metrics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    adj: Vec<Vec<u32>>,
    root: u32,
    n_edges: usize,
}

impl Topology {
    /// Builds from an edge list; duplicates and self-loops are dropped.
    pub fn from_edges(n: usize, edges: &[(u32, u32)], root: u32) -> Self {
        assert!(n > 0 && (root as usize) < n, "root must be a vertex");
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a != b {
                adj[a as usize].push(b);
                adj[b as usize].push(a);
            }
        }
        let mut n_edges = 0;
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
            n_edges += l.len();
        }
        Self { adj, root, n_edges: n_edges / 2 }
    }

    /// Vertex indices follow the graph's sorted vertex order; the seed is the
    /// root.
    pub fn from_graph(g: &PropagationGraph) -> Self {
        let index: HashMap<&str, u32> = g.vertices().enumerate().map(|(i, v)| (v, i as u32)).collect();
        let edges: Vec<(u32, u32)> = g.edges().map(|e| (index[e.u], index[e.v])).collect();
        Self::from_edges(index.len(), &edges, index[g.seed_id()])
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    /// Number of triangles, each counted once.
    pub fn triangles(&self) -> u64 {
        let mut count = 0u64;
        for (u, nu) in self.adj.iter().enumerate() {
            let u = u as u32;
            for &v in nu.iter().filter(|&&v| v > u) {
                // common neighbours w > v via a sorted merge
                let nv = &self.adj[v as usize];
                let (mut i, mut j) = (0, 0);
                while i < nu.len() && j < nv.len() {
                    match nu[i].cmp(&nv[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            if nu[i] > v {
                                count += 1;
                            }
                            i += 1;
                            j += 1;
                        }
                    }
                }
            }
        }
        count
    }

    /// Connected triplets: Σ_v C(deg v, 2).
    pub fn connected_triplets(&self) -> u64 {
        self.adj.iter().map(|l| (l.len() as u64) * (l.len() as u64).saturating_sub(1) / 2).sum()
    }

    /// Vertices reachable from the root, in BFS order.
    pub fn root_component(&self) -> Vec<u32> {
        let mut seen = vec![false; self.adj.len()];
        let mut order = vec![self.root];
        seen[self.root as usize] = true;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &w in &self.adj[v as usize] {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    order.push(w);
                }
            }
        }
        order
    }

    pub fn is_connected(&self) -> bool {
        self.root_component().len() == self.adj.len()
    }

    /// BFS distances from `src`; unreachable vertices get `u32::MAX`.
    pub fn bfs(&self, src: u32, dist: &mut Vec<u32>, queue: &mut VecDeque<u32>) {
        dist.clear();
        dist.resize(self.adj.len(), u32::MAX);
        queue.clear();
        dist[src as usize] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            let d = dist[v as usize] + 1;
            for &w in &self.adj[v as usize] {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = d;
                    queue.push_back(w);
                }
            }
        }
    }

    /// All-sources BFS over the root's component.
    pub fn path_stats(&self) -> PathStats {
        let component = self.root_component();
        let mut dist = Vec::with_capacity(self.adj.len());
        let mut queue = VecDeque::with_capacity(self.adj.len());
        let mut total = 0u64;
        let mut diameter = 0u32;
        for &src in &component {
            self.bfs(src, &mut dist, &mut queue);
            for &d in &dist {
                if d != u32::MAX {
                    total += u64::from(d);
                    diameter = diameter.max(d);
                }
            }
        }
        PathStats {
            component_size: component.len(),
            disconnected: component.len() != self.adj.len(),
            distance_sum: total / 2,
            diameter,
        }
    }
}

/// Shortest-path summary over the root's component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStats {
    pub component_size: usize,
    pub disconnected: bool,
    /// Σ d(u, v) over unordered pairs.
    pub distance_sum: u64,
    pub diameter: u32,
}

impl PathStats {
    pub fn avg_path_length(&self) -> f64 {
        let c = self.component_size as u64;
        if c < 2 {
            return 0.0;
        }
        self.distance_sum as f64 / (c * (c - 1) / 2) as f64
    }
}

/// 2|E| / |V|.
pub fn avg_degree(t: &Topology) -> f64 {
    2.0 * t.n_edges() as f64 / t.n_vertices() as f64
}

/// Global clustering coefficient 3·triangles / connected triplets (0 when
/// there are no triplets).
pub fn global_clustering(t: &Topology) -> Result<f64> {
    if t.n_vertices() < 3 {
        return Err(CascadeError::DegenerateGraph("clustering needs at least 3 vertices"));
    }
    let triplets = t.connected_triplets();
    if triplets == 0 {
        return Ok(0.0);
    }
    Ok(3.0 * t.triangles() as f64 / triplets as f64)
}

/// Degree assortativity: Pearson correlation of endpoint degrees over every
/// edge taken in both directions.
pub fn assortativity(t: &Topology) -> Result<f64> {
    if t.n_edges() < 2 {
        return Err(CascadeError::DegenerateGraph("assortativity needs at least 2 edges"));
    }
    // Moments over the 2|E| directed endpoint pairs (x, y):
    // Σx = Σy = Σ_v d², Σx² = Σ_v d³, Σxy = Σ_{(u,v) directed} d_u d_v.
    let mut s1: u128 = 0;
    let mut s2: u128 = 0;
    let mut sxy: u128 = 0;
    for nu in &t.adj {
        let du = nu.len() as u128;
        s1 += du * du;
        s2 += du * du * du;
        for &v in nu {
            sxy += du * t.adj[v as usize].len() as u128;
        }
    }
    let m2 = 2 * t.n_edges() as u128;
    let num = (m2 * sxy) as i128 - (s1 * s1) as i128;
    let den = (m2 * s2) as i128 - (s1 * s1) as i128;
    if den == 0 {
        return Err(CascadeError::DegenerateDegrees);
    }
    Ok(num as f64 / den as f64)
}

/// Mean shortest-path length over unordered pairs of the root's component.
pub fn avg_path_length(t: &Topology) -> f64 {
    t.path_stats().avg_path_length()
}

/// Longest shortest path within the root's component.
pub fn diameter(t: &Topology) -> u32 {
    t.path_stats().diameter
}
