use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EdgeType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAttrs {
    pub kind: EdgeType,
    /// Seconds since post creation; absent when the governing interaction is
    /// an untimed like.
    pub time: Option<u64>,
}

impl EdgeAttrs {
    /// Collapses a parallel edge into `self`: the higher-precedence type wins
    /// and the earliest available time is kept.
    pub fn absorb(&mut self, other: EdgeAttrs) {
        self.kind = self.kind.max(other.kind);
        self.time = match (self.time, other.time) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

/// Owned edge, endpoints normalised so that `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropEdge {
    pub u: String,
    pub v: String,
    pub kind: EdgeType,
    pub time: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRef<'a> {
    pub u: &'a str,
    pub v: &'a str,
    pub kind: EdgeType,
    pub time: Option<u64>,
}

impl EdgeRef<'_> {
    pub fn to_owned(self) -> PropEdge {
        PropEdge { u: self.u.to_string(), v: self.v.to_string(), kind: self.kind, time: self.time }
    }
}

/// A post's potential propagation graph: simple, undirected, typed and timed
/// edges over the seed page and the interacting users.
///
/// `horizon_minutes` is `None` for the final graph and `Some(δ)` for the
/// snapshot restricted to the first δ minutes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropagationGraph {
    post_id: String,
    seed_id: String,
    vertices: BTreeSet<String>,
    edges: BTreeMap<(String, String), EdgeAttrs>,
    horizon_minutes: Option<u32>,
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl PropagationGraph {
    /// Seed-only graph.
    pub fn new(post_id: impl Into<String>, seed_id: impl Into<String>) -> Self {
        let seed_id = seed_id.into();
        let mut vertices = BTreeSet::new();
        vertices.insert(seed_id.clone());
        Self { post_id: post_id.into(), seed_id, vertices, edges: BTreeMap::new(), horizon_minutes: None }
    }

    pub fn with_horizon(mut self, horizon_minutes: Option<u32>) -> Self {
        self.horizon_minutes = horizon_minutes;
        self
    }

    pub fn post_id(&self) -> &str {
        &self.post_id
    }

    pub fn seed_id(&self) -> &str {
        &self.seed_id
    }

    pub fn horizon_minutes(&self) -> Option<u32> {
        self.horizon_minutes
    }

    pub fn add_vertex(&mut self, id: &str) {
        if !self.vertices.contains(id) {
            self.vertices.insert(id.to_string());
        }
    }

    /// Adds (or collapses into) the edge `{a, b}`; self-loops are ignored.
    pub fn add_edge(&mut self, a: &str, b: &str, attrs: EdgeAttrs) -> bool {
        if a == b {
            return false;
        }
        self.add_vertex(a);
        self.add_vertex(b);
        match self.edges.entry(key(a, b)) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().absorb(attrs);
                false
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(attrs);
                true
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = &str> + '_ {
        self.vertices.iter().map(String::as_str)
    }

    pub fn contains_vertex(&self, id: &str) -> bool {
        self.vertices.contains(id)
    }

    pub fn edge(&self, a: &str, b: &str) -> Option<EdgeAttrs> {
        self.edges.get(&key(a, b)).copied()
    }

    /// Edges in sorted endpoint order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeRef<'_>> + '_ {
        self.edges.iter().map(|((u, v), a)| EdgeRef { u, v, kind: a.kind, time: a.time })
    }

    /// The edge set as endpoint pairs, ignoring attributes.
    pub fn edge_pairs(&self) -> BTreeSet<(&str, &str)> {
        self.edges.keys().map(|(u, v)| (u.as_str(), v.as_str())).collect()
    }

    pub fn vertex_set(&self) -> BTreeSet<&str> {
        self.vertices()
            .collect()
    }

    /// Checks the structural invariants: every endpoint is a vertex, no
    /// self-loops, the seed is present, and every non-seed vertex has an edge.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !self.vertices.contains(&self.seed_id) {
            return Err("seed missing from vertex set".into());
        }
        let mut touched: BTreeSet<&str> = BTreeSet::new();
        for ((u, v), attrs) in &self.edges {
            if u >= v {
                return Err(format!("edge ({u},{v}) not normalised or a self-loop"));
            }
            if !self.vertices.contains(u) || !self.vertices.contains(v) {
                return Err(format!("edge ({u},{v}) has an endpoint outside the vertex set"));
            }
            if let (Some(h), Some(t)) = (self.horizon_minutes, attrs.time) {
                if t > u64::from(h) * 60 {
                    return Err(format!("edge ({u},{v}) at {t}s lies beyond the {h} min horizon"));
                }
            }
            touched.insert(u);
            touched.insert(v);
        }
        for v in &self.vertices {
            if v != &self.seed_id && !touched.contains(v.as_str()) {
                return Err(format!("vertex {v} is isolated"));
            }
        }
        Ok(())
    }
}
