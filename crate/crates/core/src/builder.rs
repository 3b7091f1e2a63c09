//! Construction of final and snapshot potential propagation graphs.
//!
//! Edge rules, applied per interaction in time order (untimed likes last):
//!
//! * an interaction carrying `via_user_id` yields one edge to that friend,
//!   any other interaction yields an edge to the seed page; the edge takes
//!   the interaction's kind and time;
//! * every pair of interacting users who are friends gets a `friendship`
//!   edge timed at the later of their first timed interactions (untimed if
//!   either user only has untimed likes);
//! * parallel edges collapse to the highest-precedence type
//!   (reshare > comment > like > friendship) and the earliest time.
//!
//! A via-target with no own interaction strictly earlier than the induced
//! one is an orphan chain root: it is added as a vertex and attached to the
//! seed (with the induced interaction's kind and time) so that every vertex
//! stays connected to the seed. For untimed likes the root is attached when
//! the target has neither a timed nor a direct interaction at all.
//!
//! [`CascadeBuilder`] processes interactions incrementally, so a snapshot
//! series is produced in a single pass; each rule depends only on
//! interactions at or before the one being processed, which makes the
//! incremental graph at δ identical to a from-scratch build at δ.

use std::collections::{HashMap, HashSet};

use log::warn;

use crate::error::{CascadeError, Result};
use crate::model::{
    EdgeAttrs, EdgeType, FriendshipStore, InteractionKind, InteractionRecord, PostRecord, PropagationGraph,
};

/// Step and horizon of the evolution analysis, in minutes.
pub const DEFAULT_STEP_MINUTES: u32 = 30;
pub const DEFAULT_HORIZON_MINUTES: u32 = 2880;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildWarning {
    /// The via-target had not interacted yet; it was attached to the seed.
    OrphanVia { user: String, via: String },
    /// The interaction predates the post; its relative time was clamped to 0.
    PrecedesPost { user: String },
    /// The seed page interacted with its own post; ignored.
    SeedInteraction,
    /// `via_user_id` equals the user; treated as a direct interaction.
    SelfVia { user: String },
}

#[derive(Debug, Clone, Copy)]
struct Event<'a> {
    time: Option<u64>,
    user: &'a str,
    kind: InteractionKind,
    via: Option<&'a str>,
}

/// Vertex, edge and friendship-edge counts of the current graph state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GraphCounts {
    pub vertices: usize,
    pub edges: usize,
    pub friendship_edges: usize,
}

/// Incremental potential-propagation-graph builder for a single post.
pub struct CascadeBuilder<'a> {
    post: &'a PostRecord,
    friends: &'a FriendshipStore,
    events: Vec<Event<'a>>,
    cursor: usize,
    has_timed: HashSet<&'a str>,
    has_direct: HashSet<&'a str>,

    ids: HashMap<&'a str, u32>,
    names: Vec<&'a str>,
    /// `None` = not an interacting user (seed or orphan root);
    /// `Some(t)` = first own interaction at `t` (`None` for untimed).
    first_time: Vec<Option<Option<u64>>>,
    participants: Vec<u32>,
    edges: HashMap<(u32, u32), EdgeAttrs>,
    friendship_edges: usize,
    warnings: Vec<BuildWarning>,
}

impl<'a> CascadeBuilder<'a> {
    pub fn new<I>(post: &'a PostRecord, interactions: I, friends: &'a FriendshipStore) -> Result<Self>
    where
        I: IntoIterator<Item = &'a InteractionRecord>,
    {
        let mut warnings = Vec::new();
        let mut events = Vec::new();
        for it in interactions {
            if it.post_id != post.post_id {
                return Err(CascadeError::UnknownPost { expected: post.post_id.clone(), found: it.post_id.clone() });
            }
            if it.user_id == post.page_id {
                warnings.push(BuildWarning::SeedInteraction);
                continue;
            }
            let time = it.timestamp.map(|ts| {
                let rel = ts - post.created_at;
                if rel < 0 {
                    warnings.push(BuildWarning::PrecedesPost { user: it.user_id.clone() });
                }
                rel.max(0) as u64
            });
            let via = match it.via_user_id.as_deref() {
                Some(v) if v == it.user_id => {
                    warnings.push(BuildWarning::SelfVia { user: it.user_id.clone() });
                    None
                }
                Some(v) if v == post.page_id => None,
                other => other,
            };
            events.push(Event { time, user: &it.user_id, kind: it.kind, via });
        }
        events.sort_by(|a, b| {
            (a.time.is_none(), a.time, a.user, a.kind, a.via).cmp(&(b.time.is_none(), b.time, b.user, b.kind, b.via))
        });
        let has_timed = events.iter().filter(|e| e.time.is_some()).map(|e| e.user).collect();
        let has_direct = events.iter().filter(|e| e.via.is_none()).map(|e| e.user).collect();

        let mut ids = HashMap::new();
        ids.insert(post.page_id.as_str(), 0);
        Ok(Self {
            post,
            friends,
            events,
            cursor: 0,
            has_timed,
            has_direct,
            ids,
            names: vec![post.page_id.as_str()],
            first_time: vec![None],
            participants: Vec::new(),
            edges: HashMap::new(),
            friendship_edges: 0,
            warnings,
        })
    }

    /// Admits every timed interaction with relative time `<= limit_seconds`.
    pub fn advance_to(&mut self, limit_seconds: u64) {
        while let Some(ev) = self.events.get(self.cursor).copied() {
            match ev.time {
                Some(t) if t <= limit_seconds => {
                    self.apply(ev);
                    self.cursor += 1;
                }
                _ => break,
            }
        }
    }

    /// Admits all remaining interactions, including untimed likes.
    pub fn finish(&mut self) {
        while let Some(ev) = self.events.get(self.cursor).copied() {
            self.apply(ev);
            self.cursor += 1;
        }
    }

    pub fn counts(&self) -> GraphCounts {
        GraphCounts { vertices: self.names.len(), edges: self.edges.len(), friendship_edges: self.friendship_edges }
    }

    pub fn warnings(&self) -> &[BuildWarning] {
        &self.warnings
    }

    /// Materialises the current state.
    pub fn graph(&self, horizon_minutes: Option<u32>) -> PropagationGraph {
        let mut g = PropagationGraph::new(&self.post.post_id, &self.post.page_id).with_horizon(horizon_minutes);
        for name in &self.names[1..] {
            g.add_vertex(name);
        }
        for (&(a, b), &attrs) in &self.edges {
            g.add_edge(self.names[a as usize], self.names[b as usize], attrs);
        }
        g
    }

    fn vertex(&mut self, name: &'a str) -> u32 {
        if let Some(&i) = self.ids.get(name) {
            return i;
        }
        let i = self.names.len() as u32;
        self.ids.insert(name, i);
        self.names.push(name);
        self.first_time.push(None);
        i
    }

    fn add_edge(&mut self, a: u32, b: u32, attrs: EdgeAttrs) {
        let k = if a < b { (a, b) } else { (b, a) };
        match self.edges.get_mut(&k) {
            Some(existing) => {
                let was_friendship = existing.kind == EdgeType::Friendship;
                existing.absorb(attrs);
                if was_friendship && existing.kind != EdgeType::Friendship {
                    self.friendship_edges -= 1;
                }
            }
            None => {
                if attrs.kind == EdgeType::Friendship {
                    self.friendship_edges += 1;
                }
                self.edges.insert(k, attrs);
            }
        }
    }

    fn admit(&mut self, u: u32, time: Option<u64>) {
        self.first_time[u as usize] = Some(time);
        let name = self.names[u as usize];
        let mut friends_in: Vec<u32> = Vec::new();
        if self.friends.degree(name) <= self.participants.len() {
            for f in self.friends.friends_of(name) {
                if let Some(&j) = self.ids.get(f) {
                    if self.first_time[j as usize].is_some() {
                        friends_in.push(j);
                    }
                }
            }
        } else {
            for &j in &self.participants {
                if self.friends.are_friends(name, self.names[j as usize]) {
                    friends_in.push(j);
                }
            }
        }
        for j in friends_in {
            let other = self.first_time[j as usize].flatten();
            let t = match (time, other) {
                (Some(a), Some(b)) => Some(a.max(b)),
                _ => None,
            };
            self.add_edge(u, j, EdgeAttrs { kind: EdgeType::Friendship, time: t });
        }
        self.participants.push(u);
    }

    fn apply(&mut self, ev: Event<'a>) {
        let u = self.vertex(ev.user);
        if self.first_time[u as usize].is_none() {
            self.admit(u, ev.time);
        }
        let attrs = EdgeAttrs { kind: ev.kind.into(), time: ev.time };
        let Some(via) = ev.via else {
            self.add_edge(u, 0, attrs);
            return;
        };
        let orphan = match ev.time {
            Some(t) => !matches!(
                self.ids.get(via).and_then(|&j| self.first_time[j as usize]),
                Some(Some(tv)) if tv < t
            ),
            None => !self.has_timed.contains(via) && !self.has_direct.contains(via),
        };
        let w = self.vertex(via);
        self.add_edge(u, w, attrs);
        if orphan {
            self.warnings.push(BuildWarning::OrphanVia { user: ev.user.to_string(), via: via.to_string() });
            self.add_edge(w, 0, attrs);
        }
    }
}

fn log_warnings(post: &PostRecord, warnings: &[BuildWarning]) {
    if !warnings.is_empty() {
        warn!("post {}: {} builder warning(s), first: {:?}", post.post_id, warnings.len(), warnings[0]);
    }
}

/// Builds the final propagation graph from all interactions with `post`.
pub fn build_final_graph<'a, I>(post: &'a PostRecord, interactions: I, friends: &'a FriendshipStore) -> Result<PropagationGraph>
where
    I: IntoIterator<Item = &'a InteractionRecord>,
{
    let mut b = CascadeBuilder::new(post, interactions, friends)?;
    b.finish();
    log_warnings(post, b.warnings());
    Ok(b.graph(None))
}

/// Builds the snapshot over the closed window `[t, t + δ]`; untimed likes are
/// excluded.
pub fn build_snapshot<'a, I>(
    post: &'a PostRecord,
    interactions: I,
    friends: &'a FriendshipStore,
    delta_minutes: u32,
) -> Result<PropagationGraph>
where
    I: IntoIterator<Item = &'a InteractionRecord>,
{
    if delta_minutes == 0 {
        return Err(CascadeError::InvalidStep { step: 0, horizon: 0 });
    }
    let mut b = CascadeBuilder::new(post, interactions, friends)?;
    b.advance_to(u64::from(delta_minutes) * 60);
    Ok(b.graph(Some(delta_minutes)))
}

pub(crate) fn check_step(step_minutes: u32, horizon_minutes: u32) -> Result<usize> {
    if step_minutes == 0 || horizon_minutes == 0 || horizon_minutes % step_minutes != 0 {
        return Err(CascadeError::InvalidStep { step: step_minutes, horizon: horizon_minutes });
    }
    Ok((horizon_minutes / step_minutes) as usize)
}

/// Snapshots at δ = step, 2·step, …, horizon, built incrementally.
pub fn snapshot_series<'a, I>(
    post: &'a PostRecord,
    interactions: I,
    friends: &'a FriendshipStore,
    step_minutes: u32,
    horizon_minutes: u32,
) -> Result<Vec<PropagationGraph>>
where
    I: IntoIterator<Item = &'a InteractionRecord>,
{
    let n = check_step(step_minutes, horizon_minutes)?;
    let mut b = CascadeBuilder::new(post, interactions, friends)?;
    let mut out = Vec::with_capacity(n);
    for k in 1..=n as u32 {
        let delta = k * step_minutes;
        b.advance_to(u64::from(delta) * 60);
        out.push(b.graph(Some(delta)));
    }
    Ok(out)
}
