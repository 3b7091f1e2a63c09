//! Domain records for posts, interactions and friendships, plus the
//! propagation graph and feature-vector types every other module consumes.

mod graph;
mod validate;
mod vector;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use graph::{EdgeAttrs, EdgeRef, PropEdge, PropagationGraph};
pub use validate::{validate_dataset, ValidationReport, ValidationWarning, Violation};
pub use vector::{FeatureVector, Schema, EARLY_FEATURE_NAMES, FINAL_FEATURE_NAMES};

/// Post class. `Conspiracy` is the positive class throughout evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Science,
    Conspiracy,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Science, Label::Conspiracy];

    pub fn is_positive(self) -> bool {
        self == Label::Conspiracy
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Science => "science",
            Label::Conspiracy => "conspiracy",
        }
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            Label::Conspiracy
        } else {
            Label::Science
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "science" => Ok(Label::Science),
            "conspiracy" => Ok(Label::Conspiracy),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    Like,
    Comment,
    Reshare,
}

impl InteractionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InteractionKind::Like => "like",
            InteractionKind::Comment => "comment",
            InteractionKind::Reshare => "reshare",
        }
    }
}

/// Type of a propagation edge. The derived ordering is the collapse
/// precedence: `Reshare > Comment > Like > Friendship`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeType {
    Friendship,
    Like,
    Comment,
    Reshare,
}

impl EdgeType {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeType::Friendship => "friendship",
            EdgeType::Like => "like",
            EdgeType::Comment => "comment",
            EdgeType::Reshare => "reshare",
        }
    }
}

impl From<InteractionKind> for EdgeType {
    fn from(k: InteractionKind) -> Self {
        match k {
            InteractionKind::Like => EdgeType::Like,
            InteractionKind::Comment => EdgeType::Comment,
            InteractionKind::Reshare => EdgeType::Reshare,
        }
    }
}

impl std::str::FromStr for EdgeType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "friendship" => Ok(EdgeType::Friendship),
            "like" => Ok(EdgeType::Like),
            "comment" => Ok(EdgeType::Comment),
            "reshare" => Ok(EdgeType::Reshare),
            other => Err(format!("unknown edge type {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: String,
    /// The seed page that published the post.
    pub page_id: String,
    pub label: Label,
    /// Absolute creation time in seconds.
    pub created_at: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub post_id: String,
    pub user_id: String,
    pub kind: InteractionKind,
    /// Absolute time in seconds; likes usually carry none.
    pub timestamp: Option<i64>,
    /// Set when the interaction happened on a friend's interaction rather
    /// than on the original post.
    pub via_user_id: Option<String>,
}

/// Problems found while loading raw friendship rows. The store itself is
/// always symmetric and irreflexive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FriendshipRowIssue {
    /// `(a, b)` was present without `(b, a)`; the mirror was added.
    Asymmetric { a: String, b: String },
    SelfLoop { user: String },
    Duplicate { a: String, b: String },
}

/// Undirected user-user friendship adjacency.
#[derive(Debug, Clone, Default)]
pub struct FriendshipStore {
    adj: HashMap<String, BTreeSet<String>>,
    n_edges: usize,
    row_issues: Vec<FriendshipRowIssue>,
}

impl FriendshipStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from undirected pairs; each pair may appear in either order.
    pub fn from_pairs<I, A, B>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        let mut store = Self::new();
        for (a, b) in pairs {
            store.insert(a.into(), b.into());
        }
        store
    }

    /// Builds from raw directed rows, recording rows that lack their mirror,
    /// self-loops and duplicates. Every kept row is symmetrised.
    pub fn from_rows<I>(rows: I) -> Self
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
        let mut issues = Vec::new();
        let mut store = Self::new();
        for (a, b) in rows {
            if a == b {
                issues.push(FriendshipRowIssue::SelfLoop { user: a });
                continue;
            }
            if !seen.insert((a.clone(), b.clone())) {
                issues.push(FriendshipRowIssue::Duplicate { a, b });
                continue;
            }
            store.insert(a, b);
        }
        for (a, b) in &seen {
            if !seen.contains(&(b.clone(), a.clone())) {
                issues.push(FriendshipRowIssue::Asymmetric { a: a.clone(), b: b.clone() });
            }
        }
        store.row_issues = issues;
        store
    }

    /// Inserts the undirected edge `{a, b}`. Returns false for self-loops and
    /// already-present edges.
    pub fn insert(&mut self, a: String, b: String) -> bool {
        if a == b {
            return false;
        }
        let added = self.adj.entry(a.clone()).or_default().insert(b.clone());
        if added {
            self.adj.entry(b).or_default().insert(a);
            self.n_edges += 1;
        }
        added
    }

    pub fn are_friends(&self, a: &str, b: &str) -> bool {
        self.adj.get(a).is_some_and(|s| s.contains(b))
    }

    pub fn friends_of<'s>(&'s self, user: &str) -> impl Iterator<Item = &'s str> + 's {
        self.adj.get(user).into_iter().flat_map(|s| s.iter().map(String::as_str))
    }

    pub fn degree(&self, user: &str) -> usize {
        self.adj.get(user).map_or(0, BTreeSet::len)
    }

    pub fn n_users(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn row_issues(&self) -> &[FriendshipRowIssue] {
        &self.row_issues
    }

    /// All edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(&str, &str)> {
        let mut out: Vec<(&str, &str)> = self
            .adj
            .iter()
            .flat_map(|(a, s)| s.iter().filter(move |b| a.as_str() < b.as_str()).map(move |b| (a.as_str(), b.as_str())))
            .collect();
        out.sort_unstable();
        out
    }
}

impl PartialEq for FriendshipStore {
    fn eq(&self, other: &Self) -> bool {
        self.adj == other.adj
    }
}

/// Posts, their interactions and the friendship graph.
#[derive(Debug, Clone, Default)]
pub struct CascadeDataset {
    pub posts: Vec<PostRecord>,
    pub interactions: Vec<InteractionRecord>,
    pub friends: FriendshipStore,
}

/// One post together with the interactions that reference it.
#[derive(Debug, Clone)]
pub struct PostCascade<'a> {
    pub post: &'a PostRecord,
    pub interactions: Vec<&'a InteractionRecord>,
}

impl CascadeDataset {
    /// Groups interactions by post, in `posts` order. Interactions that
    /// reference unknown posts are dropped (validation reports them).
    pub fn cascades(&self) -> Vec<PostCascade<'_>> {
        let index: HashMap<&str, usize> =
            self.posts.iter().enumerate().map(|(i, p)| (p.post_id.as_str(), i)).collect();
        let mut groups: Vec<Vec<&InteractionRecord>> = vec![Vec::new(); self.posts.len()];
        for it in &self.interactions {
            if let Some(&i) = index.get(it.post_id.as_str()) {
                groups[i].push(it);
            }
        }
        self.posts
            .iter()
            .zip(groups)
            .map(|(post, interactions)| PostCascade { post, interactions })
            .collect()
    }

    pub fn count_by_label(&self, label: Label) -> usize {
        self.posts.iter().filter(|p| p.label == label).count()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.posts.iter().map(|p| p.label).collect()
    }

    /// Drops every timed interaction later than `minutes` after its post's
    /// creation. Untimed likes are kept.
    pub fn truncated(&self, minutes: u32) -> CascadeDataset {
        let created: HashMap<&str, i64> =
            self.posts.iter().map(|p| (p.post_id.as_str(), p.created_at)).collect();
        let limit = i64::from(minutes) * 60;
        let interactions = self
            .interactions
            .iter()
            .filter(|it| match (it.timestamp, created.get(it.post_id.as_str())) {
                (Some(ts), Some(&c)) => ts - c <= limit,
                _ => true,
            })
            .cloned()
            .collect();
        CascadeDataset { posts: self.posts.clone(), interactions, friends: self.friends.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn store_is_symmetric_and_irreflexive() {
        let s = FriendshipStore::from_pairs([("a", "b"), ("b", "a"), ("c", "c"), ("b", "c")]);
        assert_eq!(s.n_edges(), 2);
        assert!(s.are_friends("a", "b") && s.are_friends("b", "a"));
        assert!(!s.are_friends("c", "c"));
        assert_eq!(s.edges(), vec![("a", "b"), ("b", "c")]);
        assert_eq!(s.degree("b"), 2);
    }

    #[test]
    fn raw_rows_record_issues() {
        let rows = vec![
            ("a".to_string(), "b".to_string()),
            ("b".to_string(), "a".to_string()),
            ("a".to_string(), "c".to_string()),
            ("d".to_string(), "d".to_string()),
            ("a".to_string(), "b".to_string()),
        ];
        let s = FriendshipStore::from_rows(rows);
        assert!(s.are_friends("c", "a"));
        assert_eq!(s.n_edges(), 2);
        let issues = s.row_issues();
        assert!(issues.contains(&FriendshipRowIssue::Asymmetric { a: "a".into(), b: "c".into() }));
        assert!(issues.contains(&FriendshipRowIssue::SelfLoop { user: "d".into() }));
        assert!(issues.contains(&FriendshipRowIssue::Duplicate { a: "a".into(), b: "b".into() }));
        assert_eq!(issues.len(), 3);
    }

    #[test]
    fn edge_precedence_order() {
        assert!(EdgeType::Reshare > EdgeType::Comment);
        assert!(EdgeType::Comment > EdgeType::Like);
        assert!(EdgeType::Like > EdgeType::Friendship);
    }

    #[test]
    fn labels_parse_closed_set() {
        assert_eq!("science".parse::<Label>(), Ok(Label::Science));
        assert!("satire".parse::<Label>().is_err());
        assert!(Label::Conspiracy.is_positive());
    }
}
