use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::{FriendshipRowIssue, FriendshipStore, InteractionKind, InteractionRecord, PostRecord};

/// A problem that makes the dataset unacceptable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicatePostId { post_id: String },
    NegativeCreatedAt { post_id: String },
    OrphanInteraction { index: usize, post_id: String },
    InteractionPrecedesPost { index: usize, post_id: String, user_id: String },
    MissingTimestamp { index: usize, post_id: String, user_id: String },
    SelfVia { index: usize, user_id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicatePostId { post_id } => write!(f, "duplicate post id {post_id}"),
            Violation::NegativeCreatedAt { post_id } => write!(f, "post {post_id} has a negative creation time"),
            Violation::OrphanInteraction { index, post_id } => {
                write!(f, "interaction #{index} references unknown post {post_id}")
            }
            Violation::InteractionPrecedesPost { index, post_id, user_id } => {
                write!(f, "interaction precedes post (#{index}, post {post_id}, user {user_id})")
            }
            Violation::MissingTimestamp { index, post_id, user_id } => {
                write!(f, "comment/reshare without timestamp (#{index}, post {post_id}, user {user_id})")
            }
            Violation::SelfVia { index, user_id } => {
                write!(f, "interaction #{index} by {user_id} is via the same user")
            }
        }
    }
}

/// Non-fatal observations; the dataset is still accepted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationWarning {
    /// Raw row `(a, b)` had no mirror; the store was symmetrised.
    AsymmetricFriendship { a: String, b: String },
    SelfFriendship { user: String },
    DuplicateFriendship { a: String, b: String },
}

impl fmt::Display for ValidationWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationWarning::AsymmetricFriendship { a, b } => {
                write!(f, "friendship row ({a},{b}) has no mirror row; auto-symmetrized")
            }
            ValidationWarning::SelfFriendship { user } => write!(f, "self-friendship row for {user} dropped"),
            ValidationWarning::DuplicateFriendship { a, b } => write!(f, "duplicate friendship row ({a},{b})"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<ValidationWarning>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_dataset(
    posts: &[PostRecord],
    interactions: &[InteractionRecord],
    friends: &FriendshipStore,
) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut created: HashMap<&str, i64> = HashMap::with_capacity(posts.len());
    let mut seen = HashSet::with_capacity(posts.len());
    for p in posts {
        if !seen.insert(p.post_id.as_str()) {
            report.violations.push(Violation::DuplicatePostId { post_id: p.post_id.clone() });
        }
        if p.created_at < 0 {
            report.violations.push(Violation::NegativeCreatedAt { post_id: p.post_id.clone() });
        }
        created.entry(&p.post_id).or_insert(p.created_at);
    }

    for (index, it) in interactions.iter().enumerate() {
        let Some(&t0) = created.get(it.post_id.as_str()) else {
            report.violations.push(Violation::OrphanInteraction { index, post_id: it.post_id.clone() });
            continue;
        };
        match (it.kind, it.timestamp) {
            (_, Some(ts)) if ts < t0 => report.violations.push(Violation::InteractionPrecedesPost {
                index,
                post_id: it.post_id.clone(),
                user_id: it.user_id.clone(),
            }),
            (InteractionKind::Comment | InteractionKind::Reshare, None) => {
                report.violations.push(Violation::MissingTimestamp {
                    index,
                    post_id: it.post_id.clone(),
                    user_id: it.user_id.clone(),
                })
            }
            _ => {}
        }
        if it.via_user_id.as_deref() == Some(it.user_id.as_str()) {
            report.violations.push(Violation::SelfVia { index, user_id: it.user_id.clone() });
        }
    }

    for issue in friends.row_issues() {
        report.warnings.push(match issue {
            FriendshipRowIssue::Asymmetric { a, b } => {
                ValidationWarning::AsymmetricFriendship { a: a.clone(), b: b.clone() }
            }
            FriendshipRowIssue::SelfLoop { user } => ValidationWarning::SelfFriendship { user: user.clone() },
            FriendshipRowIssue::Duplicate { a, b } => {
                ValidationWarning::DuplicateFriendship { a: a.clone(), b: b.clone() }
            }
        });
    }
    report
}
