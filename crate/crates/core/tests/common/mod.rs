//! Shared generators for integration tests.
#![allow(dead_code)]

use cascade_core::model::{FriendshipStore, InteractionKind, InteractionRecord, Label, PostRecord};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const CREATED_AT: i64 = 1_400_000_000;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn post(id: &str, label: Label) -> PostRecord {
    PostRecord { post_id: id.into(), page_id: "page".into(), label, created_at: CREATED_AT }
}

pub fn interaction(post: &PostRecord, user: &str, kind: InteractionKind, minute: Option<i64>, via: Option<&str>) -> InteractionRecord {
    InteractionRecord {
        post_id: post.post_id.clone(),
        user_id: user.into(),
        kind,
        timestamp: minute.map(|m| post.created_at + m * 60),
        via_user_id: via.map(Into::into),
    }
}

/// An adversarial cascade: random kinds, second-resolution times spread over
/// the whole window (some exactly on step boundaries), untimed likes, via
/// links to users that interact later or never, and repeat interactions.
pub fn messy_cascade(seed: u64) -> (PostRecord, Vec<InteractionRecord>, FriendshipStore) {
    let mut r = rng(seed);
    let n_users = r.gen_range(2..40);
    let users: Vec<String> = (0..n_users).map(|i| format!("u{i}")).collect();
    let mut pairs = Vec::new();
    for a in 0..n_users {
        for b in a + 1..n_users {
            if r.gen_bool(0.15) {
                pairs.push((users[a].clone(), users[b].clone()));
            }
        }
    }
    let friends = FriendshipStore::from_pairs(pairs);
    let p = post(&format!("p{seed}"), if r.gen_bool(0.5) { Label::Science } else { Label::Conspiracy });
    let n_its = r.gen_range(0..60);
    let mut its = Vec::with_capacity(n_its);
    for _ in 0..n_its {
        let user = &users[r.gen_range(0..n_users)];
        let kind = match r.gen_range(0..3) {
            0 => InteractionKind::Like,
            1 => InteractionKind::Comment,
            _ => InteractionKind::Reshare,
        };
        let timestamp = if kind == InteractionKind::Like && r.gen_bool(0.5) {
            None
        } else if r.gen_bool(0.2) {
            Some(p.created_at + 30 * 60 * r.gen_range(0..=96))
        } else {
            Some(p.created_at + r.gen_range(0..=2880 * 60))
        };
        let via = if r.gen_bool(0.35) {
            let v = &users[r.gen_range(0..n_users)];
            (v != user).then(|| v.clone())
        } else {
            None
        };
        its.push(InteractionRecord { post_id: p.post_id.clone(), user_id: user.clone(), kind, timestamp, via_user_id: via });
    }
    (p, its, friends)
}
