//! Synthetic friendship graphs and labelled cascades in the dataset grain
//! used by ingestion: posts owned by pages, interactions by users, untimed
//! likes, and optional `via_user_id` links.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{CascadeError, Result};
use crate::exec::{self, Execution};
use crate::io::{save_dataset, DatasetPaths};
use crate::model::{CascadeDataset, FriendshipStore, InteractionKind, InteractionRecord, Label, PostRecord};
use crate::seed;

/// Number of distinct pages per class, mirroring the original collection.
pub const SCIENCE_PAGES: usize = 34;
pub const CONSPIRACY_PAGES: usize = 39;

/// Spreading dynamics of one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpreadParams {
    /// Expected direct interactions per hour right after posting.
    pub direct_rate: f64,
    /// E-folding time of the direct arrival rate, in hours.
    pub decay_hours: f64,
    /// Probability that each friend of an interactor interacts within the
    /// following hour.
    pub friend_prob: f64,
    /// Probability that an induced interaction records `via_user_id`.
    pub via_prob: f64,
    /// Fraction of interactions emitted as untimed likes.
    pub like_frac: f64,
    /// Observation window in minutes; no timestamp exceeds it.
    pub horizon: u32,
    /// Cap on interacting users per cascade.
    pub max_interactions: usize,
}

impl SpreadParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(CascadeError::InvalidParams(what.to_string()));
        for (name, p) in [("friend_prob", self.friend_prob), ("via_prob", self.via_prob), ("like_frac", self.like_frac)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if !(self.direct_rate > 0.0 && self.direct_rate.is_finite()) {
            return bad("direct_rate must be positive");
        }
        if !(self.decay_hours > 0.0 && self.decay_hours.is_finite()) {
            return bad("decay_hours must be positive");
        }
        if self.horizon == 0 {
            return bad("horizon must be positive");
        }
        Ok(())
    }
}

/// Friendship-graph size plus per-class spreading parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetConfig {
    pub n_users: usize,
    pub attach_m: usize,
    pub science: SpreadParams,
    pub conspiracy: SpreadParams,
}

impl PresetConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PresetConfig = toml::from_str(text).map_err(|e| CascadeError::InvalidParams(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.attach_m == 0 || self.attach_m >= self.n_users {
            return Err(CascadeError::InvalidParams(format!(
                "need 1 <= attach_m < n_users, got m={} n={}",
                self.attach_m, self.n_users
            )));
        }
        self.science.validate()?;
        self.conspiracy.validate()
    }

    pub fn params(&self, label: Label) -> &SpreadParams {
        match label {
            Label::Science => &self.science,
            Label::Conspiracy => &self.conspiracy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Separable,
    Null,
}

impl Preset {
    pub fn config(self) -> PresetConfig {
        let text = match self {
            Preset::Separable => include_str!("../presets/separable.toml"),
            Preset::Null => include_str!("../presets/null.toml"),
        };
        PresetConfig::from_toml(text).expect("bundled presets are valid")
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "separable" => Ok(Preset::Separable),
            "null" => Ok(Preset::Null),
            other => Err(format!("unknown preset {other:?} (expected separable or null)")),
        }
    }
}

fn user_id(i: usize) -> String {
    format!("u{i:06}")
}

/// Preferential attachment: a clique on `m + 1` users, then every further
/// user links to `m` distinct existing users chosen proportionally to degree.
pub fn gen_friendship_graph(n: usize, m: usize, seed: u64) -> Result<FriendshipStore> {
    if m == 0 || m >= n {
        return Err(CascadeError::InvalidParams(format!("need 1 <= m < n, got m={m} n={n}")));
    }
    let mut rng = seed::rng(seed);
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(m * (m + 1) / 2 + (n - m - 1) * m);
    // every edge endpoint, so a uniform pick is a degree-proportional pick
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * pairs.capacity());
    for a in 0..=m {
        for b in a + 1..=m {
            pairs.push((a, b));
            endpoints.extend([a, b]);
        }
    }
    let mut targets = Vec::with_capacity(m);
    for v in m + 1..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.gen_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            pairs.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    Ok(FriendshipStore::from_pairs(pairs.into_iter().map(|(a, b)| (user_id(a), user_id(b)))))
}

/// The page a synthetic post is published on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedPage {
    pub page_id: String,
    pub label: Label,
}

/// Reusable cascade simulator over one friendship graph.
pub struct CascadeGenerator<'a> {
    friends: &'a FriendshipStore,
    users: Vec<&'a str>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Pending {
    minute: u32,
    seq: u64,
    user: usize,
    via: Option<usize>,
}

impl<'a> CascadeGenerator<'a> {
    pub fn new(friends: &'a FriendshipStore) -> Self {
        let mut users: Vec<&str> = friends.edges().into_iter().flat_map(|(a, b)| [a, b]).collect();
        users.sort_unstable();
        users.dedup();
        Self { friends, users }
    }

    fn index_of(&self, user: &str) -> usize {
        self.users.binary_search(&user).expect("friends of known users are known users")
    }

    /// Simulates one cascade in whole minutes after `created_at`.
    ///
    /// Direct interactions arrive as a Poisson process whose rate decays
    /// exponentially; each new interactor's friends independently follow
    /// with `friend_prob`, uniformly within the next hour. Events past the
    /// horizon are dropped and the cascade stops at `max_interactions` users.
    pub fn simulate(&self, post: &PostRecord, params: &SpreadParams, rng: &mut ChaCha8Rng) -> Vec<InteractionRecord> {
        let mut queue: BinaryHeap<Reverse<Pending>> = BinaryHeap::new();
        let mut seq = 0u64;
        let horizon_h = f64::from(params.horizon) / 60.0;
        let tau = params.decay_hours;
        // mass of the decaying rate inside the window
        let window = 1.0 - (-horizon_h / tau).exp();
        let expected = params.direct_rate * tau * window;
        let n_direct = if self.users.is_empty() {
            0
        } else {
            Poisson::new(expected).map_or(0, |p| p.sample(rng) as u64)
        };
        for _ in 0..n_direct {
            // inverse CDF of the truncated exponential arrival time
            let u: f64 = rng.gen();
            let hours = -tau * (1.0 - u * window).ln();
            let minute = ((hours * 60.0).floor() as u32).min(params.horizon);
            let user = rng.gen_range(0..self.users.len());
            queue.push(Reverse(Pending { minute, seq, user, via: None }));
            seq += 1;
        }

        let mut active: HashSet<usize> = HashSet::new();
        let mut out = Vec::new();
        let mut friend_buf: Vec<usize> = Vec::new();
        while let Some(Reverse(ev)) = queue.pop() {
            if active.len() >= params.max_interactions {
                break;
            }
            if !active.insert(ev.user) {
                continue;
            }
            let like = rng.gen_bool(params.like_frac);
            let kind = if like {
                InteractionKind::Like
            } else if rng.gen_bool(0.6) {
                InteractionKind::Comment
            } else {
                InteractionKind::Reshare
            };
            let via = ev.via.filter(|_| rng.gen_bool(params.via_prob));
            out.push(InteractionRecord {
                post_id: post.post_id.clone(),
                user_id: self.users[ev.user].to_string(),
                kind,
                timestamp: (!like).then(|| post.created_at + i64::from(ev.minute) * 60),
                via_user_id: via.map(|v| self.users[v].to_string()),
            });
            friend_buf.clear();
            friend_buf.extend(self.friends.friends_of(self.users[ev.user]).map(|f| self.index_of(f)));
            friend_buf.sort_unstable();
            for &f in &friend_buf {
                if active.contains(&f) || !rng.gen_bool(params.friend_prob) {
                    continue;
                }
                let minute = ev.minute + rng.gen_range(1..=60);
                if minute <= params.horizon {
                    queue.push(Reverse(Pending { minute, seq, user: f, via: Some(ev.user) }));
                    seq += 1;
                }
            }
        }
        out
    }
}

const EPOCH_2012: i64 = 1_325_376_000;
const CREATION_SPAN_MINUTES: i64 = 3 * 365 * 24 * 60;

fn synthetic_post(post_id: String, page: &SeedPage, rng: &mut ChaCha8Rng) -> PostRecord {
    PostRecord {
        post_id,
        page_id: page.page_id.clone(),
        label: page.label,
        created_at: EPOCH_2012 + rng.gen_range(0..CREATION_SPAN_MINUTES) * 60,
    }
}

/// One post on `seed_page` and its simulated interactions.
pub fn gen_cascade(
    friends: &FriendshipStore,
    seed_page: &SeedPage,
    params: &SpreadParams,
    rng_seed: u64,
) -> Result<(PostRecord, Vec<InteractionRecord>)> {
    params.validate()?;
    let mut rng = seed::rng(rng_seed);
    let post = synthetic_post(format!("post-{rng_seed:016x}"), seed_page, &mut rng);
    let interactions = CascadeGenerator::new(friends).simulate(&post, params, &mut rng);
    Ok((post, interactions))
}

fn page_id(label: Label, i: usize) -> String {
    match label {
        Label::Science => format!("sci-page-{i:02}"),
        Label::Conspiracy => format!("con-page-{i:02}"),
    }
}

/// A dataset with `n_per_class` posts of each class using a bundled preset.
pub fn gen_dataset(preset: Preset, n_per_class: usize, seed: u64, exec: Execution) -> Result<CascadeDataset> {
    gen_dataset_with(&preset.config(), n_per_class, seed, exec)
}

/// A dataset with `n_per_class` posts of each class. Posts are sorted by
/// id, classes are shuffled across ids, and each cascade has its own
/// derived seed, so the result does not depend on the schedule.
pub fn gen_dataset_with(cfg: &PresetConfig, n_per_class: usize, seed: u64, exec: Execution) -> Result<CascadeDataset> {
    cfg.validate()?;
    if n_per_class < 10 {
        return Err(CascadeError::InvalidParams(format!("need at least 10 posts per class, got {n_per_class}")));
    }
    let friends = gen_friendship_graph(cfg.n_users, cfg.attach_m, seed::derive(seed, &[seed::tag("friends")]))?;
    let mut labels: Vec<Label> =
        std::iter::repeat_n(Label::Science, n_per_class).chain(std::iter::repeat_n(Label::Conspiracy, n_per_class)).collect();
    labels.shuffle(&mut seed::rng(seed::derive(seed, &[seed::tag("labels")])));

    let generator = CascadeGenerator::new(&friends);
    let cascades = exec::map_range(exec, labels.len(), |i| {
        let label = labels[i];
        let mut rng = seed::rng(seed::derive(seed, &[seed::tag("cascade"), i as u64]));
        let n_pages = if label == Label::Science { SCIENCE_PAGES } else { CONSPIRACY_PAGES };
        let page = SeedPage { page_id: page_id(label, rng.gen_range(0..n_pages)), label };
        let post = synthetic_post(format!("post-{i:06}"), &page, &mut rng);
        let interactions = generator.simulate(&post, cfg.params(label), &mut rng);
        (post, interactions)
    });
    drop(generator);

    let mut posts = Vec::with_capacity(cascades.len());
    let mut interactions = Vec::new();
    for (p, its) in cascades {
        posts.push(p);
        interactions.extend(its);
    }
    Ok(CascadeDataset { posts, interactions, friends })
}

/// Writes `posts.jsonl`, `interactions.jsonl` and `friendships.csv` into
/// `dir`.
pub fn write_dataset(ds: &CascadeDataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CascadeError::io(dir, e))?;
    save_dataset(
        ds,
        &DatasetPaths {
            posts: &dir.join("posts.jsonl"),
            interactions: &dir.join("interactions.jsonl"),
            friendships: &dir.join("friendships.csv"),
        },
    )
}
