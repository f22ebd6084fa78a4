//! Shared helpers for the integration suites: fixture paths, a random
//! corpus generator, and independent reference implementations the fast
//! paths are checked against.
//!
//! The reference code here deliberately avoids the library's feature
//! plumbing (interning, bitmaps, co-indexes). It recomputes everything
//! from plain sets so a bug in the optimized path cannot hide in a shared
//! helper.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crossact::corpus::{
    parse_timestamp, ActivityRecord, ActivityType, Corpus, ItemKey, ItemRecord, PlatformId,
    Timestamp, ACTIVITY_TYPES,
};

#[allow(dead_code)]
pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[allow(dead_code)]
pub fn ts(s: &str) -> Timestamp {
    parse_timestamp(s).expect("test timestamp")
}

/// Plain-set mirror of one corpus view plus item interests, evaluated
/// directly from the similarity definitions.
pub struct ReferenceIndex {
    /// Per activity type: user -> items the user did.
    sets: [BTreeMap<String, BTreeSet<ItemKey>>; 4],
    interests: BTreeMap<ItemKey, BTreeSet<String>>,
}

#[allow(dead_code)]
impl ReferenceIndex {
    pub fn build<'a, I>(activities: I, interests: BTreeMap<ItemKey, BTreeSet<String>>) -> Self
    where
        I: IntoIterator<Item = &'a ActivityRecord>,
    {
        let mut sets: [BTreeMap<String, BTreeSet<ItemKey>>; 4] = Default::default();
        for act in activities {
            sets[act.activity.index()]
                .entry(act.user_id.clone())
                .or_default()
                .insert(act.item_key());
        }
        ReferenceIndex { sets, interests }
    }

    fn user_set(&self, activity: ActivityType, user: &str, query: &ItemKey) -> BTreeSet<ItemKey> {
        let mut set = self.sets[activity.index()]
            .get(user)
            .cloned()
            .unwrap_or_default();
        set.remove(query);
        set
    }

    fn tags_intersect(&self, item: &ItemKey, query_tags: &BTreeSet<String>) -> bool {
        match self.interests.get(item) {
            Some(tags) => tags.iter().any(|t| query_tags.contains(t)),
            None => false,
        }
    }

    fn direct(&self, activity: ActivityType, user: &str, query: &ItemKey) -> f64 {
        let set = self.user_set(activity, user, query);
        if set.is_empty() {
            return 0.0;
        }
        let query_tags = self.interests.get(query).cloned().unwrap_or_default();
        let hits = set
            .iter()
            .filter(|item| self.tags_intersect(item, &query_tags))
            .count();
        hits as f64 / set.len() as f64
    }

    fn co(&self, activity: ActivityType, user: &str, query: &ItemKey) -> f64 {
        let own = self.user_set(activity, user, query);
        let mut co_users = Vec::new();
        for v in self.sets[activity.index()].keys() {
            if v == user {
                continue;
            }
            let their = self.user_set(activity, v, query);
            if own.intersection(&their).next().is_some() {
                co_users.push(v.clone());
            }
        }
        if co_users.is_empty() {
            return 0.0;
        }
        let sum: f64 = co_users
            .iter()
            .map(|v| self.direct(activity, v, query))
            .sum();
        sum / co_users.len() as f64
    }

    /// All eight features for one query, in the canonical component
    /// order: the four direct similarities then the four co-activity
    /// similarities, each in fork/watch/answer/favorite order.
    pub fn features(&self, user: &str, query: &ItemKey) -> [f64; 8] {
        let mut out = [0.0; 8];
        for &activity in ACTIVITY_TYPES.iter() {
            out[activity.index()] = self.direct(activity, user, query);
            out[4 + activity.index()] = self.co(activity, user, query);
        }
        out
    }
}

/// Pairwise Mann-Whitney AUC in half-units, straight from the
/// definition.
#[allow(dead_code)]
pub fn reference_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut halves: u64 = 0;
    for p in pos {
        for n in neg {
            if p > n {
                halves += 2;
            } else if p == n {
                halves += 1;
            }
        }
    }
    halves as f64 / (2 * pos.len() * neg.len()) as f64
}

const TAG_POOL: [&str; 12] = [
    "python", "numpy", "pandas", "javascript", "nodejs", "rust", "svm", "regex", "sql", "http",
    "git", "docker",
];
const NOISE_WORDS: [&str; 6] = ["various", "assorted", "misc", "general", "plain", "utility"];

/// A random small corpus: users, items on both platforms with tags drawn
/// from a fixed pool, and activities typed to match their item's
/// platform. Some items stay untagged and some users stay single-sided on
/// purpose.
#[allow(dead_code)]
pub fn random_corpus(
    rng: &mut ChaCha8Rng,
    max_users: usize,
    max_items: usize,
    max_activities: usize,
) -> Corpus {
    let n_users = rng.random_range(2..=max_users.max(2));
    let n_items = rng.random_range(2..=max_items.max(2));
    let n_activities = rng.random_range(1..=max_activities.max(1));
    let base = ts("2014-01-01T00:00:00Z");

    let mut items = Vec::with_capacity(n_items);
    let mut github_items = Vec::new();
    let mut stackoverflow_items = Vec::new();
    for i in 0..n_items {
        let item_id = format!("i{i}");
        if rng.random_bool(0.5) {
            let text = if rng.random_bool(0.2) {
                NOISE_WORDS[rng.random_range(0..NOISE_WORDS.len())].to_string()
            } else {
                let a = TAG_POOL[rng.random_range(0..TAG_POOL.len())];
                let b = NOISE_WORDS[rng.random_range(0..NOISE_WORDS.len())];
                format!("{a} {b} helpers")
            };
            items.push(ItemRecord {
                platform: PlatformId::GitHub,
                item_id: item_id.clone(),
                text,
                raw_tags: vec![],
                created_at: base,
            });
            github_items.push(item_id);
        } else {
            let n_tags = rng.random_range(0..=3);
            let raw_tags = (0..n_tags)
                .map(|_| TAG_POOL[rng.random_range(0..TAG_POOL.len())].to_string())
                .collect();
            items.push(ItemRecord {
                platform: PlatformId::StackOverflow,
                item_id: item_id.clone(),
                text: String::new(),
                raw_tags,
                created_at: base,
            });
            stackoverflow_items.push(item_id);
        }
    }
    // Guarantee both platforms have at least one item so every activity
    // type stays drawable.
    if github_items.is_empty() {
        let item_id = format!("i{n_items}");
        items.push(ItemRecord {
            platform: PlatformId::GitHub,
            item_id: item_id.clone(),
            text: "python helpers".to_string(),
            raw_tags: vec![],
            created_at: base,
        });
        github_items.push(item_id);
    }
    if stackoverflow_items.is_empty() {
        let item_id = format!("i{}", n_items + 1);
        items.push(ItemRecord {
            platform: PlatformId::StackOverflow,
            item_id: item_id.clone(),
            text: String::new(),
            raw_tags: vec!["python".to_string()],
            created_at: base,
        });
        stackoverflow_items.push(item_id);
    }

    let mut activities = Vec::with_capacity(n_activities);
    for _ in 0..n_activities {
        let activity = ACTIVITY_TYPES[rng.random_range(0..4)];
        let pool = match activity.platform() {
            PlatformId::GitHub => &github_items,
            PlatformId::StackOverflow => &stackoverflow_items,
        };
        let item_id = pool[rng.random_range(0..pool.len())].clone();
        let user_id = format!("u{}", rng.random_range(0..n_users));
        let offset = rng.random_range(0..86_400 * 365);
        activities.push(ActivityRecord {
            user_id,
            item_id,
            activity,
            timestamp: base + chrono::TimeDelta::seconds(offset),
        });
    }

    Corpus::from_parts(items, activities, vec![], None)
        .expect("generated corpus is well formed")
        .0
}

/// The library's interests map flattened to plain tag sets for the
/// reference implementation.
#[allow(dead_code)]
pub fn plain_interests(corpus: &Corpus) -> BTreeMap<ItemKey, BTreeSet<String>> {
    let vocabulary = crossact::interests::build_vocabulary(corpus).expect("questions exist");
    crossact::interests::item_interests(corpus, &vocabulary)
        .into_iter()
        .map(|(key, set)| {
            let tags: BTreeSet<String> = set.tags().map(str::to_string).collect();
            (key, tags)
        })
        .collect()
}
