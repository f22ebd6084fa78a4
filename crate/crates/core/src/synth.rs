//! Synthetic two-platform corpora with planted interest structure.
//!
//! Every generated user holds one cross-platform topic preference that
//! drives their activity on GitHub and Stack Overflow alike, so the
//! predictive signal the feature pipeline is supposed to recover is known
//! by construction. The generator returns the corpus together with each
//! user's ground-truth topic distribution.
//!
//! Topics own disjoint tag sets drawn from a closed synthetic namespace
//! (consonant-vowel syllable triples like `kelabo`), question tags are
//! the topic's tags verbatim, and repository descriptions embed them as
//! plain words, so the keyword matcher in [`crate::interests`] can
//! recover each item's planted topic exactly.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::TimeDelta;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    parse_timestamp, AccountLink, ActivityRecord, Corpus, ItemRecord, PlatformId, Window,
    ACTIVITY_TYPES,
};
use crate::error::{Error, Result};

const CONSONANTS: [char; 6] = ['b', 'd', 'k', 'l', 'm', 'z'];
const VOWELS: [char; 4] = ['a', 'e', 'i', 'o'];

/// Size of the tag namespace: three syllables from a 6x4 syllable set.
pub const MAX_DISTINCT_TAGS: usize = 24 * 24 * 24;

/// Adjectives and nouns sprinkled into repository descriptions. None of
/// them collide with the syllable namespace, so they never leak into
/// inferred interests.
const FILLER_ADJECTIVES: [&str; 8] = [
    "fast", "simple", "tiny", "robust", "modular", "portable", "typed", "async",
];
const FILLER_NOUNS: [&str; 8] = [
    "library", "toolkit", "framework", "parser", "client", "engine", "helpers", "bindings",
];

/// Parameters of one synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub n_users: usize,
    pub n_repos: usize,
    pub n_questions: usize,
    pub n_topics: usize,
    pub tags_per_topic: usize,
    /// Concentration of a user's preference on their favorite topic. 0
    /// means uniform; large values collapse the preference onto one
    /// topic.
    pub user_affinity_sharpness: f64,
    /// Mean activities per user per activity type (Poisson).
    pub activity_rate: f64,
    /// Probability an activity ignores the user's preference and picks an
    /// item uniformly.
    pub noise_rate: f64,
    pub window: Window,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_users: 500,
            n_repos: 1000,
            n_questions: 1000,
            n_topics: 10,
            tags_per_topic: 5,
            user_affinity_sharpness: 6.0,
            activity_rate: 20.0,
            noise_rate: 0.15,
            window: Window {
                start: parse_timestamp("2013-10-01T00:00:00Z").unwrap(),
                end: parse_timestamp("2015-04-01T00:00:00Z").unwrap(),
            },
            seed: 7,
        }
    }
}

impl SynthSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SynthSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("n_users", self.n_users),
            ("n_repos", self.n_repos),
            ("n_questions", self.n_questions),
            ("n_topics", self.n_topics),
            ("tags_per_topic", self.tags_per_topic),
        ] {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        let tags_needed = self.n_topics.checked_mul(self.tags_per_topic);
        if tags_needed.is_none() || tags_needed.unwrap() > MAX_DISTINCT_TAGS {
            return Err(Error::Config(format!(
                "{} topics x {} tags exceed the {MAX_DISTINCT_TAGS} distinct generable tags",
                self.n_topics, self.tags_per_topic
            )));
        }
        if self.n_repos < self.n_topics || self.n_questions < self.n_topics {
            return Err(Error::Config(
                "need at least one repository and one question per topic".to_string(),
            ));
        }
        if !(self.user_affinity_sharpness >= 0.0 && self.user_affinity_sharpness.is_finite()) {
            return Err(Error::Config(
                "user_affinity_sharpness must be a nonnegative finite number".to_string(),
            ));
        }
        if !(self.activity_rate >= 0.0 && self.activity_rate.is_finite()) {
            return Err(Error::Config(
                "activity_rate must be a nonnegative finite number".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return Err(Error::Config("noise_rate must lie in [0, 1]".to_string()));
        }
        if self.window.start >= self.window.end {
            return Err(Error::Config(format!(
                "window must have positive width: {}",
                self.window
            )));
        }
        Ok(())
    }
}

/// Ground truth: each user's topic preference distribution, in topic
/// index order.
pub type GroundTruth = BTreeMap<String, Vec<f64>>;

pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";

fn tag_name(index: usize) -> String {
    let syllable = |i: usize| {
        let c = CONSONANTS[i / VOWELS.len()];
        let v = VOWELS[i % VOWELS.len()];
        [c, v]
    };
    let mut out = String::with_capacity(6);
    for part in [index / (24 * 24), (index / 24) % 24, index % 24] {
        out.extend(syllable(part));
    }
    out
}

/// The tag sets the topics own, in topic order. Tag assignment is a fixed
/// function of the counts, independent of any seed.
pub fn topic_tags(n_topics: usize, tags_per_topic: usize) -> Result<Vec<Vec<String>>> {
    let total = n_topics.checked_mul(tags_per_topic).filter(|t| *t <= MAX_DISTINCT_TAGS);
    let Some(_) = total else {
        return Err(Error::InvalidArgument(format!(
            "{n_topics} topics x {tags_per_topic} tags exceed the {MAX_DISTINCT_TAGS} distinct generable tags"
        )));
    };
    Ok((0..n_topics)
        .map(|t| {
            (0..tags_per_topic)
                .map(|j| tag_name(t * tags_per_topic + j))
                .collect()
        })
        .collect())
}

/// Probability mass the favorite topic gets under sharpness `s` with `k`
/// topics: the softmax of one logit `s` against `k - 1` zeros.
fn favorite_mass(k: usize, s: f64) -> f64 {
    1.0 / (1.0 + (k as f64 - 1.0) * (-s).exp())
}

struct ItemPools {
    /// All item ids of the platform, by generation index.
    all: Vec<String>,
    /// Item indices per topic.
    by_topic: Vec<Vec<usize>>,
}

fn sample_topic(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let mut x = rng.random_range(0.0..1.0);
    for (topic, w) in weights.iter().enumerate() {
        if x < *w {
            return topic;
        }
        x -= w;
    }
    weights.len() - 1
}

/// Generates a corpus from `spec`. Deterministic: one seeded stream
/// consumed in a fixed order (repositories, questions, user preferences,
/// then activities by user and activity type).
pub fn generate_corpus(spec: &SynthSpec) -> Result<(Corpus, GroundTruth)> {
    spec.validate()?;
    let tags = topic_tags(spec.n_topics, spec.tags_per_topic)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut items = Vec::with_capacity(spec.n_repos + spec.n_questions);
    let mut repos = ItemPools {
        all: Vec::with_capacity(spec.n_repos),
        by_topic: vec![Vec::new(); spec.n_topics],
    };
    for i in 0..spec.n_repos {
        // The first n_topics items cover every topic; the rest draw
        // uniformly.
        let topic = if i < spec.n_topics {
            i
        } else {
            rng.random_range(0..spec.n_topics)
        };
        let adjective = FILLER_ADJECTIVES[rng.random_range(0..FILLER_ADJECTIVES.len())];
        let noun = FILLER_NOUNS[rng.random_range(0..FILLER_NOUNS.len())];
        let item_id = format!("r{i}");
        items.push(ItemRecord {
            platform: PlatformId::GitHub,
            item_id: item_id.clone(),
            text: format!("{adjective} {noun} for {}", tags[topic].join(" ")),
            raw_tags: vec![],
            created_at: spec.window.start,
        });
        repos.by_topic[topic].push(repos.all.len());
        repos.all.push(item_id);
    }

    let mut questions = ItemPools {
        all: Vec::with_capacity(spec.n_questions),
        by_topic: vec![Vec::new(); spec.n_topics],
    };
    for i in 0..spec.n_questions {
        let topic = if i < spec.n_topics {
            i
        } else {
            rng.random_range(0..spec.n_topics)
        };
        let item_id = format!("q{i}");
        items.push(ItemRecord {
            platform: PlatformId::StackOverflow,
            item_id: item_id.clone(),
            text: format!("question about {}", tags[topic][0]),
            raw_tags: tags[topic].clone(),
            created_at: spec.window.start,
        });
        questions.by_topic[topic].push(questions.all.len());
        questions.all.push(item_id);
    }

    let favorite_weight = favorite_mass(spec.n_topics, spec.user_affinity_sharpness);
    let rest_weight = if spec.n_topics > 1 {
        (1.0 - favorite_weight) / (spec.n_topics as f64 - 1.0)
    } else {
        0.0
    };
    let mut ground_truth = GroundTruth::new();
    let mut users = Vec::with_capacity(spec.n_users);
    let mut links = Vec::with_capacity(spec.n_users);
    for i in 0..spec.n_users {
        let user_id = format!("user{i}");
        let favorite = rng.random_range(0..spec.n_topics);
        let mut weights = vec![rest_weight; spec.n_topics];
        weights[favorite] = favorite_weight;
        ground_truth.insert(user_id.clone(), weights);
        links.push(AccountLink {
            canonical_id: user_id.clone(),
            github_login: format!("{user_id}@github"),
            stackoverflow_user_id: format!("{}", 100_000 + i),
        });
        users.push(user_id);
    }

    let window_seconds = (spec.window.end - spec.window.start).num_seconds();
    let mut activities = Vec::new();
    for user_id in &users {
        let weights = &ground_truth[user_id];
        for &activity in ACTIVITY_TYPES.iter() {
            let pools = match activity.platform() {
                PlatformId::GitHub => &repos,
                PlatformId::StackOverflow => &questions,
            };
            let count = if spec.activity_rate > 0.0 {
                let poisson = Poisson::new(spec.activity_rate)
                    .map_err(|e| Error::Config(format!("activity_rate: {e}")))?;
                poisson.sample(&mut rng) as usize
            } else {
                0
            };
            for _ in 0..count {
                let index = if rng.random_bool(spec.noise_rate) {
                    rng.random_range(0..pools.all.len())
                } else {
                    let topic = sample_topic(&mut rng, weights);
                    let pool = &pools.by_topic[topic];
                    pool[rng.random_range(0..pool.len())]
                };
                let offset = rng.random_range(0..window_seconds);
                activities.push(ActivityRecord {
                    user_id: user_id.clone(),
                    item_id: pools.all[index].clone(),
                    activity,
                    timestamp: spec.window.start + TimeDelta::seconds(offset),
                });
            }
        }
    }

    let (corpus, _) = Corpus::from_parts(items, activities, links, Some(spec.window))?;
    Ok((corpus, ground_truth))
}

#[derive(Debug, Serialize, Deserialize)]
struct GroundTruthRow {
    user_id: String,
    weights: Vec<f64>,
}

/// Writes the ground truth as one JSON object per line, in user order.
pub fn write_ground_truth(truth: &GroundTruth, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path)?;
    for (user_id, weights) in truth {
        let row = GroundTruthRow {
            user_id: user_id.clone(),
            weights: weights.clone(),
        };
        let line = serde_json::to_string(&row)
            .map_err(|e| Error::Config(format!("serializing ground truth: {e}")))?;
        writeln!(file, "{line}")?;
    }
    Ok(())
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruth> {
    let file = fs::File::open(path)?;
    let mut truth = GroundTruth::new();
    for (number, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: GroundTruthRow = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.display().to_string(),
            line: number as u64 + 1,
            message: e.to_string(),
        })?;
        truth.insert(row.user_id, row.weights);
    }
    Ok(truth)
}
