//! Instance sampling and train/test split construction.
//!
//! A prediction task is one activity type. Positive instances are `(user,
//! item)` pairs where a base user (active on both platforms in the study
//! window) performed the task activity inside the instance period.
//! Negative instances pair a uniformly drawn base user with a uniformly
//! drawn active item of the task platform, rejecting pairs the user
//! actually acted on *anywhere in the corpus*, so a negative is never just
//! a positive from the other side of the split boundary.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{filter_base_users, ActivityType, Corpus, ItemKey, Window};
use crate::error::{Error, Result};
use crate::features::{FeatureContext, FeatureContextOptions, FeatureVector};
use crate::interests::InterestSet;
use crate::seed::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

/// One sampled `(user, item)` pair for a task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledInstance {
    pub user_id: String,
    pub item_id: String,
    pub label: Label,
    pub task: ActivityType,
}

impl LabeledInstance {
    pub fn item_key(&self) -> ItemKey {
        ItemKey {
            platform: self.task.platform(),
            item_id: self.item_id.clone(),
        }
    }
}

/// Draws `n` distinct positive pairs uniformly without replacement from
/// the base users' task activities inside `window`. Base-user status is
/// judged over the full corpus window; the activity itself must fall in
/// `window`.
pub fn sample_positives(
    corpus: &Corpus,
    task: ActivityType,
    window: &Window,
    n: usize,
    seed: u64,
) -> Result<Vec<LabeledInstance>> {
    let base = filter_base_users(corpus, &corpus.window());
    let population: Vec<(&str, &str)> = {
        let mut pairs = BTreeSet::new();
        for act in corpus.activities() {
            if act.activity == task
                && window.contains(act.timestamp)
                && base.contains(&act.user_id)
            {
                pairs.insert((act.user_id.as_str(), act.item_id.as_str()));
            }
        }
        pairs.into_iter().collect()
    };
    if population.len() < n {
        return Err(Error::InsufficientPositives {
            requested: n,
            available: population.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, population.len(), n);
    Ok(picked
        .into_iter()
        .map(|i| {
            let (user, item) = population[i];
            LabeledInstance {
                user_id: user.to_string(),
                item_id: item.to_string(),
                label: Label::Positive,
                task,
            }
        })
        .collect())
}

/// Draws `n` distinct negative pairs by rejection: uniform base user times
/// uniform item with any activity on the task platform inside `window`,
/// rejecting pairs with a task activity anywhere in the corpus. Gives up
/// with an error when 1000 * n attempts cannot produce `n` acceptances,
/// which corresponds to a rejection rate above 99.9%.
pub fn sample_negatives(
    corpus: &Corpus,
    task: ActivityType,
    window: &Window,
    n: usize,
    seed: u64,
) -> Result<Vec<LabeledInstance>> {
    let users: Vec<String> = filter_base_users(corpus, &corpus.window())
        .into_iter()
        .collect();
    let platform = task.platform();
    let items: Vec<&str> = {
        let mut set = BTreeSet::new();
        for act in corpus.activities() {
            if act.activity.platform() == platform && window.contains(act.timestamp) {
                set.insert(act.item_id.as_str());
            }
        }
        set.into_iter().collect()
    };
    if n > 0 && (users.is_empty() || items.is_empty()) {
        return Err(Error::NegativeSamplingExhausted {
            requested: n,
            accepted: 0,
            attempts: 0,
        });
    }

    let touched: HashSet<(&str, &str)> = corpus
        .activities()
        .iter()
        .filter(|act| act.activity == task)
        .map(|act| (act.user_id.as_str(), act.item_id.as_str()))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = (n as u64).saturating_mul(1000);
    let mut attempts = 0u64;
    let mut drawn: HashSet<(usize, usize)> = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if attempts >= budget {
            return Err(Error::NegativeSamplingExhausted {
                requested: n,
                accepted: out.len(),
                attempts,
            });
        }
        attempts += 1;
        let u = rng.random_range(0..users.len());
        let i = rng.random_range(0..items.len());
        if !drawn.insert((u, i)) {
            continue;
        }
        if touched.contains(&(users[u].as_str(), items[i])) {
            continue;
        }
        out.push(LabeledInstance {
            user_id: users[u].clone(),
            item_id: items[i].to_string(),
            label: Label::Negative,
            task,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub n_pos: usize,
    pub n_neg: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitWindows {
    pub train: Window,
    pub test: Window,
}

impl SplitWindows {
    pub fn validate(&self) -> Result<()> {
        if self.train.end > self.test.start {
            return Err(Error::InvalidArgument(format!(
                "train window {} must end before test window {} starts",
                self.train, self.test
            )));
        }
        Ok(())
    }
}

/// Where feature history for test instances comes from: their own test
/// period (the default), or the training period for a strictly causal
/// variant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistorySource {
    #[default]
    OwnWindow,
    TrainWindow,
}

/// A featurized train/test split for one task.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub task: ActivityType,
    pub windows: SplitWindows,
    pub seed: u64,
    pub train: Vec<(LabeledInstance, FeatureVector)>,
    pub test: Vec<(LabeledInstance, FeatureVector)>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SplitOptions {
    pub history: HistorySource,
    pub co_cap: Option<usize>,
}

/// Samples both periods and featurizes every instance against its
/// period's history. Sampling streams are derived from `seed` per side and
/// label, so train and test draws are independent.
pub fn build_split(
    corpus: &Corpus,
    task: ActivityType,
    sizes: SplitSizes,
    windows: SplitWindows,
    seed: u64,
) -> Result<DatasetSplit> {
    let vocabulary = crate::interests::build_vocabulary(corpus)?;
    let interests = crate::interests::item_interests(corpus, &vocabulary);
    build_split_with(corpus, &interests, task, sizes, windows, seed, SplitOptions::default())
}

/// [`build_split`] with precomputed interests and options; what
/// experiment runs use so interests are inferred once, not per run.
pub fn build_split_with(
    corpus: &Corpus,
    interests: &std::collections::BTreeMap<ItemKey, InterestSet>,
    task: ActivityType,
    sizes: SplitSizes,
    windows: SplitWindows,
    seed: u64,
    options: SplitOptions,
) -> Result<DatasetSplit> {
    let (train, test) = sample_split_instances(corpus, task, sizes, windows, seed)?;

    let context_options = FeatureContextOptions {
        co_cap: options.co_cap,
        co_cap_seed: derive_seed(seed, "co-cap"),
    };
    let train_view = corpus.view(windows.train);
    let train_context = FeatureContext::build(&train_view, interests, context_options);
    let train = featurize_instances(&train_context, train)?;

    let test_view = corpus.view(options.history.window_for_test(&windows));
    let test_context = FeatureContext::build(&test_view, interests, context_options);
    let test = featurize_instances(&test_context, test)?;

    Ok(DatasetSplit {
        task,
        windows,
        seed,
        train,
        test,
    })
}

impl HistorySource {
    /// The period whose activity history featurizes test instances.
    pub fn window_for_test(&self, windows: &SplitWindows) -> Window {
        match self {
            HistorySource::OwnWindow => windows.test,
            HistorySource::TrainWindow => windows.train,
        }
    }
}

/// Draws the train and test instance lists without featurizing them.
/// Sampling streams are derived from `seed` per side and label, so the
/// four draws are independent.
pub fn sample_split_instances(
    corpus: &Corpus,
    task: ActivityType,
    sizes: SplitSizes,
    windows: SplitWindows,
    seed: u64,
) -> Result<(Vec<LabeledInstance>, Vec<LabeledInstance>)> {
    windows.validate()?;
    let mut train = sample_positives(
        corpus,
        task,
        &windows.train,
        sizes.n_pos,
        derive_seed(seed, "train-pos"),
    )?;
    train.extend(sample_negatives(
        corpus,
        task,
        &windows.train,
        sizes.n_neg,
        derive_seed(seed, "train-neg"),
    )?);
    let mut test = sample_positives(
        corpus,
        task,
        &windows.test,
        sizes.n_pos,
        derive_seed(seed, "test-pos"),
    )?;
    test.extend(sample_negatives(
        corpus,
        task,
        &windows.test,
        sizes.n_neg,
        derive_seed(seed, "test-neg"),
    )?);
    Ok((train, test))
}

/// Featurizes in parallel; order-preserving collect keeps the result
/// deterministic regardless of thread count.
pub fn featurize_instances(
    context: &FeatureContext,
    instances: Vec<LabeledInstance>,
) -> Result<Vec<(LabeledInstance, FeatureVector)>> {
    instances
        .into_par_iter()
        .map(|instance| {
            let features = context.featurize(&instance.user_id, &instance.item_key())?;
            Ok((instance, features))
        })
        .collect()
}
