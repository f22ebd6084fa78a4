//! Similarity features over `(user, item)` pairs.
//!
//! Every pair gets eight scores in `[0, 1]`, one per activity type. The
//! four *direct* similarities ask: of the items the user forked / watched /
//! answered / favorited, what fraction shares an interest tag with the
//! query item? The four *co-activity* similarities ask the same question
//! about the histories of the user's co-actors (users who acted on at
//! least one common item of that type), macro-averaged: each co-actor's
//! fraction is computed first and the fractions are averaged, so one very
//! active neighbor cannot drown out the rest.
//!
//! Scoring a pair must not peek at the pair itself. The query item is
//! removed from the user's own sets before the fraction is taken, and a
//! co-actor only counts as one when they share an item *besides* the query
//! item; their fraction excludes it too. Deleting the scored activity from
//! the corpus therefore leaves the pair's feature vector bit-identical,
//! which is what makes the scores usable as leak-free training features.
//!
//! [`sim_activity`] and [`sim_co_activity`] are the plain-map reference
//! implementations. [`FeatureContext`] interns users, items and tags into
//! integer ids for bulk featurization; it must produce bitwise-identical
//! values (summation follows ascending user id in both paths).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ActivityType, CorpusView, ItemKey, ACTIVITY_TYPES};
use crate::error::{Error, Result};
use crate::interests::InterestSet;
use crate::seed::derive_seed;

/// Distinct items one user has acted on, split by activity type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActivitySets {
    pub forked: BTreeSet<String>,
    pub watched: BTreeSet<String>,
    pub answered: BTreeSet<String>,
    pub favorited: BTreeSet<String>,
}

impl ActivitySets {
    pub fn of(&self, activity: ActivityType) -> &BTreeSet<String> {
        match activity {
            ActivityType::Fork => &self.forked,
            ActivityType::Watch => &self.watched,
            ActivityType::Answer => &self.answered,
            ActivityType::Favorite => &self.favorited,
        }
    }

    fn of_mut(&mut self, activity: ActivityType) -> &mut BTreeSet<String> {
        match activity {
            ActivityType::Fork => &mut self.forked,
            ActivityType::Watch => &mut self.watched,
            ActivityType::Answer => &mut self.answered,
            ActivityType::Favorite => &mut self.favorited,
        }
    }
}

pub type ActivitySetsMap = BTreeMap<String, ActivitySets>;

/// Collects per-user activity sets from the view's window.
pub fn build_activity_sets(view: &CorpusView<'_>) -> ActivitySetsMap {
    let mut map = ActivitySetsMap::new();
    for act in view.activities() {
        map.entry(act.user_id.clone())
            .or_default()
            .of_mut(act.activity)
            .insert(act.item_id.clone());
    }
    map
}

/// For each activity type, who shares at least one item with whom.
/// Symmetric and irreflexive by construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoParticipationIndex {
    by_type: [BTreeMap<String, BTreeSet<String>>; 4],
}

impl CoParticipationIndex {
    pub fn co_set(&self, activity: ActivityType, user: &str) -> Option<&BTreeSet<String>> {
        self.by_type[activity.index()].get(user)
    }

    pub fn users(
        &self,
        activity: ActivityType,
    ) -> impl Iterator<Item = (&String, &BTreeSet<String>)> {
        self.by_type[activity.index()].iter()
    }
}

pub fn build_co_index(sets: &ActivitySetsMap) -> CoParticipationIndex {
    let mut item_users: [HashMap<&str, Vec<&str>>; 4] = Default::default();
    for (user, activity_sets) in sets {
        for activity in ACTIVITY_TYPES {
            for item in activity_sets.of(activity) {
                item_users[activity.index()]
                    .entry(item.as_str())
                    .or_default()
                    .push(user.as_str());
            }
        }
    }
    let mut index = CoParticipationIndex::default();
    for activity in ACTIVITY_TYPES {
        let by_user = &mut index.by_type[activity.index()];
        for users in item_users[activity.index()].values() {
            for &u in users {
                for &v in users {
                    if u != v {
                        by_user.entry(u.to_string()).or_default().insert(v.to_string());
                    }
                }
            }
        }
    }
    index
}

fn excluded_id<'k>(item: &'k ItemKey, activity: ActivityType) -> Option<&'k str> {
    (item.platform == activity.platform()).then_some(item.item_id.as_str())
}

fn interest_of<'a>(
    interests: &'a BTreeMap<ItemKey, InterestSet>,
    activity: ActivityType,
    item_id: &str,
) -> Option<&'a InterestSet> {
    interests.get(&ItemKey {
        platform: activity.platform(),
        item_id: item_id.to_string(),
    })
}

/// Direct similarity: the fraction of the user's `activity` items (query
/// item excluded) whose interests overlap the query item's interests.
/// Returns 0 when the user has no such history. Unknown query items are an
/// error; unknown users are simply users with no history.
pub fn sim_activity(
    user_id: &str,
    item: &ItemKey,
    activity: ActivityType,
    sets: &ActivitySetsMap,
    interests: &BTreeMap<ItemKey, InterestSet>,
) -> Result<f64> {
    let query = interests
        .get(item)
        .ok_or_else(|| Error::UnknownItem(item.to_string()))?;
    let Some(user_sets) = sets.get(user_id) else {
        return Ok(0.0);
    };
    let excluded = excluded_id(item, activity);
    let mut total = 0usize;
    let mut matched = 0usize;
    for x in user_sets.of(activity) {
        if Some(x.as_str()) == excluded {
            continue;
        }
        total += 1;
        if let Some(ix) = interest_of(interests, activity, x) {
            if ix.intersects(query) {
                matched += 1;
            }
        }
    }
    if total == 0 {
        Ok(0.0)
    } else {
        Ok(matched as f64 / total as f64)
    }
}

/// Co-activity similarity: the macro-average of [`sim_activity`] over the
/// user's co-actors for `activity`. A co-actor counts only when they share
/// an item with the user besides the query item itself; with no such
/// co-actors the score is 0.
pub fn sim_co_activity(
    user_id: &str,
    item: &ItemKey,
    activity: ActivityType,
    co_index: &CoParticipationIndex,
    sets: &ActivitySetsMap,
    interests: &BTreeMap<ItemKey, InterestSet>,
) -> Result<f64> {
    if !interests.contains_key(item) {
        return Err(Error::UnknownItem(item.to_string()));
    }
    let Some(user_sets) = sets.get(user_id) else {
        return Ok(0.0);
    };
    let Some(co_users) = co_index.co_set(activity, user_id) else {
        return Ok(0.0);
    };
    let excluded = excluded_id(item, activity);
    let own: BTreeSet<&str> = user_sets
        .of(activity)
        .iter()
        .map(String::as_str)
        .filter(|x| Some(*x) != excluded)
        .collect();

    let mut members = 0usize;
    let mut sum = 0.0f64;
    for v in co_users {
        let Some(v_sets) = sets.get(v) else { continue };
        let shares_besides_query = v_sets
            .of(activity)
            .iter()
            .any(|x| Some(x.as_str()) != excluded && own.contains(x.as_str()));
        if !shares_besides_query {
            continue;
        }
        members += 1;
        sum += sim_activity(v, item, activity, sets, interests)?;
    }
    if members == 0 {
        Ok(0.0)
    } else {
        Ok(sum / members as f64)
    }
}

/// The eight similarity scores for one `(user, item)` pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub sim_fork: f64,
    pub sim_watch: f64,
    pub sim_ans: f64,
    pub sim_fav: f64,
    pub sim_cofork: f64,
    pub sim_cowatch: f64,
    pub sim_coans: f64,
    pub sim_cofav: f64,
}

impl FeatureVector {
    pub const DIM: usize = 8;

    pub fn as_array(&self) -> [f64; 8] {
        [
            self.sim_fork,
            self.sim_watch,
            self.sim_ans,
            self.sim_fav,
            self.sim_cofork,
            self.sim_cowatch,
            self.sim_coans,
            self.sim_cofav,
        ]
    }

    pub fn from_array(values: [f64; 8]) -> Self {
        FeatureVector {
            sim_fork: values[0],
            sim_watch: values[1],
            sim_ans: values[2],
            sim_fav: values[3],
            sim_cofork: values[4],
            sim_cowatch: values[5],
            sim_coans: values[6],
            sim_cofav: values[7],
        }
    }

    pub fn component_names() -> [&'static str; 8] {
        [
            "sim_fork",
            "sim_watch",
            "sim_ans",
            "sim_fav",
            "sim_cofork",
            "sim_cowatch",
            "sim_coans",
            "sim_cofav",
        ]
    }
}

/// Which feature subset a model trains on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureConfig {
    #[serde(rename = "SO_Act")]
    SoAct,
    #[serde(rename = "SO_CoAct")]
    SoCoAct,
    #[serde(rename = "GH_Act")]
    GhAct,
    #[serde(rename = "GH_CoAct")]
    GhCoAct,
    #[serde(rename = "ALL")]
    All,
}

pub const FEATURE_CONFIGS: [FeatureConfig; 5] = [
    FeatureConfig::SoAct,
    FeatureConfig::SoCoAct,
    FeatureConfig::GhAct,
    FeatureConfig::GhCoAct,
    FeatureConfig::All,
];

impl fmt::Display for FeatureConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureConfig::SoAct => "SO_Act",
            FeatureConfig::SoCoAct => "SO_CoAct",
            FeatureConfig::GhAct => "GH_Act",
            FeatureConfig::GhCoAct => "GH_CoAct",
            FeatureConfig::All => "ALL",
        })
    }
}

impl std::str::FromStr for FeatureConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "SO_Act" => Ok(FeatureConfig::SoAct),
            "SO_CoAct" => Ok(FeatureConfig::SoCoAct),
            "GH_Act" => Ok(FeatureConfig::GhAct),
            "GH_CoAct" => Ok(FeatureConfig::GhCoAct),
            "ALL" => Ok(FeatureConfig::All),
            other => Err(Error::InvalidArgument(format!(
                "unknown feature config {other:?}"
            ))),
        }
    }
}

/// Projects a feature vector onto the components a config uses.
pub fn select_config(vector: &FeatureVector, config: FeatureConfig) -> Vec<f64> {
    match config {
        FeatureConfig::SoAct => vec![vector.sim_ans, vector.sim_fav],
        FeatureConfig::SoCoAct => vec![vector.sim_coans, vector.sim_cofav],
        FeatureConfig::GhAct => vec![vector.sim_fork, vector.sim_watch],
        FeatureConfig::GhCoAct => vec![vector.sim_cofork, vector.sim_cowatch],
        FeatureConfig::All => vector.as_array().to_vec(),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureContextOptions {
    /// Cap on co-actor set size per (user, activity). When a set exceeds
    /// the cap it is replaced by a seeded uniform subsample. Off by
    /// default; exact co-sets are the reference behavior.
    pub co_cap: Option<usize>,
    pub co_cap_seed: u64,
}

/// Interned snapshot of one corpus view for bulk featurization: users,
/// items and tags as integer ids, activity sets and co-actor lists as
/// sorted id vectors. Building it costs one pass over the view; each
/// [`featurize_pair`] call is then linear in the sizes of the sets it
/// touches.
pub struct FeatureContext {
    users: Vec<String>,
    user_index: HashMap<String, u32>,
    items: Vec<ItemKey>,
    item_index: HashMap<ItemKey, u32>,
    /// Sorted tag ids per item, parallel to `items`.
    item_tags: Vec<Vec<u32>>,
    /// Items below this index have interest entries; the rest only ever
    /// appeared inside activity sets and cannot be queried.
    known_items: usize,
    /// Per user: per activity type, sorted item ids.
    sets: Vec<[Vec<u32>; 4]>,
    /// Per activity type: per user, sorted co-actor ids.
    co: [Vec<Vec<u32>>; 4],
    options: FeatureContextOptions,
}

impl FeatureContext {
    pub fn build(
        view: &CorpusView<'_>,
        interests: &BTreeMap<ItemKey, InterestSet>,
        options: FeatureContextOptions,
    ) -> FeatureContext {
        let activity_sets = build_activity_sets(view);

        let users: Vec<String> = activity_sets.keys().cloned().collect();
        let user_index: HashMap<String, u32> = users
            .iter()
            .enumerate()
            .map(|(i, u)| (u.clone(), i as u32))
            .collect();

        // Tag ids follow sorted tag order, so sorted id vectors stay in
        // sync with sorted-string iteration in the reference path.
        let tag_set: BTreeSet<&str> = interests.values().flat_map(|s| s.tags()).collect();
        let tag_ids: HashMap<&str, u32> = tag_set
            .iter()
            .enumerate()
            .map(|(i, t)| (*t, i as u32))
            .collect();

        let mut items: Vec<ItemKey> = interests.keys().cloned().collect();
        let mut item_tags: Vec<Vec<u32>> = interests
            .values()
            .map(|set| set.tags().map(|t| tag_ids[t]).collect())
            .collect();
        let known_items = items.len();

        let mut item_index: HashMap<ItemKey, u32> = items
            .iter()
            .enumerate()
            .map(|(i, k)| (k.clone(), i as u32))
            .collect();

        // Activity-set items missing from the interest map (possible when
        // the map was not built over this corpus) are interned with empty
        // tags so denominators still count them.
        let mut phantoms: BTreeSet<ItemKey> = BTreeSet::new();
        for sets in activity_sets.values() {
            for activity in ACTIVITY_TYPES {
                for id in sets.of(activity) {
                    let key = ItemKey {
                        platform: activity.platform(),
                        item_id: id.clone(),
                    };
                    if !item_index.contains_key(&key) {
                        phantoms.insert(key);
                    }
                }
            }
        }
        for key in phantoms {
            item_index.insert(key.clone(), items.len() as u32);
            items.push(key);
            item_tags.push(Vec::new());
        }

        let sets: Vec<[Vec<u32>; 4]> = users
            .iter()
            .map(|user| {
                let activity_sets = &activity_sets[user];
                ACTIVITY_TYPES.map(|activity| {
                    let mut ids: Vec<u32> = activity_sets
                        .of(activity)
                        .iter()
                        .map(|id| {
                            item_index[&ItemKey {
                                platform: activity.platform(),
                                item_id: id.clone(),
                            }]
                        })
                        .collect();
                    ids.sort_unstable();
                    ids
                })
            })
            .collect();

        // Invert item -> users, then expand to co-actor lists.
        let co = ACTIVITY_TYPES.map(|activity| {
            let a = activity.index();
            let mut item_users: HashMap<u32, Vec<u32>> = HashMap::new();
            for (u, user_sets) in sets.iter().enumerate() {
                for &item in &user_sets[a] {
                    item_users.entry(item).or_default().push(u as u32);
                }
            }
            let mut co: Vec<Vec<u32>> = vec![Vec::new(); users.len()];
            for users_of_item in item_users.values() {
                for &u in users_of_item {
                    for &v in users_of_item {
                        if u != v {
                            co[u as usize].push(v);
                        }
                    }
                }
            }
            for list in &mut co {
                list.sort_unstable();
                list.dedup();
            }
            co
        });

        FeatureContext {
            users,
            user_index,
            items,
            item_index,
            item_tags,
            known_items,
            sets,
            co,
            options,
        }
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn item_count(&self) -> usize {
        self.known_items
    }

    fn ratio(&self, set: &[u32], excluded: Option<u32>, matched: &[bool]) -> f64 {
        let mut total = 0usize;
        let mut hits = 0usize;
        for &x in set {
            if Some(x) == excluded {
                continue;
            }
            total += 1;
            if matched[x as usize] {
                hits += 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            hits as f64 / total as f64
        }
    }

    /// Co-actor list for `(user, activity)` after the optional cap.
    /// Returns indices into an owned buffer to keep the capped case cheap.
    fn co_actors(&self, user: u32, activity_index: usize) -> std::borrow::Cow<'_, [u32]> {
        let full = &self.co[activity_index][user as usize];
        match self.options.co_cap {
            Some(cap) if full.len() > cap => {
                let label = format!("co-cap:{activity_index}:{user}");
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(self.options.co_cap_seed, &label));
                let mut picked: Vec<u32> = rand::seq::index::sample(&mut rng, full.len(), cap)
                    .into_iter()
                    .map(|i| full[i])
                    .collect();
                picked.sort_unstable();
                std::borrow::Cow::Owned(picked)
            }
            _ => std::borrow::Cow::Borrowed(full.as_slice()),
        }
    }

    pub fn featurize(&self, user_id: &str, item: &ItemKey) -> Result<FeatureVector> {
        let Some(&item_id) = self.item_index.get(item) else {
            return Err(Error::UnknownItem(item.to_string()));
        };
        if item_id as usize >= self.known_items {
            return Err(Error::UnknownItem(item.to_string()));
        }

        let Some(&user) = self.user_index.get(user_id) else {
            return Ok(FeatureVector::default());
        };

        // One linear pass marks every item that shares a tag with the
        // query; all eight scores then reduce to counting marks.
        let query_tags = &self.item_tags[item_id as usize];
        let mut matched = vec![false; self.items.len()];
        for (i, tags) in self.item_tags.iter().enumerate() {
            matched[i] = sorted_intersects(tags, query_tags);
        }

        let mut own_marks = vec![false; self.items.len()];
        let mut values = [0.0f64; 8];
        for activity in ACTIVITY_TYPES {
            let a = activity.index();
            let excluded = (item.platform == activity.platform()).then_some(item_id);
            let own = &self.sets[user as usize][a];
            values[a] = self.ratio(own, excluded, &matched);

            for &x in own {
                if Some(x) != excluded {
                    own_marks[x as usize] = true;
                }
            }
            let mut members = 0usize;
            let mut sum = 0.0f64;
            for &v in self.co_actors(user, a).iter() {
                let v_set = &self.sets[v as usize][a];
                let shares = v_set
                    .iter()
                    .any(|&x| Some(x) != excluded && own_marks[x as usize]);
                if shares {
                    members += 1;
                    sum += self.ratio(v_set, excluded, &matched);
                }
            }
            values[4 + a] = if members == 0 { 0.0 } else { sum / members as f64 };
            for &x in own {
                own_marks[x as usize] = false;
            }
        }

        Ok(FeatureVector::from_array(values))
    }
}

/// See [`FeatureContext::featurize`].
pub fn featurize_pair(user_id: &str, item: &ItemKey, context: &FeatureContext) -> Result<FeatureVector> {
    context.featurize(user_id, item)
}

fn sorted_intersects(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

/// One labeled, featurized pair, as exported to record files.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub user_id: String,
    pub item_id: String,
    pub label: bool,
    pub features: FeatureVector,
}

/// Writes records as tab-separated `user_id item_id label f1..f8`, label
/// as `1`/`0`, features in `{:.16e}` so values round-trip exactly.
pub fn write_feature_records<W: Write>(records: &[FeatureRecord], mut out: W) -> Result<()> {
    for record in records {
        write!(
            out,
            "{}\t{}\t{}",
            record.user_id,
            record.item_id,
            if record.label { 1 } else { 0 }
        )?;
        for value in record.features.as_array() {
            write!(out, "\t{value:.16e}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_feature_records<R: BufRead>(input: R) -> Result<Vec<FeatureRecord>> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: &str| Error::Format {
            path: "features".to_string(),
            line: idx as u64 + 1,
            message: message.to_string(),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 + FeatureVector::DIM {
            return Err(bad("expected 11 tab-separated fields"));
        }
        let label = match fields[2] {
            "1" => true,
            "0" => false,
            _ => return Err(bad("label must be 0 or 1")),
        };
        let mut values = [0.0f64; 8];
        for (slot, field) in values.iter_mut().zip(&fields[3..]) {
            *slot = field.parse().map_err(|_| bad("unparseable feature value"))?;
        }
        records.push(FeatureRecord {
            user_id: fields[0].to_string(),
            item_id: fields[1].to_string(),
            label,
            features: FeatureVector::from_array(values),
        });
    }
    Ok(records)
}
