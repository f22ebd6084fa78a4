//! Canonical corpus: items, activities and account links from both
//! platforms, joined under canonical user ids.
//!
//! Raw dumps enter through [`parse_stackoverflow_posts`] and
//! [`parse_github_events`], which emit platform-local user ids. The join
//! happens in [`link_accounts`]: linked accounts collapse onto their
//! canonical id, unlinked ones keep a platform-prefixed synthetic id so no
//! activity is lost. The result is a [`Corpus`] that every later stage
//! consumes through read-only [`CorpusView`] windows.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod files;
mod github;
mod so;

pub use files::{
    read_activities, read_corpus, read_items, read_links, read_links_file, write_corpus,
    ACTIVITIES_FILE, ITEMS_FILE, LINKS_FILE,
};
pub use github::parse_github_events;
pub use so::parse_stackoverflow_posts;

pub type Timestamp = DateTime<Utc>;

/// The two sites the corpus knows about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlatformId {
    GitHub,
    StackOverflow,
}

impl fmt::Display for PlatformId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlatformId::GitHub => "github",
            PlatformId::StackOverflow => "stackoverflow",
        })
    }
}

/// The four activity types. Each implies its platform: forks and watches
/// happen to repositories, answers and favorites to questions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivityType {
    Fork,
    Watch,
    Answer,
    Favorite,
}

/// All activity types in the order feature vectors use.
pub const ACTIVITY_TYPES: [ActivityType; 4] = [
    ActivityType::Fork,
    ActivityType::Watch,
    ActivityType::Answer,
    ActivityType::Favorite,
];

impl ActivityType {
    pub fn platform(self) -> PlatformId {
        match self {
            ActivityType::Fork | ActivityType::Watch => PlatformId::GitHub,
            ActivityType::Answer | ActivityType::Favorite => PlatformId::StackOverflow,
        }
    }

    /// Index into per-type arrays; follows [`ACTIVITY_TYPES`] order.
    pub fn index(self) -> usize {
        match self {
            ActivityType::Fork => 0,
            ActivityType::Watch => 1,
            ActivityType::Answer => 2,
            ActivityType::Favorite => 3,
        }
    }
}

impl fmt::Display for ActivityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActivityType::Fork => "fork",
            ActivityType::Watch => "watch",
            ActivityType::Answer => "answer",
            ActivityType::Favorite => "favorite",
        })
    }
}

/// Half-open time interval `[start, end)`. A zero-width window is legal and
/// contains nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl Window {
    pub fn new(start: Timestamp, end: Timestamp) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidArgument(format!(
                "window bounds inverted: {start} > {end}"
            )));
        }
        Ok(Window { start, end })
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t < self.end
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Identifies an item. Item ids are only unique within a platform, so the
/// platform is part of the key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemKey {
    pub platform: PlatformId,
    pub item_id: String,
}

impl fmt::Display for ItemKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.platform, self.item_id)
    }
}

/// A repository or question. `text` holds whatever natural language the
/// platform offers (repository description, question title plus tags);
/// `raw_tags` holds question tags exactly as dumped, empty for repositories.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemRecord {
    pub platform: PlatformId,
    pub item_id: String,
    pub text: String,
    pub raw_tags: Vec<String>,
    pub created_at: Timestamp,
}

impl ItemRecord {
    pub fn key(&self) -> ItemKey {
        ItemKey {
            platform: self.platform,
            item_id: self.item_id.clone(),
        }
    }
}

/// One user-item interaction under a canonical user id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityRecord {
    pub user_id: String,
    pub item_id: String,
    pub activity: ActivityType,
    pub timestamp: Timestamp,
}

impl ActivityRecord {
    pub fn item_key(&self) -> ItemKey {
        ItemKey {
            platform: self.activity.platform(),
            item_id: self.item_id.clone(),
        }
    }
}

/// One row of the account link file: a person with accounts on both sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountLink {
    pub canonical_id: String,
    pub github_login: String,
    pub stackoverflow_user_id: String,
}

/// An activity as a parser emits it, keyed by the platform-local user id.
/// [`link_accounts`] rewrites it onto a canonical id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawActivity {
    pub platform_user_id: String,
    pub item_id: String,
    pub activity: ActivityType,
    pub timestamp: Timestamp,
}

/// Counters a parser accumulates while skipping over bad input. Malformed
/// rows never abort a parse; they land here.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostics {
    /// Items produced.
    pub items: u64,
    /// Activities produced.
    pub activities: u64,
    /// Rows or lines that did not decode (bad syntax, bad timestamp).
    pub malformed: u64,
    /// Rows missing a required field.
    pub missing_field: u64,
    /// Rows with an unrecognized type.
    pub unknown_kind: u64,
    /// Well-formed rows the corpus has no use for (other post types,
    /// non-favorite votes).
    pub ignored: u64,
}

impl ParseDiagnostics {
    pub fn merge(&mut self, other: &ParseDiagnostics) {
        self.items += other.items;
        self.activities += other.activities;
        self.malformed += other.malformed;
        self.missing_field += other.missing_field;
        self.unknown_kind += other.unknown_kind;
        self.ignored += other.ignored;
    }
}

/// Output of one platform parser: items, activities under platform-local
/// user ids, and skip counters.
#[derive(Debug, Default)]
pub struct ParsedDump {
    pub items: Vec<ItemRecord>,
    pub activities: Vec<RawActivity>,
    pub diagnostics: ParseDiagnostics,
}

/// Counters from corpus assembly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorpusDiagnostics {
    /// Activities referencing an item the corpus does not contain.
    pub dropped_dangling: u64,
    /// Repeated (user, item, activity) triples collapsed onto the earliest.
    pub deduplicated: u64,
    /// Items whose key appeared more than once; the first record wins.
    pub duplicate_items: u64,
}

/// The canonical corpus. Items are keyed by `(platform, item_id)`,
/// activities are deduplicated and sorted by `(timestamp, user, item,
/// activity)`, and `window` spans every activity timestamp.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    items: BTreeMap<ItemKey, ItemRecord>,
    activities: Vec<ActivityRecord>,
    links: Vec<AccountLink>,
    window: Window,
}

impl Corpus {
    /// Assembles a corpus from parts, enforcing its invariants.
    ///
    /// Dangling activities are dropped and counted, repeated (user, item,
    /// activity) triples keep their earliest timestamp, and links must be
    /// unique per canonical id and per platform account. When `window` is
    /// omitted it is derived as the tight span of the activities; when given
    /// it must contain every activity timestamp.
    pub fn from_parts(
        items: Vec<ItemRecord>,
        activities: Vec<ActivityRecord>,
        links: Vec<AccountLink>,
        window: Option<Window>,
    ) -> Result<(Corpus, CorpusDiagnostics)> {
        let mut diag = CorpusDiagnostics::default();

        validate_links(&links)?;
        let mut links = links;
        links.sort_by(|a, b| a.canonical_id.cmp(&b.canonical_id));

        let mut item_map = BTreeMap::new();
        for item in items {
            match item_map.entry(item.key()) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(item);
                }
                std::collections::btree_map::Entry::Occupied(_) => diag.duplicate_items += 1,
            }
        }

        let mut kept: Vec<ActivityRecord> = Vec::with_capacity(activities.len());
        for act in activities {
            if item_map.contains_key(&act.item_key()) {
                kept.push(act);
            } else {
                diag.dropped_dangling += 1;
            }
        }

        // Deduplicate on (user, item, activity), keeping the earliest
        // timestamp: sort puts the earliest first within each triple.
        kept.sort_by(|a, b| {
            (&a.user_id, &a.item_id, a.activity, a.timestamp).cmp(&(
                &b.user_id,
                &b.item_id,
                b.activity,
                b.timestamp,
            ))
        });
        let before = kept.len();
        kept.dedup_by(|next, first| {
            next.user_id == first.user_id
                && next.item_id == first.item_id
                && next.activity == first.activity
        });
        diag.deduplicated = (before - kept.len()) as u64;

        kept.sort_by(|a, b| {
            (a.timestamp, &a.user_id, &a.item_id, a.activity).cmp(&(
                b.timestamp,
                &b.user_id,
                &b.item_id,
                b.activity,
            ))
        });

        let window = match window {
            Some(w) => {
                if let Some(outside) = kept.iter().find(|a| !w.contains(a.timestamp)) {
                    return Err(Error::InvalidArgument(format!(
                        "activity at {} lies outside corpus window {w}",
                        outside.timestamp
                    )));
                }
                w
            }
            None => derive_window(&kept),
        };

        Ok((
            Corpus {
                items: item_map,
                activities: kept,
                links,
                window,
            },
            diag,
        ))
    }

    /// Items in `(platform, item_id)` order.
    pub fn items(&self) -> impl Iterator<Item = &ItemRecord> {
        self.items.values()
    }

    pub fn item(&self, key: &ItemKey) -> Option<&ItemRecord> {
        self.items.get(key)
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    /// Activities in `(timestamp, user, item, activity)` order.
    pub fn activities(&self) -> &[ActivityRecord] {
        &self.activities
    }

    pub fn links(&self) -> &[AccountLink] {
        &self.links
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// View over the full corpus window.
    pub fn full_view(&self) -> CorpusView<'_> {
        CorpusView {
            corpus: self,
            window: self.window,
        }
    }

    /// View over `[start, end)`. Errors on inverted bounds; a zero-width
    /// slice is valid and sees no activities.
    pub fn window_slice(&self, start: Timestamp, end: Timestamp) -> Result<CorpusView<'_>> {
        Ok(CorpusView {
            corpus: self,
            window: Window::new(start, end)?,
        })
    }

    pub fn view(&self, window: Window) -> CorpusView<'_> {
        CorpusView {
            corpus: self,
            window,
        }
    }
}

fn derive_window(activities: &[ActivityRecord]) -> Window {
    match (activities.first(), activities.last()) {
        // Activities are sorted by timestamp, so first/last bound the span.
        // The end is exclusive; one second past the last keeps it inside.
        (Some(first), Some(last)) => Window {
            start: first.timestamp,
            end: last.timestamp + TimeDelta::seconds(1),
        },
        _ => Window {
            start: DateTime::<Utc>::UNIX_EPOCH,
            end: DateTime::<Utc>::UNIX_EPOCH,
        },
    }
}

fn validate_links(links: &[AccountLink]) -> Result<()> {
    let mut canonical = BTreeMap::new();
    let mut github = BTreeMap::new();
    let mut stackoverflow = BTreeMap::new();
    let mut offenders = BTreeSet::new();
    for link in links {
        if canonical.insert(&link.canonical_id, link).is_some() {
            offenders.insert(format!("canonical_id {}", link.canonical_id));
        }
        if github.insert(&link.github_login, link).is_some() {
            offenders.insert(format!("github_login {}", link.github_login));
        }
        if stackoverflow
            .insert(&link.stackoverflow_user_id, link)
            .is_some()
        {
            offenders.insert(format!(
                "stackoverflow_user_id {}",
                link.stackoverflow_user_id
            ));
        }
    }
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(Error::LinkValidation(
            offenders.into_iter().collect::<Vec<_>>().join(", "),
        ))
    }
}

/// A read-only window onto a corpus. Activities outside the window are
/// invisible; items are not time-filtered.
#[derive(Clone, Copy)]
pub struct CorpusView<'a> {
    corpus: &'a Corpus,
    window: Window,
}

impl<'a> CorpusView<'a> {
    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn activities(&self) -> impl Iterator<Item = &'a ActivityRecord> {
        let window = self.window;
        self.corpus
            .activities
            .iter()
            .filter(move |a| window.contains(a.timestamp))
    }

    pub fn items(&self) -> impl Iterator<Item = &'a ItemRecord> {
        self.corpus.items()
    }

    pub fn item(&self, key: &ItemKey) -> Option<&'a ItemRecord> {
        self.corpus.item(key)
    }
}

/// Joins parser outputs into one corpus under canonical user ids.
///
/// Linked accounts map onto their canonical id. Unlinked users are kept
/// under synthetic ids (`gh:<login>`, `so:<user id>`); they can never count
/// as active on both platforms but their activities still feed co-activity
/// features. Link uniqueness violations are fatal.
pub fn link_accounts(
    links: Vec<AccountLink>,
    github: ParsedDump,
    stackoverflow: ParsedDump,
) -> Result<(Corpus, CorpusDiagnostics)> {
    validate_links(&links)?;
    let mut by_github: HashMap<&str, &str> = HashMap::new();
    let mut by_stackoverflow: HashMap<&str, &str> = HashMap::new();
    for link in &links {
        by_github.insert(&link.github_login, &link.canonical_id);
        by_stackoverflow.insert(&link.stackoverflow_user_id, &link.canonical_id);
    }

    let mut activities =
        Vec::with_capacity(github.activities.len() + stackoverflow.activities.len());
    for raw in &github.activities {
        let user_id = match by_github.get(raw.platform_user_id.as_str()) {
            Some(canonical) => (*canonical).to_string(),
            None => format!("gh:{}", raw.platform_user_id),
        };
        activities.push(ActivityRecord {
            user_id,
            item_id: raw.item_id.clone(),
            activity: raw.activity,
            timestamp: raw.timestamp,
        });
    }
    for raw in &stackoverflow.activities {
        let user_id = match by_stackoverflow.get(raw.platform_user_id.as_str()) {
            Some(canonical) => (*canonical).to_string(),
            None => format!("so:{}", raw.platform_user_id),
        };
        activities.push(ActivityRecord {
            user_id,
            item_id: raw.item_id.clone(),
            activity: raw.activity,
            timestamp: raw.timestamp,
        });
    }

    let mut items = github.items;
    items.extend(stackoverflow.items);
    Corpus::from_parts(items, activities, links, None)
}

/// Users with at least one activity on *each* platform inside `window`.
/// Only these users qualify for experiment sampling; everyone else lacks
/// the cross-platform history the features are about.
pub fn filter_base_users(corpus: &Corpus, window: &Window) -> BTreeSet<String> {
    let mut seen: BTreeMap<&str, (bool, bool)> = BTreeMap::new();
    for act in &corpus.activities {
        if !window.contains(act.timestamp) {
            continue;
        }
        let entry = seen.entry(&act.user_id).or_default();
        match act.activity.platform() {
            PlatformId::GitHub => entry.0 = true,
            PlatformId::StackOverflow => entry.1 = true,
        }
    }
    seen.into_iter()
        .filter(|(_, (gh, so))| *gh && *so)
        .map(|(user, _)| user.to_string())
        .collect()
}

///// Parses a timestamp as RFC 3339, or as a naive `YYYY-MM-DDTHH:MM:SS[.fff]`
/// assumed UTC (the form Stack Exchange dumps use).
pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.with_timezone(&Utc));
    }
    chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f")
        .ok()
        .map(|naive| naive.and_utc())
}
