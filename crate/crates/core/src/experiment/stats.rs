//! Descriptive corpus statistics.
//!
//! The headline table answers "which interests dominate each activity
//! type": for every tag, the share of distinct items participated in via
//! that activity type whose interest set carries the tag. Shares do not
//! sum to 100% because items carry several tags.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{ActivityType, CorpusView, ItemKey, ACTIVITY_TYPES};
use crate::interests::InterestSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagShare {
    pub tag: String,
    /// Distinct participated items whose interest set carries the tag.
    pub count: u64,
    /// `count` as a percentage of all distinct participated items.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityTagUsage {
    pub activity: ActivityType,
    /// Distinct items with at least one activity of this type in the view.
    pub total_items: u64,
    /// Top tags by count, descending; ties broken by tag name.
    pub top: Vec<TagShare>,
}

/// Computes per-activity tag usage over the view, keeping the `top_k`
/// most frequent tags for each type.
pub fn tag_usage_stats(
    view: &CorpusView<'_>,
    interests: &BTreeMap<ItemKey, InterestSet>,
    top_k: usize,
) -> Vec<ActivityTagUsage> {
    let mut participated: [BTreeSet<ItemKey>; 4] = Default::default();
    for act in view.activities() {
        participated[act.activity.index()].insert(act.item_key());
    }

    ACTIVITY_TYPES
        .iter()
        .map(|&activity| {
            let items = &participated[activity.index()];
            let total = items.len() as u64;
            let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
            for key in items {
                if let Some(set) = interests.get(key) {
                    for tag in set.tags() {
                        *counts.entry(tag).or_insert(0) += 1;
                    }
                }
            }
            let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            ranked.truncate(top_k);
            let top = ranked
                .into_iter()
                .map(|(tag, count)| TagShare {
                    tag: tag.to_string(),
                    count,
                    percent: if total == 0 {
                        0.0
                    } else {
                        100.0 * count as f64 / total as f64
                    },
                })
                .collect();
            ActivityTagUsage {
                activity,
                total_items: total,
                top,
            }
        })
        .collect()
}

/// Renders the usage tables as aligned text, one block per activity type.
pub fn render_tag_usage(usage: &[ActivityTagUsage]) -> String {
    let mut out = String::new();
    for block in usage {
        let _ = writeln!(out, "{} ({} items)", block.activity, block.total_items);
        if block.top.is_empty() {
            let _ = writeln!(out, "  (no tagged items)");
        }
        let width = block.top.iter().map(|s| s.tag.len()).max().unwrap_or(0);
        for share in &block.top {
            let _ = writeln!(
                out,
                "  {:width$}  {:>8}  {:>7.3}%",
                share.tag,
                share.count,
                share.percent,
                width = width
            );
        }
        let _ = writeln!(out);
    }
    out
}
