//! GitHub event parsing.
//!
//! Reads a line-oriented export of fork and watch events, one JSON object
//! per line:
//!
//! ```json
//! {"type":"fork","actor_login":"alice","repo_id":"9001",
//!  "repo_description":"svm tools","created_at":"2013-11-20T08:00:00Z"}
//! ```
//!
//! Repositories are folded out of the events themselves: all lines for one
//! `repo_id` merge into a single item that keeps the longest non-empty
//! description seen and the earliest event time. Malformed lines and
//! unknown event types are skipped and counted; an unreadable stream is a
//! fatal error carrying the byte offset.

use std::collections::BTreeMap;
use std::io::BufRead;

use serde::Deserialize;

use crate::corpus::{
    parse_timestamp, ActivityType, ItemRecord, ParsedDump, PlatformId, RawActivity, Timestamp,
};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct EventLine {
    #[serde(rename = "type")]
    kind: String,
    actor_login: String,
    repo_id: String,
    #[serde(default)]
    repo_description: String,
    created_at: String,
}

pub fn parse_github_events<R: BufRead>(mut input: R) -> Result<ParsedDump> {
    let mut dump = ParsedDump::default();
    let mut repos: BTreeMap<String, (String, Timestamp)> = BTreeMap::new();

    let mut line = String::new();
    let mut offset: u64 = 0;
    loop {
        line.clear();
        let read = input.read_line(&mut line).map_err(|e| Error::Stream {
            offset,
            message: e.to_string(),
        })?;
        if read == 0 {
            break;
        }
        offset += read as u64;

        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let event: EventLine = match serde_json::from_str(trimmed) {
            Ok(event) => event,
            Err(_) => {
                dump.diagnostics.malformed += 1;
                continue;
            }
        };
        let activity = match event.kind.as_str() {
            "fork" => ActivityType::Fork,
            "watch" => ActivityType::Watch,
            _ => {
                dump.diagnostics.unknown_kind += 1;
                continue;
            }
        };
        let Some(timestamp) = parse_timestamp(&event.created_at) else {
            dump.diagnostics.malformed += 1;
            continue;
        };

        repos
            .entry(event.repo_id.clone())
            .and_modify(|(description, first_seen)| {
                if event.repo_description.len() > description.len() {
                    description.clone_from(&event.repo_description);
                }
                if timestamp < *first_seen {
                    *first_seen = timestamp;
                }
            })
            .or_insert_with(|| (event.repo_description.clone(), timestamp));

        dump.activities.push(RawActivity {
            platform_user_id: event.actor_login,
            item_id: event.repo_id,
            activity,
            timestamp,
        });
        dump.diagnostics.activities += 1;
    }

    for (repo_id, (text, created_at)) in repos {
        dump.items.push(ItemRecord {
            platform: PlatformId::GitHub,
            item_id: repo_id,
            text,
            raw_tags: Vec::new(),
            created_at,
        });
        dump.diagnostics.items += 1;
    }
    Ok(dump)
}
