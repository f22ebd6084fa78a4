//! Stack Overflow dump parsing.
//!
//! Reads the `Posts.xml` and `Votes.xml` tables of a Stack Exchange data
//! dump: streams of self-closing `<row .../>` elements. Questions
//! (`PostTypeId="1"`) become items, answers (`PostTypeId="2"`) become
//! `Answer` activities against their parent question, and favorite votes
//! (`VoteTypeId="5"`) become `Favorite` activities. Rows with missing or
//! undecodable fields are skipped and counted; a stream that stops being
//! XML at all is a fatal error carrying the byte offset.

use std::collections::HashMap;
use std::io::BufRead;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::corpus::{
    parse_timestamp, ActivityType, ItemRecord, ParsedDump, PlatformId,
    RawActivity,
};
use crate::error::{Error, Result};

/// Parses both tables of a Stack Overflow dump. Activities come out in
/// dump order, answers before favorites.
pub fn parse_stackoverflow_posts<P: BufRead, V: BufRead>(posts: P, votes: V) -> Result<ParsedDump> {
    let mut dump = parse_posts(posts)?;
    let favorites = parse_votes(votes)?;
    dump.activities.extend(favorites.activities);
    dump.diagnostics.merge(&favorites.diagnostics);
    Ok(dump)
}

fn parse_posts<R: BufRead>(input: R) -> Result<ParsedDump> {
    let mut dump = ParsedDump::default();
    for_each_row(input, |attrs| {
        let diag = &mut dump.diagnostics;
        match attrs.get("PostTypeId").map(String::as_str) {
            Some("1") => {
                let (Some(id), Some(created)) = (attrs.get("Id"), attrs.get("CreationDate"))
                else {
                    diag.missing_field += 1;
                    return;
                };
                let Some(created_at) = parse_timestamp(created) else {
                    diag.malformed += 1;
                    return;
                };
                let raw_tags = attrs
                    .get("Tags")
                    .map(|t| split_tag_list(t))
                    .unwrap_or_default();
                let mut text_parts: Vec<&str> = Vec::new();
                if let Some(title) = attrs.get("Title") {
                    if !title.is_empty() {
                        text_parts.push(title);
                    }
                }
                text_parts.extend(raw_tags.iter().map(String::as_str));
                dump.items.push(ItemRecord {
                    platform: PlatformId::StackOverflow,
                    item_id: id.clone(),
                    text: text_parts.join(" "),
                    raw_tags,
                    created_at,
                });
                diag.items += 1;
            }
            Some("2") => {
                let (Some(owner), Some(parent), Some(created)) = (
                    attrs.get("OwnerUserId"),
                    attrs.get("ParentId"),
                    attrs.get("CreationDate"),
                ) else {
                    diag.missing_field += 1;
                    return;
                };
                let Some(timestamp) = parse_timestamp(created) else {
                    diag.malformed += 1;
                    return;
                };
                dump.activities.push(RawActivity {
                    platform_user_id: owner.clone(),
                    item_id: parent.clone(),
                    activity: ActivityType::Answer,
                    timestamp,
                });
                diag.activities += 1;
            }
            // Wikis, moderator posts and the rest of the post-type zoo.
            Some(_) => diag.ignored += 1,
            None => diag.missing_field += 1,
        }
    })?;
    Ok(dump)
}

fn parse_votes<R: BufRead>(input: R) -> Result<ParsedDump> {
    let mut dump = ParsedDump::default();
    for_each_row(input, |attrs| {
        let diag = &mut dump.diagnostics;
        match attrs.get("VoteTypeId").map(String::as_str) {
            Some("5") => {
                let (Some(user), Some(post), Some(created)) = (
                    attrs.get("UserId"),
                    attrs.get("PostId"),
                    attrs.get("CreationDate"),
                ) else {
                    diag.missing_field += 1;
                    return;
                };
                let Some(timestamp) = parse_timestamp(created) else {
                    diag.malformed += 1;
                    return;
                };
                dump.activities.push(RawActivity {
                    platform_user_id: user.clone(),
                    item_id: post.clone(),
                    activity: ActivityType::Favorite,
                    timestamp,
                });
                diag.activities += 1;
            }
            Some(_) => diag.ignored += 1,
            None => diag.missing_field += 1,
        }
    })?;
    Ok(dump)
}

/// Streams `<row .../>` elements, handing each one's attributes to `on_row`
/// as a name -> unescaped-value map.
fn for_each_row<R: BufRead>(
    input: R,
    mut on_row: impl FnMut(&HashMap<String, String>),
) -> Result<()> {
    let mut reader = Reader::from_reader(input);
    let mut buf = Vec::new();
    loop {
        match reader.read_event_into(&mut buf) {
            Ok(Event::Empty(e)) | Ok(Event::Start(e)) => {
                if e.local_name().as_ref() == b"row" {
                    // A row whose attribute list fails to decode is handed
                    // over as an empty map; the table-specific handler then
                    // counts it among the rows missing required fields.
                    let attrs = decode_attributes(&e).unwrap_or_default();
                    on_row(&attrs);
                }
            }
            Ok(Event::Eof) => return Ok(()),
            Ok(_) => {}
            Err(e) => {
                return Err(Error::Stream {
                    offset: reader.buffer_position(),
                    message: e.to_string(),
                })
            }
        }
        buf.clear();
    }
}

fn decode_attributes(e: &BytesStart<'_>) -> Option<HashMap<String, String>> {
    let mut map = HashMap::new();
    for attr in e.attributes() {
        let attr = attr.ok()?;
        let key = String::from_utf8_lossy(attr.key.local_name().as_ref()).into_owned();
        let value = attr.unescape_value().ok()?.into_owned();
        map.insert(key, value);
    }
    Some(map)
}

/// Splits the dump's `<tag1><tag2>` attribute format into tag strings.
/// Anything outside angle brackets is ignored.
///
/// TODO: newer dumps switched to a `|tag1|tag2|` format; accept it here
/// once such inputs matter.
fn split_tag_list(raw: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let mut current: Option<String> = None;
    for c in raw.chars() {
        match c {
            '<' => current = Some(String::new()),
            '>' => {
                if let Some(tag) = current.take() {
                    if !tag.is_empty() {
                        tags.push(tag);
                    }
                }
            }
            _ => {
                if let Some(tag) = current.as_mut() {
                    tag.push(c);
                }
            }
        }
    }
    tags
}
