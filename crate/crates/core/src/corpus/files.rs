//! Canonical corpus files.
//!
//! A corpus on disk is a directory of three line-delimited JSON files whose
//! records mirror the domain types field for field:
//!
//! * `items.jsonl` - [`ItemRecord`] rows sorted by `(platform, item_id)`
//! * `activities.jsonl` - [`ActivityRecord`] rows in canonical order
//! * `links.jsonl` - [`AccountLink`] rows sorted by canonical id
//!
//! The account link *input* file (what `link_accounts` consumes) is simpler:
//! tab-separated `canonical_id`, `github_login`, `stackoverflow_user_id`,
//! one link per line.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::corpus::{AccountLink, ActivityRecord, Corpus, ItemRecord};
use crate::error::{Error, Result};

pub const ITEMS_FILE: &str = "items.jsonl";
pub const ACTIVITIES_FILE: &str = "activities.jsonl";
pub const LINKS_FILE: &str = "links.jsonl";

/// Writes the three canonical files into `dir`, creating it if needed.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| file_error(dir, &e))?;
    write_records(&dir.join(ITEMS_FILE), corpus.items())?;
    write_records(&dir.join(ACTIVITIES_FILE), corpus.activities().iter())?;
    write_records(&dir.join(LINKS_FILE), corpus.links().iter())?;
    Ok(())
}

/// Reads a corpus directory written by [`write_corpus`]. The window is
/// re-derived from the activities, and corpus invariants are re-enforced,
/// so reading is tolerant of hand-edited files.
pub fn read_corpus(dir: &Path) -> Result<Corpus> {
    let items = read_items(&dir.join(ITEMS_FILE))?;
    let activities = read_activities(&dir.join(ACTIVITIES_FILE))?;
    let links = read_links(&dir.join(LINKS_FILE))?;
    let (corpus, _) = Corpus::from_parts(items, activities, links, None)?;
    Ok(corpus)
}

pub fn read_items(path: &Path) -> Result<Vec<ItemRecord>> {
    read_records(path)
}

pub fn read_activities(path: &Path) -> Result<Vec<ActivityRecord>> {
    read_records(path)
}

pub fn read_links(path: &Path) -> Result<Vec<AccountLink>> {
    read_records(path)
}

/// Parses the tab-separated account link input file. Blank lines are
/// allowed; anything else with other than three non-empty fields is an
/// error naming the line.
pub fn read_links_file<R: BufRead>(input: R) -> Result<Vec<AccountLink>> {
    let mut links = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Stream {
            offset: 0,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Format {
                path: "links".to_string(),
                line: idx as u64 + 1,
                message: "expected three tab-separated fields".to_string(),
            });
        }
        links.push(AccountLink {
            canonical_id: fields[0].to_string(),
            github_login: fields[1].to_string(),
            stackoverflow_user_id: fields[2].to_string(),
        });
    }
    Ok(links)
}

fn write_records<'a, T: Serialize + 'a>(
    path: &Path,
    records: impl Iterator<Item = &'a T>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| file_error(path, &e))?;
    let mut out = BufWriter::new(file);
    for record in records {
        serde_json::to_writer(&mut out, record)
            .map_err(|e| file_error(path, &std::io::Error::from(e)))?;
        out.write_all(b"\n").map_err(|e| file_error(path, &e))?;
    }
    out.flush().map_err(|e| file_error(path, &e))?;
    Ok(())
}

fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| file_error(path, &e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| file_error(path, &e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| Error::Format {
            path: path.display().to_string(),
            line: idx as u64 + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

fn file_error(path: &Path, err: &std::io::Error) -> Error {
    Error::File {
        path: path.display().to_string(),
        message: err.to_string(),
    }
}
