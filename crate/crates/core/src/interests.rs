//! Interest inference.
//!
//! Items carry interests as sets of tags. Questions already have tags, so
//! their interest set is just the normalized tag list. Repositories have no
//! tags, only a free-text description, so their interests are the words of
//! that description that appear in the tag vocabulary: the union of all
//! question tags in the corpus. A repository described as "fast svm tools"
//! ends up with interests `{svm}` when `svm` is a known tag, which is what
//! lets a fork similarity speak to a question and vice versa.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::Serialize;

use crate::corpus::{Corpus, ItemKey, ItemRecord, PlatformId};
use crate::error::{Error, Result};

/// The union of all normalized question tags in a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagVocabulary {
    tags: BTreeSet<String>,
    built_from: usize,
}

impl TagVocabulary {
    pub fn contains(&self, tag: &str) -> bool {
        self.tags.contains(tag)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Tags in sorted order.
    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.tags.iter().map(String::as_str)
    }

    /// How many question items contributed at least one tag.
    pub fn built_from(&self) -> usize {
        self.built_from
    }
}

/// A set of normalized tags attached to one item.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InterestSet {
    tags: BTreeSet<String>,
}

impl InterestSet {
    pub fn from_tags<I, S>(tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        InterestSet {
            tags: tags.into_iter().map(Into::into).collect(),
        }
    }

    pub fn tags(&self) -> impl Iterator<Item = &str> {
        self.tags.iter().map(String::as_str)
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.tags.contains(tag)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// True when the two sets share at least one tag.
    pub fn intersects(&self, other: &InterestSet) -> bool {
        let (small, large) = if self.tags.len() <= other.tags.len() {
            (&self.tags, &other.tags)
        } else {
            (&other.tags, &self.tags)
        };
        small.iter().any(|t| large.contains(t))
    }
}

/// Lowercases and trims a raw tag. Empty results are dropped.
pub fn normalize_tag(raw: &str) -> Option<String> {
    let tag = raw.trim().to_lowercase();
    if tag.is_empty() {
        None
    } else {
        Some(tag)
    }
}

/// Builds the tag vocabulary from every question item in the corpus.
/// Errors when the corpus has no question items at all, since a vocabulary
/// of nothing would silently zero out every repository interest.
pub fn build_vocabulary(corpus: &Corpus) -> Result<TagVocabulary> {
    let mut tags = BTreeSet::new();
    let mut built_from = 0;
    let mut saw_question = false;
    for item in corpus.items() {
        if item.platform != PlatformId::StackOverflow {
            continue;
        }
        saw_question = true;
        let mut contributed = false;
        for raw in &item.raw_tags {
            if let Some(tag) = normalize_tag(raw) {
                tags.insert(tag);
                contributed = true;
            }
        }
        if contributed {
            built_from += 1;
        }
    }
    if !saw_question {
        return Err(Error::EmptyVocabularySource);
    }
    Ok(TagVocabulary { tags, built_from })
}

/// Tokenizes free text into lowercase tokens plus hyphen-joined bigrams of
/// adjacent tokens, so a description saying "objective c" can still match
/// the tag `objective-c`.
///
/// Tokens keep the characters `+ # . -` so names like `c++`, `c#` and
/// `.net` survive, but leading `+ # -` and trailing `. -` are stripped to
/// unwrap ordinary punctuation. Output order is all unigrams, then all
/// bigrams.
pub fn normalize_tokenize(text: &str) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut tokens: Vec<String> = Vec::new();
    for raw in lowered.split(|c: char| !(c.is_ascii_lowercase() || c.is_ascii_digit() || matches!(c, '+' | '#' | '.' | '-'))) {
        let token = raw
            .trim_start_matches(['+', '#', '-'])
            .trim_end_matches(['.', '-']);
        if !token.is_empty() {
            tokens.push(token.to_string());
        }
    }
    let mut out = tokens.clone();
    for pair in tokens.windows(2) {
        out.push(format!("{}-{}", pair[0], pair[1]));
    }
    out
}

/// Interests of a question: its normalized tags.
pub fn infer_question_interests(item: &ItemRecord) -> Result<InterestSet> {
    if item.platform != PlatformId::StackOverflow {
        return Err(Error::InvalidArgument(format!(
            "expected a question item, got {}",
            item.key()
        )));
    }
    Ok(InterestSet {
        tags: item.raw_tags.iter().filter_map(|t| normalize_tag(t)).collect(),
    })
}

/// Interests of a repository: description tokens found in the vocabulary.
pub fn infer_repo_interests(item: &ItemRecord, vocabulary: &TagVocabulary) -> Result<InterestSet> {
    if item.platform != PlatformId::GitHub {
        return Err(Error::InvalidArgument(format!(
            "expected a repository item, got {}",
            item.key()
        )));
    }
    Ok(InterestSet {
        tags: normalize_tokenize(&item.text)
            .into_iter()
            .filter(|t| vocabulary.contains(t))
            .collect(),
    })
}

/// Interest sets for every item in the corpus. Total: items whose text
/// matches nothing get an empty set rather than no entry.
pub fn item_interests(
    corpus: &Corpus,
    vocabulary: &TagVocabulary,
) -> BTreeMap<ItemKey, InterestSet> {
    let mut map = BTreeMap::new();
    for item in corpus.items() {
        let interests = match item.platform {
            PlatformId::StackOverflow => infer_question_interests(item),
            PlatformId::GitHub => infer_repo_interests(item, vocabulary),
        }
        .expect("platform dispatch matches item platform");
        map.insert(item.key(), interests);
    }
    map
}

#[derive(Serialize)]
struct InterestRow<'a> {
    platform: PlatformId,
    item_id: &'a str,
    tags: Vec<&'a str>,
}

/// Writes interests as line-delimited JSON `{platform, item_id, tags}`
/// records in item key order.
pub fn write_interests<W: Write>(
    interests: &BTreeMap<ItemKey, InterestSet>,
    mut out: W,
) -> Result<()> {
    for (key, set) in interests {
        let row = InterestRow {
            platform: key.platform,
            item_id: &key.item_id,
            tags: set.tags().collect(),
        };
        serde_json::to_writer(&mut out, &row).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
