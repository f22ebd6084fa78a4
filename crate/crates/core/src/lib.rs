//! Cross-platform activity prediction for social collaborative sites.
//!
//! The crate models two sites that many developers use side by side: a code
//! hosting platform (GitHub-style fork/watch events) and a Q&A platform
//! (Stack Overflow-style answers and favorites). Given dumps from both and a
//! file linking accounts across them, it predicts whether a user will act on
//! an item they have not touched yet, using interest overlap between the
//! user's history on *either* platform and the target item.
//!
//! The pipeline:
//!
//! 1. [`corpus`] parses the platform dumps, joins accounts through a link
//!    file, and produces one canonical corpus of items and timestamped
//!    activities.
//! 2. [`interests`] assigns every item a set of interest tags: questions
//!    carry their own tags, repositories get the vocabulary words found in
//!    their descriptions.
//! 3. [`features`] turns a `(user, item)` pair into eight similarity scores,
//!    one per activity type, split into direct similarities over the user's
//!    own history and co-activity similarities over the histories of users
//!    who acted on the same items.
//! 4. [`experiment`] runs the evaluation protocol: temporal train/test
//!    split, positive/negative instance sampling, linear SVM scoring and
//!    AUC/ROC reporting over seeded repeat runs.
//! 5. [`synth`] generates planted-topic corpora so the whole stack can be
//!    validated end to end without real dumps.
//!
//! Everything downstream of parsing is deterministic: seeded RNGs, sorted
//! iteration orders and fixed summation orders make repeat runs on the same
//! inputs byte-identical.

pub mod corpus;
pub mod error;
pub mod experiment;
pub mod features;
pub mod interests;
pub mod synth;

mod seed;

pub use error::{Error, Result};
