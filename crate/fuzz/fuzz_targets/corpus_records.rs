#![no_main]

use crossact::corpus::{ActivityRecord, Corpus, ItemRecord};
use libfuzzer_sys::fuzz_target;

// Exercises the corpus record decoding path and the invariant enforcement
// in from_parts: lines that deserialize feed straight into assembly.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let mut items = Vec::new();
    let mut activities = Vec::new();
    for line in text.lines() {
        if let Ok(item) = serde_json::from_str::<ItemRecord>(line) {
            items.push(item);
        }
        if let Ok(activity) = serde_json::from_str::<ActivityRecord>(line) {
            activities.push(activity);
        }
    }
    let _ = Corpus::from_parts(items, activities, Vec::new(), None);
});
