#![no_main]

use crossact::interests::normalize_tokenize;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for token in normalize_tokenize(text) {
        // Every emitted token must tokenize to exactly itself, or
        // vocabulary lookups would miss the tokenizer's own output.
        assert_eq!(normalize_tokenize(&token), vec![token.clone()]);
    }
});
