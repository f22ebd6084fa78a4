#![no_main]

use libfuzzer_sys::fuzz_target;

const POSTS: &[u8] = br#"<?xml version="1.0" encoding="utf-8"?>
<posts>
  <row Id="1" PostTypeId="1" CreationDate="2014-01-05T10:00:00.000" Tags="&lt;rust&gt;" Body="q" />
</posts>
"#;

fuzz_target!(|data: &[u8]| {
    let _ = crossact::corpus::parse_stackoverflow_posts(POSTS, data);
});
