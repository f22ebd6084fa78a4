#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = crossact::corpus::parse_stackoverflow_posts(data, &b""[..]);
});
