#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = crossact::features::read_feature_records(data) {
        // Whatever parsed must re-serialize without error.
        let mut out = Vec::new();
        crossact::features::write_feature_records(&records, &mut out).unwrap();
    }
});
