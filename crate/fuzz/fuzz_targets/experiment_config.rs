#![no_main]

use crossact::experiment::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = ExperimentConfig::from_toml_str(text) {
        let _ = config.validate();
        // Anything that parsed must serialize back.
        config.to_toml_string().unwrap();
    }
});
