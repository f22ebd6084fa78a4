#![no_main]

use crossact::synth::SynthSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = SynthSpec::from_toml_str(text) {
        let _ = spec.validate();
        spec.to_toml_string().unwrap();
    }
});
