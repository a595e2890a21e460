#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // no base directory, so table paths other than "builtin" fail cleanly
        if let Ok(s) = hybridamp::config::parse_scenario(text, None) {
            s.validate().expect("parsed scenarios are valid");
        }
    }
});
