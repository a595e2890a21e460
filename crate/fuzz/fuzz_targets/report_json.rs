#![no_main]

use hybridamp::report;
use libfuzzer_sys::fuzz_target;

// The first byte picks the reader.
fuzz_target!(|data: &[u8]| {
    let Some((&which, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    match which % 4 {
        0 => drop(report::read_manifest(text)),
        1 => drop(report::read_summary(text)),
        2 => drop(report::read_optimum(text)),
        _ => drop(report::read_comparison(text)),
    }
});
