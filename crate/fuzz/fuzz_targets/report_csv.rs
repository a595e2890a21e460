#![no_main]

use hybridamp::report;
use libfuzzer_sys::fuzz_target;

// The first byte picks the reader.
fuzz_target!(|data: &[u8]| {
    let Some((&which, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    match which % 6 {
        0 => drop(report::read_snr_csv(text)),
        1 => drop(report::read_gain_csv(text)),
        2 => drop(report::read_nli_breakdown_csv(text)),
        3 => drop(report::read_power_evolution_csv(text)),
        4 => drop(report::read_trace_csv(text)),
        _ => drop(report::read_compare_csv(text)),
    }
});
