#![no_main]

use hybridamp::table::Table;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(t) = Table::parse_csv(text, "fuzz") {
            let back = Table::parse_csv(&t.to_csv(("x", "y")), "fuzz").expect("written tables parse");
            assert_eq!(back, t);
        }
    }
});
