#![no_main]

use libfuzzer_sys::fuzz_target;
use skinwalk::io::parse_correlation_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(g) = parse_correlation_csv(text) {
            assert!(g.gamma.iter().all(|v| v.is_finite()));
        }
    }
});
