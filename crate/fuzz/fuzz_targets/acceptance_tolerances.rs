#![no_main]

use libfuzzer_sys::fuzz_target;
use skinwalk_harness::acceptance::AcceptanceTolerances;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = AcceptanceTolerances::from_toml_str(text);
    }
});
