#![no_main]

use libfuzzer_sys::fuzz_target;
use skinwalk_harness::{Experiment, RunConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = RunConfig::from_toml_str(text).map(|c| c.validate());
    let _ = RunConfig::resolve(Experiment::Gbz, Some(text));
});
