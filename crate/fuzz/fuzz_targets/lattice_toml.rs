#![no_main]

use libfuzzer_sys::fuzz_target;
use skinwalk::lattice::LatticeSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = LatticeSpec::from_toml_str(text) {
        let again = LatticeSpec::from_toml_str(&spec.to_toml_string()).expect("round trip");
        assert_eq!(again.spec_hash(), spec.spec_hash());
    }
});
