#![no_main]

use libfuzzer_sys::fuzz_target;
use skinwalk::io::{decode_density, parse_sidecar};

// Sidecar JSON on the first line, raw dump after it.
fuzz_target!(|data: &[u8]| {
    let split = data.iter().position(|&b| b == b'\n').unwrap_or(data.len());
    let Ok(head) = std::str::from_utf8(&data[..split]) else {
        return;
    };
    let Ok(sidecar) = parse_sidecar(head) else {
        return;
    };
    let body = data.get(split + 1..).unwrap_or(&[]);
    if let Ok(m) = decode_density(body, &sidecar) {
        assert_eq!(m.nrows(), sidecar.dimension);
    }
});
