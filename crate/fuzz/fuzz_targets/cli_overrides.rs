#![no_main]

use libfuzzer_sys::fuzz_target;
use quasihelm_cli::{parse_overrides, RunConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // one argv entry per NUL-separated chunk
    let args: Vec<String> = text.split('\0').map(str::to_string).collect();
    if let Ok(mut raw) = parse_overrides(&args) {
        raw.entries
            .retain(|k, v| !(v.contains("file(") || ((k == "mu" || k == "rho") && v.contains("table("))));
        let _ = RunConfig::from_raw(&raw, std::path::Path::new("/nonexistent"));
    }
});
