#![no_main]

use libfuzzer_sys::fuzz_target;
use quasihelm_cli::{RawConfig, RunConfig};

// absolute paths would let the input read arbitrary files
fn without_files(mut raw: RawConfig) -> RawConfig {
    raw.entries
        .retain(|k, v| !(v.contains("file(") || ((k == "mu" || k == "rho") && v.contains("table("))));
    raw
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(raw) = RawConfig::parse(text) {
        // echo must round-trip through the parser
        let again = RawConfig::parse(&raw.echo()).expect("echo reparses");
        assert_eq!(again, raw);
        let _ = RunConfig::from_raw(&without_files(raw), std::path::Path::new("/nonexistent"));
    }
});
