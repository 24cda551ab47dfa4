#![no_main]

use libfuzzer_sys::fuzz_target;
use quasihelm::media::CoefficientTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = CoefficientTable::parse(text) {
        for (y1, y2) in [(0.0, 0.0), (0.25, 0.75), (-3.5, 7.125), (1.0, 1.0)] {
            let v = t.evaluate(y1, y2);
            assert!(v > 0.0);
            assert_eq!(v, t.evaluate(y1 + 1.0, y2 - 1.0));
        }
    }
});
