#![no_main]

use libfuzzer_sys::fuzz_target;
use quasihelm::media::PiecewiseConstant;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = PiecewiseConstant::parse(text) {
        let b = p.breakpoints();
        let (lo, hi) = (b[0], b[b.len() - 1]);
        for t in [0.0, 0.3, 0.5, 1.0] {
            let v = p.evaluate(lo + t * (hi - lo));
            assert!(v.is_finite() && v > 0.0);
        }
    }
});
