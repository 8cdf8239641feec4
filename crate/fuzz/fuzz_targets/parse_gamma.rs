#![no_main]

use gfmm::dataio::{broadcast_gamma, parse_gamma_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(gamma) = parse_gamma_list(text) {
        assert!(gamma.iter().all(|g| g.is_finite() && *g > 0.0));
        let _ = broadcast_gamma(&gamma, 4);
    }
});
