#![no_main]

use gfmm::dataio::{model_from_str_named, model_to_string_named};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((model, names)) = model_from_str_named(text) {
        // anything accepted must survive a save/load cycle unchanged
        let again = model_to_string_named(&model, names.as_deref());
        let (back, _) = model_from_str_named(&again).expect("reload");
        assert_eq!(back, model);
    }
});
