#![no_main]

use gfmm::dataio::{parse_csv, CsvOptions, LabelColumn};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&flags, body)) = data.split_first() else { return };
    let opts = CsvOptions {
        header: flags & 1 != 0,
        normalize: flags & 2 != 0,
        label_column: if flags & 4 != 0 { LabelColumn::Index((flags >> 4) as usize) } else { LabelColumn::Last },
    };
    if let Ok(ds) = parse_csv(body, &opts, "fuzz") {
        for p in &ds.patterns {
            assert_eq!(gfmm::Bounds::lower(p).len(), ds.feature_count);
        }
    }
});
