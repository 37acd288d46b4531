#![no_main]

use libfuzzer_sys::fuzz_target;
use sts_core::config::{parse_spec_file, render_spec_file};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // presets may legitimately fail; explicit specs must render back
    if let Ok(file) = parse_spec_file(text) {
        let again = parse_spec_file(&render_spec_file(&file.spec, file.depth)).unwrap();
        assert_eq!(again.spec.positions(), file.spec.positions());
        assert_eq!(again.spec.factors(), file.spec.factors());
        assert_eq!(again.depth, file.depth);
    }
});
