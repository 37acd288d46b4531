#![no_main]

use libfuzzer_sys::fuzz_target;
use sts_core::operators::JacobiMatrix;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(j) = JacobiMatrix::from_csv(text) {
        let csv = j.to_csv();
        assert_eq!(JacobiMatrix::from_csv(&csv).unwrap(), j);
    }
});
