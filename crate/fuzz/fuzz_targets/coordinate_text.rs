#![no_main]

use libfuzzer_sys::fuzz_target;
use sts_core::operators::{LinearOperator, SparseSymmetric};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = SparseSymmetric::from_coordinate_text(text, None) {
        let again =
            SparseSymmetric::from_coordinate_text(&m.to_coordinate_text(), Some(m.dimension()));
        assert_eq!(again.unwrap(), m);
        if m.dimension() <= 1 << 16 {
            let x = vec![1.0; m.dimension()];
            let _ = m.apply(&x).unwrap();
        }
    }
});
