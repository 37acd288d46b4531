#![no_main]

use libfuzzer_sys::fuzz_target;
use sts_core::spectral::SpectralMeasure;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = SpectralMeasure::from_csv(text) {
        let csv = m.to_csv();
        assert_eq!(SpectralMeasure::from_csv(&csv).unwrap(), m);
        let _ = m.mass(-1.0, 1.0);
    }
});
