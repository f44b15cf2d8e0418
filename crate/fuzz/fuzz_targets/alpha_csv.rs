#![no_main]

use libfuzzer_sys::fuzz_target;
use sinar_core::abm::AdaptionMatrix;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(alpha) = AdaptionMatrix::parse_csv(text) {
        let again = AdaptionMatrix::parse_csv(&alpha.to_csv()).expect("written matrix parses");
        assert_eq!(again, alpha);
    }
});
