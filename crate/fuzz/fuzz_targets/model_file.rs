#![no_main]

use libfuzzer_sys::fuzz_target;
use sinar_core::sinar::{parse_model, write_model};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(model) = parse_model(text) {
        let again = parse_model(&write_model(&model)).expect("written model parses");
        assert_eq!(again.dictionary, model.dictionary);
    }
});
