#![no_main]

use libfuzzer_sys::fuzz_target;
use sinar_core::io::{parse_trajectory_csv, trajectory_to_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(t) = parse_trajectory_csv(text) {
        let again = parse_trajectory_csv(&trajectory_to_csv(&t)).expect("written trajectory parses");
        assert_eq!(again, t);
    }
});
