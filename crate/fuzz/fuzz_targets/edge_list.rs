#![no_main]

use libfuzzer_sys::fuzz_target;
use sinar_core::network::Network;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(net) = Network::parse_edge_list(text) {
        let again = Network::parse_edge_list(&net.to_edge_list()).expect("written edge list parses");
        assert_eq!(again.n_agents(), net.n_agents());
        for i in 0..net.n_agents() {
            assert_eq!(again.degree(i), net.degree(i));
        }
    }
});
