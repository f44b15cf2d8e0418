#![no_main]

use libfuzzer_sys::fuzz_target;
use sinar_cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::from_toml_str(text) {
        if cfg.alpha_file.is_none() && !matches!(cfg.network, Some(sinar_cli::config::NetworkConfig::EdgeList { .. })) {
            let _ = cfg.resolve();
        }
        let _ = ExperimentConfig::from_toml_str(&cfg.to_toml()).expect("written config parses");
    }
});
