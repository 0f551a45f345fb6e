#![no_main]

use libfuzzer_sys::fuzz_target;
use qga_photonics::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(config) = RunConfig::from_toml_str(text, None) {
        let _ = RunConfig::from_toml_str(&config.to_toml(), None).unwrap();
    }
});
