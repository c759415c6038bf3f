#![no_main]

use assocmem_cli::Config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = Config::parse(text) {
            for key in config.keys() {
                assert!(config.get(key).is_some_and(|v| !v.is_empty()));
                assert!(config.line_of(key).is_some_and(|l| l >= 1));
            }
        }
    }
});
