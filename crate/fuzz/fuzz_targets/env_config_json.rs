#![no_main]

use libfuzzer_sys::fuzz_target;
use tca_core::EnvConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = EnvConfig::from_json_str(text) {
        let again = EnvConfig::from_json_str(&cfg.to_json_pretty().unwrap()).unwrap();
        assert_eq!(cfg, again);
    }
});
