#![no_main]

use libfuzzer_sys::fuzz_target;
use tca_core::params::{apply_overrides, parse_override};
use tca_core::{ControllerConfig, EnvConfig};

// One override per line, applied in order to the EMDG defaults.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let items: Vec<&str> = text.lines().collect();
    for item in &items {
        let _ = parse_override(item);
    }
    let mut env = EnvConfig::emdg_default();
    let mut cfg = ControllerConfig::emdg_default();
    if apply_overrides(&mut env, &mut cfg, &items).is_ok() {
        env.validate().unwrap();
        cfg.validate().unwrap();
    }
});
