#![no_main]

use libfuzzer_sys::fuzz_target;
use tca_core::AgentSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = text.parse::<AgentSpec>() {
        let again: AgentSpec = spec.to_string().parse().unwrap();
        assert_eq!(spec, again);
    }
});
