#![no_main]

use libfuzzer_sys::fuzz_target;
use tca_core::Calibration;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cal) = Calibration::from_json_str(text) {
        let again = Calibration::from_json_str(&cal.to_json_pretty().unwrap()).unwrap();
        assert_eq!(cal, again);
    }
});
