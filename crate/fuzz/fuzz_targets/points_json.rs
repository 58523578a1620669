#![no_main]

use libfuzzer_sys::fuzz_target;
use severi_core::evalmap::PointConfiguration;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(p) = PointConfiguration::from_json(s) {
        let json = serde_json::to_string(&p).expect("serializes");
        assert_eq!(PointConfiguration::from_json(&json).expect("round trip"), p);
    }
});
