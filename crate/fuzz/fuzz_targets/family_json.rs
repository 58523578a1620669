#![no_main]

use libfuzzer_sys::fuzz_target;
use severi_core::families::{self, FamilyDatum};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(f) = FamilyDatum::from_json(s) {
        let v = families::validate(&f);
        assert_eq!(v.valid, v.violation.is_none());
    }
});
