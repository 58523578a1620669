#![no_main]

use libfuzzer_sys::fuzz_target;
use severi_core::markings::{self, MarkingSet};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(m) = MarkingSet::from_json(s) {
        let irr = markings::is_irreducible(&m);
        for x in markings::similar_moves(&m) {
            assert_eq!(markings::is_irreducible(&x), irr);
        }
    }
});
