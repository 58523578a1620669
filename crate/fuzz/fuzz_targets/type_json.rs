#![no_main]

use libfuzzer_sys::fuzz_target;
use severi_core::{canon, moduli, tropgraph::CombinatorialType};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(t) = CombinatorialType::from_json(s) {
        if t.graph.vertex_count() + t.graph.edge_count() > 24 {
            return;
        }
        let back = CombinatorialType::from_json(&t.to_json()).expect("round trip");
        assert_eq!(canon::canonical_form(&back).0, canon::canonical_form(&t).0);
        let _ = moduli::cone_of(&t);
    }
});
