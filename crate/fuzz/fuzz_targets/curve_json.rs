#![no_main]

use libfuzzer_sys::fuzz_target;
use severi_core::tropgraph::ParametrizedCurve;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(c) = ParametrizedCurve::from_json(s) {
        let back = ParametrizedCurve::from_json(&c.to_json()).expect("round trip");
        assert_eq!(back, c);
        let _ = c.evaluation();
    }
});
