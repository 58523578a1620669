#![no_main]

use libfuzzer_sys::fuzz_target;
use severi_core::tropgraph::TropicalGraph;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = TropicalGraph::from_json(s) {
        let back = TropicalGraph::from_json(&g.to_json()).expect("round trip");
        assert_eq!(back.graph.genus(), g.graph.genus());
    }
});
