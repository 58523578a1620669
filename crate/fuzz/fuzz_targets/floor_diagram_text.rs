#![no_main]

use libfuzzer_sys::fuzz_target;
use severi_core::floorplan::FloorDiagram;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(d) = s.parse::<FloorDiagram>() {
        let again: FloorDiagram = d.to_string().parse().expect("printed diagram parses");
        assert_eq!(again, d);
        let _ = d.violations(d.floors);
    }
});
