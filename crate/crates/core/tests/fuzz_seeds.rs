//! The checked-in fuzz seeds stay accepted by their parsers.

use std::fs;
use std::path::PathBuf;

use severi_core::evalmap::PointConfiguration;
use severi_core::families::{self, FamilyDatum};
use severi_core::floorplan::FloorDiagram;
use severi_core::markings::MarkingSet;
use severi_core::tropgraph::{CombinatorialType, ParametrizedCurve, TropicalGraph};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn json_seeds_parse() {
    for (name, s) in seeds("tropical_graph_json") {
        TropicalGraph::from_json(&s).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, s) in seeds("type_json") {
        CombinatorialType::from_json(&s).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, s) in seeds("curve_json") {
        ParametrizedCurve::from_json(&s).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, s) in seeds("points_json") {
        PointConfiguration::from_json(&s).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, s) in seeds("marking_json") {
        MarkingSet::from_json(&s).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for (name, s) in seeds("family_json") {
        let f = FamilyDatum::from_json(&s).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(families::validate(&f).valid, "{name}");
    }
}

#[test]
fn diagram_seeds_parse() {
    for (name, s) in seeds("floor_diagram_text") {
        let d: FloorDiagram = s.parse().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(d.to_string().parse::<FloorDiagram>().unwrap(), d);
    }
}
