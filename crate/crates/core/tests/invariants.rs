use proptest::prelude::*;

mod common;
use common::{balanced_type, closed, raw_graph, RawGraph};

use severi_core::evalmap::{fiber, FiberDescription};
use severi_core::floorplan;
use severi_core::markings::{self, MarkingSet};
use severi_core::rational::{self, Point};
use severi_core::tropgraph::ParametrizedCurve;

/// Curve on the tree part of the raw graph, lengths from `lens`.
fn tree_curve(r: &RawGraph, lens: &[u8]) -> ParametrizedCurve {
    let tree = RawGraph { extra: vec![], ..r.clone() };
    let t = balanced_type(&tree);
    let lengths: Vec<_> = (0..t.graph.edge_count()).map(|e| rational::int(1 + lens[e] as i64)).collect();
    let mut pos = vec![Point::origin(); t.graph.vertex_count()];
    for (e, &(a, b)) in t.graph.edges().iter().enumerate() {
        let s = t.edge_slope(e);
        pos[b] = Point::new(&pos[a].x + &lengths[e] * rational::int(s.0), &pos[a].y + &lengths[e] * rational::int(s.1));
    }
    ParametrizedCurve::new(t, lengths, pos).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn contraction_keeps_genus_and_balancing(r in raw_graph(6, 4), mask in any::<u16>()) {
        let t = balanced_type(&r);
        prop_assert!(t.check_balancing().is_ok());
        let chosen = closed(&t, mask);
        let c = t.contract_face(&chosen).unwrap();
        prop_assert_eq!(c.ty.genus(), t.genus());
        prop_assert!(c.ty.check_balancing().is_ok());
        prop_assert_eq!(c.ty.graph.edge_count(), t.graph.edge_count() - chosen.len());
        prop_assert_eq!(c.ty.leg_slopes(), t.leg_slopes());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn leg_order_round_trip(r in raw_graph(6, 0), lens in prop::collection::vec(0u8..5, 6), keys in prop::collection::vec(any::<u32>(), 6)) {
        let c = tree_curve(&r, &lens);
        let n = c.ty.graph.leg_count();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (keys[i], i));
        let mut inverse = vec![0; n];
        for (i, &o) in order.iter().enumerate() {
            inverse[o] = i;
        }
        let there = c.reorder_legs(&order).unwrap();
        for (i, &o) in order.iter().enumerate() {
            prop_assert_eq!(there.ty.leg_slope(i), c.ty.leg_slope(o));
        }
        prop_assert_eq!(there.reorder_legs(&inverse).unwrap(), c.clone());
        let json = there.to_json();
        prop_assert_eq!(ParametrizedCurve::from_json(&json).unwrap(), there);
    }

    #[test]
    fn severi_dimension_identity(d in 1u32..=20, pick in any::<u32>()) {
        let di = d as i64;
        let max = (di - 1) * (di - 2) / 2;
        let g = 1 - di + (pick as i64) % (max + di);
        let s = markings::severi_dim(d, g).unwrap();
        prop_assert_eq!(s.delta, max - g);
        prop_assert_eq!(s.dimension, 3 * di + g - 1);
        prop_assert_eq!(s.dimension, di * (di + 3) / 2 - s.delta);
    }

    #[test]
    fn similarity_preserves_irreducibility(d in 3usize..=7, mask in any::<u32>()) {
        let all = severi_core::markings::Arrangement::new(d).unwrap().nodes();
        let nodes: Vec<_> = all.iter().enumerate().filter(|(i, _)| mask >> (i % 32) & 1 == 1).map(|(_, &n)| n).collect();
        let m = MarkingSet::new(d, nodes).unwrap();
        let irr = markings::is_irreducible(&m);
        for x in markings::similar_moves(&m) {
            prop_assert_eq!(x.delta(), m.delta());
            prop_assert_eq!(markings::is_irreducible(&x), irr);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fiber_translation_invariance((d, g) in prop::sample::select(vec![(1u32, 0u32), (2, 0), (3, 0), (3, 1)]), dx in -50i64..50, dy in -50i64..50, den in 1i64..7) {
        let cfg = floorplan::make_stretched(floorplan::point_count(d, g), d).unwrap();
        let v = Point::new(rational::ratio(dx, den), rational::ratio(dy, den));
        let moved = cfg.points.translated(&v);
        for c in floorplan::enumerate_curves(d, g, &cfg).unwrap() {
            let a = fiber(&c.ty, &cfg.points).unwrap();
            let b = fiber(&c.ty, &moved).unwrap();
            prop_assert_eq!(a.dimension(), b.dimension());
            if let (FiberDescription::Point { curve: p }, FiberDescription::Point { curve: q }) = (&a, &b) {
                for (x, y) in p.positions().iter().zip(q.positions()) {
                    prop_assert_eq!(&Point::new(&x.x + &v.x, &x.y + &v.y), y);
                }
                prop_assert_eq!(p.lengths(), q.lengths());
            }
        }
    }
}
