//! Generators shared by the property tests and the acceptance run.

use proptest::prelude::*;

use severi_core::tropgraph::{CombinatorialType, Graph, Slope};

#[derive(Clone, Debug)]
pub struct RawGraph {
    pub weights: Vec<u32>,
    pub parents: Vec<usize>,
    pub extra: Vec<(usize, usize)>,
    pub slopes: Vec<(i64, i64)>,
}

pub fn raw_graph(max_vertices: usize, max_extra: usize) -> impl Strategy<Value = RawGraph> {
    (1..=max_vertices).prop_flat_map(move |n| {
        let parents = (1..n).map(|i| 0..i).collect::<Vec<_>>();
        let extra = prop::collection::vec((0..n, 0..n), 0..=max_extra);
        (prop::collection::vec(0u32..2, n), parents, extra, prop::collection::vec((-3i64..=3, -3i64..=3), n + max_extra))
            .prop_map(|(weights, parents, extra, slopes)| RawGraph { weights, parents, extra, slopes })
    })
}

/// Balanced type on the raw graph: each vertex gets one leg absorbing the
/// imbalance of its edges, or a contracted leg when already balanced.
pub fn balanced_type(r: &RawGraph) -> CombinatorialType {
    let mut edges: Vec<(usize, usize)> = r.parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
    edges.extend(r.extra.iter().filter(|(a, b)| a != b).copied());
    let slopes: Vec<Slope> = edges.iter().zip(&r.slopes).map(|(_, &(a, b))| Slope(a, b)).collect();
    let n = r.weights.len();
    let mut sum = vec![(0i64, 0i64); n];
    for (&(a, b), s) in edges.iter().zip(&slopes) {
        sum[a].0 += s.0;
        sum[a].1 += s.1;
        sum[b].0 -= s.0;
        sum[b].1 -= s.1;
    }
    let mut legs = Vec::new();
    let mut leg_slopes = Vec::new();
    for (v, &(x, y)) in sum.iter().enumerate() {
        if (x, y) == (0, 0) {
            legs.insert(0, v);
            leg_slopes.insert(0, Slope::ZERO);
        } else {
            legs.push(v);
            leg_slopes.push(Slope(-x, -y));
        }
    }
    let g = Graph::new(r.weights.clone(), edges, legs).unwrap();
    CombinatorialType::new(g, slopes, leg_slopes).unwrap()
}

/// Edges picked by `mask` together with every edge that would otherwise
/// become a loop.
pub fn closed(t: &CombinatorialType, mask: u16) -> Vec<usize> {
    let g = &t.graph;
    let mut class: Vec<usize> = (0..g.vertex_count()).collect();
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if mask >> e & 1 == 1 {
            let (ca, cb) = (class[a], class[b]);
            for c in class.iter_mut() {
                if *c == cb {
                    *c = ca;
                }
            }
        }
    }
    (0..g.edge_count()).filter(|&e| {
        let (a, b) = g.edge(e);
        mask >> e & 1 == 1 || class[a] == class[b]
    }).collect()
}
