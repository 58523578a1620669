//! Finite corpus of combinatorial types used to test a configuration for
//! general position at small degree.
//!
//! For `n = 3d + g - 1` the corpus holds the types of all curves through
//! the reference stretched configuration, the same types with relabeled
//! marks, their one-edge (and for `d <= 3` two-edge) face contractions, and
//! contractions of fundamental cycles into weighted vertices. For
//! `n = 3d + g - 2` it holds those curve types with one mark forgotten.

use std::collections::BTreeMap;

use crate::canon::{self, CanonicalForm};
use crate::error::{Error, Result};
use crate::floorplan;
use crate::tropgraph::{CombinatorialType, ParametrizedCurve};

/// Largest degree the corpus is built for.
pub const MAX_CORPUS_DEGREE: u32 = 4;

#[derive(Clone, Debug)]
pub struct Corpus {
    pub types: Vec<CombinatorialType>,
    pub description: String,
}

#[derive(Default)]
struct Collector {
    seen: BTreeMap<CanonicalForm, CombinatorialType>,
}

impl Collector {
    fn add(&mut self, t: CombinatorialType) {
        if t.check_balancing().is_err() || !t.marked_legs_first() {
            return;
        }
        let (form, _) = canon::canonical_form(&t);
        self.seen.entry(form).or_insert(t);
    }
}

fn solution_curves(d: u32, g: u32) -> Result<Vec<ParametrizedCurve>> {
    let n = floorplan::point_count(d, g);
    let cfg = floorplan::make_stretched(n, d)?;
    floorplan::enumerate_curves(d, g, &cfg)
}

/// Same type with the first `n` legs permuted by `perm`.
fn relabel(t: &CombinatorialType, perm: &[usize]) -> Result<CombinatorialType> {
    let g = &t.graph;
    let mut order: Vec<usize> = perm.to_vec();
    order.extend(perm.len()..g.leg_count());
    let legs = order.iter().map(|&i| g.leg(i)).collect();
    let slopes = order.iter().map(|&i| t.leg_slope(i)).collect();
    let graph = crate::tropgraph::Graph::new(g.weights().to_vec(), g.edges().to_vec(), legs)?;
    CombinatorialType::new(graph, t.edge_slopes().to_vec(), slopes)
}

/// Edges of the fundamental cycle closed by each non-tree edge.
fn fundamental_cycles(t: &CombinatorialType) -> Vec<Vec<usize>> {
    let g = &t.graph;
    let (parent, _) = g.spanning_tree();
    let tree: Vec<bool> = (0..g.edge_count()).map(|e| parent.contains(&Some(e))).collect();
    let path_to_root = |mut v: usize| {
        let mut p = Vec::new();
        while let Some(e) = parent[v] {
            p.push(e);
            v = g.other_end(e, v);
        }
        p
    };
    let mut out = Vec::new();
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if tree[e] {
            continue;
        }
        let pa = path_to_root(a);
        let pb = path_to_root(b);
        let mut cycle: Vec<usize> = pa.iter().filter(|x| !pb.contains(x)).copied().collect();
        cycle.extend(pb.iter().filter(|x| !pa.contains(x)));
        cycle.push(e);
        out.push(cycle);
    }
    out
}

pub fn types(d: u32, g: u32, n: usize) -> Result<Corpus> {
    if d == 0 || d > MAX_CORPUS_DEGREE {
        return Err(Error::ScaleRefused(format!("corpus is only built for 1 <= d <= {MAX_CORPUS_DEGREE}")));
    }
    if g > floorplan::max_genus(d) {
        return Err(Error::Invalid(format!("no irreducible curves of degree {d} and genus {g}")));
    }
    let full = floorplan::point_count(d, g);
    let curves = solution_curves(d, g)?;
    let mut c = Collector::default();
    if n == full {
        for curve in &curves {
            let t = &curve.ty;
            c.add(t.clone());
            if d <= 3 {
                let rev: Vec<usize> = (0..n).rev().collect();
                let shift: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
                for p in [rev, shift] {
                    c.add(relabel(t, &p)?);
                }
            }
            let ne = t.graph.edge_count();
            for e in 0..ne {
                if let Ok(k) = t.contract_face(&[e]) {
                    c.add(k.ty);
                }
                if d <= 3 {
                    for f in e + 1..ne {
                        if let Ok(k) = t.contract_face(&[e, f]) {
                            c.add(k.ty);
                        }
                    }
                }
            }
            for cycle in fundamental_cycles(t) {
                if let Ok(k) = t.contract_face(&cycle) {
                    c.add(k.ty);
                }
            }
        }
    } else if n + 1 == full {
        for curve in &curves {
            for l in 0..n + 1 {
                if let Ok(f) = curve.forget_leg(l) {
                    c.add(f.ty);
                }
            }
        }
    } else {
        return Err(Error::Unsupported(format!(
            "corpus covers n = {} and n = {} for d = {d}, g = {g}; got n = {n}",
            full,
            full - 1
        )));
    }
    let types: Vec<CombinatorialType> = c.seen.into_values().collect();
    let description = if n == full {
        format!(
            "d={d} g={g} n={n}: {} types from {} stretched solutions, mark relabelings, face and cycle contractions",
            types.len(),
            curves.len()
        )
    } else {
        format!("d={d} g={g} n={n}: {} types from {} stretched solutions with one mark forgotten", types.len(), curves.len())
    };
    Ok(Corpus { types, description })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_corpus() {
        let c = types(1, 0, 2).unwrap();
        assert!(!c.types.is_empty());
        assert!(c.types.iter().all(|t| t.marked_count() == 2));
        let c = types(1, 0, 1).unwrap();
        assert!(c.types.iter().all(|t| t.marked_count() == 1));
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(types(5, 0, 14), Err(Error::ScaleRefused(_))));
        assert!(matches!(types(2, 0, 3), Err(Error::Unsupported(_))));
    }
}
