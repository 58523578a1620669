//! Moduli cones of combinatorial types, regularity, stratum classes and
//! resolution of simple walls.

use num::Zero;
use serde::Serialize;

use crate::canon;
use crate::error::{Error, Result};
use crate::linalg::{self, AffineSpace};
use crate::rational::Rational;
use crate::tropgraph::{CombinatorialType, Germ, Graph, Slope};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum StratumClass {
    Nice,
    SimpleWall { vertex: usize },
    Other,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModuliCone {
    #[serde(rename = "type")]
    pub ty: CombinatorialType,
    /// `2|V| + |E|`; coordinates are `x_0, y_0, x_1, y_1, ..., ℓ_0, ℓ_1, ...`.
    pub ambient_dimension: usize,
    /// Two rows per non-loop edge: `pos(head) - pos(tail) - ℓ_e·slope = 0`.
    pub constraints: Vec<Vec<i64>>,
    pub dimension: usize,
    pub expected_dimension: i64,
    /// The open cone contains a point with all lengths positive.
    pub realizable: bool,
    pub aut_order: u64,
    pub class: StratumClass,
}

/// Full constraint matrix in position × length coordinates.
pub fn constraint_rows(t: &CombinatorialType) -> Vec<Vec<i64>> {
    let g = &t.graph;
    let nv = g.vertex_count();
    let width = 2 * nv + g.edge_count();
    let mut rows = Vec::new();
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if a == b {
            continue;
        }
        let s = t.edge_slope(e);
        for (k, c) in [s.0, s.1].into_iter().enumerate() {
            let mut r = vec![0i64; width];
            r[2 * b + k] += 1;
            r[2 * a + k] -= 1;
            r[2 * nv + e] = -c;
            rows.push(r);
        }
    }
    rows
}

/// Dimension of the linear span of the cone: translations plus the kernel
/// of the cycle conditions on lengths.
pub fn cone_dimension(t: &CombinatorialType) -> usize {
    let rows = t.cycle_rows();
    let m = linalg::from_ints(&rows);
    2 + t.graph.edge_count() - linalg::rank(&m)
}

/// Length vectors satisfying the cycle conditions.
pub fn length_space(t: &CombinatorialType) -> AffineSpace {
    let e = t.graph.edge_count();
    let m = linalg::from_ints(&t.cycle_rows());
    AffineSpace { point: vec![Rational::zero(); e], directions: linalg::nullspace(&m, e) }
}

pub fn is_realizable(t: &CombinatorialType) -> bool {
    let space = length_space(t);
    let coords: Vec<usize> = (0..t.graph.edge_count()).collect();
    if coords.is_empty() {
        return true;
    }
    // the cone is invariant under scaling; look for a point of the open cone
    linalg::strictly_positive_point(&space, &coords).is_some()
}

/// `|∇| + n - χ - ov` for rank-2 lattices, with `χ = 1 - b₁`.
pub fn expected_dimension(t: &CombinatorialType) -> i64 {
    let g = &t.graph;
    let n = t.marked_count() as i64;
    let degree = t.degree().len() as i64;
    degree + n - g.euler_characteristic() - g.overvalency() as i64
}

pub fn is_regular(t: &CombinatorialType) -> Result<bool> {
    balanced(t)?;
    Ok(cone_dimension(t) as i64 == expected_dimension(t))
}

fn balanced(t: &CombinatorialType) -> Result<()> {
    t.check_balancing().map_err(Error::Unbalanced)
}

pub fn classify(t: &CombinatorialType) -> Result<StratumClass> {
    let g = &t.graph;
    if !is_regular(t)? || !g.is_weightless() {
        return Ok(StratumClass::Other);
    }
    let vals: Vec<usize> = (0..g.vertex_count()).map(|v| g.valency(v)).collect();
    if vals.iter().all(|&v| v == 3) {
        return Ok(StratumClass::Nice);
    }
    let four: Vec<usize> = (0..vals.len()).filter(|&v| vals[v] == 4).collect();
    if four.len() == 1 && vals.iter().all(|&v| v == 3 || v == 4) {
        return Ok(StratumClass::SimpleWall { vertex: four[0] });
    }
    Ok(StratumClass::Other)
}

pub fn aut_order(t: &CombinatorialType) -> u64 {
    canon::aut_order(t)
}

pub fn cone_of(t: &CombinatorialType) -> Result<ModuliCone> {
    balanced(t)?;
    let g = &t.graph;
    Ok(ModuliCone {
        ty: t.clone(),
        ambient_dimension: 2 * g.vertex_count() + g.edge_count(),
        constraints: constraint_rows(t),
        dimension: cone_dimension(t),
        expected_dimension: expected_dimension(t),
        realizable: is_realizable(t),
        aut_order: aut_order(t),
        class: classify(t)?,
    })
}

/// One of the three ways to split a four-valent vertex.
#[derive(Clone, Debug, Serialize)]
pub struct Resolution {
    #[serde(rename = "type")]
    pub ty: CombinatorialType,
    /// Germs staying at the old vertex and germs moved to the new one.
    pub stay: [Germ; 2],
    pub moved: [Germ; 2],
    pub new_vertex: usize,
    /// Oriented from the old vertex to the new one.
    pub new_edge: usize,
    pub new_slope: Slope,
}

/// Splits the four-valent vertex `u` of a simple wall in the three possible
/// ways, in the order `{12|34}`, `{13|24}`, `{14|23}` of the germs of `u`.
pub fn resolve_wall(t: &CombinatorialType, u: usize) -> Result<[Resolution; 3]> {
    match classify(t)? {
        StratumClass::SimpleWall { vertex } if vertex == u => {}
        StratumClass::SimpleWall { vertex } => {
            return Err(Error::NotAWall(format!("the four-valent vertex is {vertex}, not {u}")))
        }
        other => return Err(Error::NotAWall(format!("stratum is {other:?}"))),
    }
    split_vertex(t, u)
}

/// The splitting itself, without the regularity precondition.
pub fn split_vertex(t: &CombinatorialType, u: usize) -> Result<[Resolution; 3]> {
    let star = t.graph.star(u);
    if star.len() != 4 {
        return Err(Error::NotAWall(format!("vertex {u} has valency {}", star.len())));
    }
    let groupings = [(1, 2, 3), (2, 1, 3), (3, 1, 2)];
    let out: Vec<Resolution> = groupings
        .iter()
        .map(|&(p, a, b)| split(t, u, [star[0], star[p]], [star[a], star[b]]))
        .collect::<Result<_>>()?;
    Ok(out.try_into().expect("three resolutions"))
}

fn split(t: &CombinatorialType, u: usize, stay: [Germ; 2], moved: [Germ; 2]) -> Result<Resolution> {
    let g = &t.graph;
    let nv = g.vertex_count();
    let mut weights = g.weights().to_vec();
    weights.push(0);
    let mut edges = g.edges().to_vec();
    let mut legs = g.legs().to_vec();
    for germ in moved {
        match germ {
            Germ::Edge { edge, tail: true } => edges[edge].0 = nv,
            Germ::Edge { edge, tail: false } => edges[edge].1 = nv,
            Germ::Leg(l) => legs[l] = nv,
        }
    }
    // minus the staying germs, which by balancing is the sum of the moved ones
    let new_slope = t.germ_slope(moved[0]) + t.germ_slope(moved[1]);
    let mut slopes = t.edge_slopes().to_vec();
    let new_edge = edges.len();
    edges.push((u, nv));
    slopes.push(new_slope);
    let graph = Graph::new(weights, edges, legs)?;
    let ty = CombinatorialType::new(graph, slopes, t.leg_slopes().to_vec())?;
    Ok(Resolution { ty, stay, moved, new_vertex: nv, new_edge, new_slope })
}

/// Whether two types agree up to relabeling of vertices.
pub fn same_type(a: &CombinatorialType, b: &CombinatorialType) -> bool {
    canon::canonical_form(a).0 == canon::canonical_form(b).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tropgraph::star_type;

    fn nabla1() -> CombinatorialType {
        star_type(&[Slope(1, 1), Slope(-1, 0), Slope(0, -1)])
    }

    #[test]
    fn line_cone() {
        let c = cone_of(&nabla1()).unwrap();
        assert_eq!(c.dimension, 2);
        assert_eq!(c.ambient_dimension, 2);
        let t = star_type(&[Slope::ZERO, Slope(1, 1), Slope(-1, 0), Slope(0, -1)]);
        assert_eq!(cone_of(&t).unwrap().dimension, 2);
    }

    #[test]
    fn unbalanced_rejected() {
        let t = star_type(&[Slope(1, 1), Slope(-1, 0)]);
        assert!(matches!(cone_of(&t), Err(Error::Unbalanced(0))));
    }

    #[test]
    fn wall_examples() {
        let t = star_type(&[Slope(1, 1), Slope(-1, 0), Slope(0, -1), Slope::ZERO]);
        assert_eq!(classify(&t).unwrap(), StratumClass::SimpleWall { vertex: 0 });
        let rs = resolve_wall(&t, 0).unwrap();
        for r in &rs {
            assert_eq!(r.ty.check_balancing(), Ok(()));
            let back = r.ty.contract_face(&[r.new_edge]).unwrap();
            assert!(same_type(&back.ty, &t));
        }

        let t = star_type(&[Slope(0, 1), Slope(0, -1), Slope(1, 0), Slope(-1, 0)]);
        let rs = resolve_wall(&t, 0).unwrap();
        assert_eq!(rs[0].new_slope, Slope::ZERO);
        assert!(rs[1..].iter().all(|r| !r.new_slope.is_zero()));
        assert!(resolve_wall(&nabla1(), 0).is_err());
    }

    #[test]
    fn weighted_is_other() {
        let g = Graph::new(vec![1], vec![], vec![0, 0, 0]).unwrap();
        let t = CombinatorialType::new(g, vec![], vec![Slope(1, 1), Slope(-1, 0), Slope(0, -1)]).unwrap();
        assert_eq!(classify(&t).unwrap(), StratumClass::Other);
    }

    #[test]
    fn full_rank_matches_cycle_rank() {
        // triangle with legs of a degree-one curve subdivided
        let g = Graph::new(vec![0, 0, 0], vec![(0, 1), (1, 2), (2, 0)], vec![0, 1, 2]).unwrap();
        let t = CombinatorialType::new(
            g,
            vec![Slope(1, 0), Slope(-1, 1), Slope(0, -1)],
            vec![Slope(-1, -1), Slope(2, -1), Slope(-1, 2)],
        )
        .unwrap();
        assert_eq!(t.check_balancing(), Ok(()));
        let rows = constraint_rows(&t);
        let width = 2 * 3 + 3;
        let direct = width - linalg::rank(&linalg::from_ints(&rows));
        assert_eq!(direct, cone_dimension(&t));
    }
}
