//! Families of parametrized tropical curves over a loop-free base curve,
//! stored as finite affine data, with validation of their compatibilities.

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalmap::{FiberInterval, IntervalEnd};
use crate::rational::{self, Point, Rational};
use crate::tropgraph::{CombinatorialType, Germ, Graph, ParametrizedCurve, Slope, TropicalGraph};
use crate::wallwalk::StarGerm;

/// `f(s) = value + s·slope`, with `s` the distance from the tail of the
/// base edge (or from the vertex of a base leg).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineFn {
    #[serde(with = "rational::as_string")]
    pub value: Rational,
    #[serde(with = "rational::as_string")]
    pub slope: Rational,
}

impl AffineFn {
    pub fn constant(value: Rational) -> Self {
        AffineFn { value, slope: Rational::zero() }
    }

    pub fn at(&self, s: &Rational) -> Rational {
        &self.value + s * &self.slope
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffinePoint {
    pub value: Point,
    pub slope: Point,
}

impl AffinePoint {
    pub fn constant(value: Point) -> Self {
        AffinePoint { value, slope: Point::origin() }
    }

    pub fn at(&self, s: &Rational) -> Point {
        Point::new(&self.value.x + s * &self.slope.x, &self.value.y + s * &self.slope.y)
    }
}

/// Data over one edge or leg of the base: the type of the fibers and
/// affine lengths and positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDatum {
    #[serde(rename = "type")]
    pub ty: CombinatorialType,
    pub lengths: Vec<AffineFn>,
    pub positions: Vec<AffinePoint>,
}

impl PieceDatum {
    fn lengths_at(&self, s: &Rational) -> Vec<Rational> {
        self.lengths.iter().map(|f| f.at(s)).collect()
    }

    fn positions_at(&self, s: &Rational) -> Vec<Point> {
        self.positions.iter().map(|f| f.at(s)).collect()
    }
}

/// Contraction from the fiber type of a base germ to the curve over its
/// vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionDatum {
    pub germ: Germ,
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<Option<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDatum {
    pub base: TropicalGraph,
    pub extended_degree: Vec<Slope>,
    pub edges: Vec<PieceDatum>,
    pub legs: Vec<PieceDatum>,
    pub vertices: Vec<ParametrizedCurve>,
    pub contractions: Vec<ContractionDatum>,
    /// Leg permutations along base edges; only the identity is supported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monodromy: Option<Vec<Vec<usize>>>,
}

impl FamilyDatum {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family serializes")
    }

    fn piece(&self, g: Germ) -> Option<&PieceDatum> {
        match g {
            Germ::Edge { edge, .. } => self.edges.get(edge),
            Germ::Leg(l) => self.legs.get(l),
        }
    }

    /// Parameter of the germ's vertex on its piece.
    fn germ_parameter(&self, g: Germ) -> Rational {
        match g {
            Germ::Edge { edge, tail: false } => self.base.lengths()[edge].clone(),
            _ => Rational::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// 1: fibers of the right type, 2: lengths, 3: positions; 0 for
    /// structural problems.
    pub condition: u8,
    pub location: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyVerdict {
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

fn fail(condition: u8, location: impl Into<String>, detail: impl Into<String>) -> Violation {
    Violation { condition, location: location.into(), detail: detail.into() }
}

fn location(g: Germ) -> String {
    match g {
        Germ::Edge { edge, .. } => format!("edge {edge}"),
        Germ::Leg(l) => format!("leg {l}"),
    }
}

pub fn validate(fam: &FamilyDatum) -> FamilyVerdict {
    match check(fam) {
        Ok(()) => FamilyVerdict { valid: true, violation: None },
        Err(v) => FamilyVerdict { valid: false, violation: Some(v) },
    }
}

fn check(fam: &FamilyDatum) -> std::result::Result<(), Violation> {
    let g = &fam.base.graph;
    if let Some(m) = &fam.monodromy {
        let identity = m.iter().all(|p| p.iter().enumerate().all(|(i, &j)| i == j));
        if !identity {
            return Err(fail(0, "monodromy", "non-trivial monodromy needs a stacky family; unsupported"));
        }
    }
    if let Some(e) = (0..g.edge_count()).find(|&e| g.is_loop(e)) {
        return Err(fail(0, format!("edge {e}"), "base curve has a loop"));
    }
    if fam.edges.len() != g.edge_count() || fam.legs.len() != g.leg_count() || fam.vertices.len() != g.vertex_count() {
        return Err(fail(0, "family", "data do not match the base curve"));
    }
    for v in 0..g.vertex_count() {
        let c = &fam.vertices[v];
        if c.ty.leg_slopes() != fam.extended_degree.as_slice() {
            return Err(fail(1, format!("vertex {v}"), "curve over the vertex has the wrong extended degree"));
        }
    }

    let pieces = (0..g.edge_count())
        .map(|e| (Germ::Edge { edge: e, tail: true }, Some(fam.base.lengths()[e].clone())))
        .chain((0..g.leg_count()).map(|l| (Germ::Leg(l), None)));
    for (germ, len) in pieces {
        let p = fam.piece(germ).expect("piece exists");
        check_piece(p, germ, len.as_ref(), &fam.extended_degree)?;
    }

    // one contraction per germ of the base
    let mut germs: Vec<Germ> = (0..g.vertex_count()).flat_map(|v| g.star(v)).collect();
    germs.sort();
    let mut given: Vec<Germ> = fam.contractions.iter().map(|c| c.germ).collect();
    given.sort();
    if germs != given {
        return Err(fail(0, "contractions", "need exactly one contraction per germ of the base"));
    }
    for c in &fam.contractions {
        let w = match c.germ {
            Germ::Edge { edge, tail } => {
                let (a, b) = g.edge(edge);
                if tail {
                    a
                } else {
                    b
                }
            }
            Germ::Leg(l) => g.leg(l),
        };
        check_contraction(fam, c, w)?;
    }
    Ok(())
}

fn check_piece(p: &PieceDatum, germ: Germ, len: Option<&Rational>, degree: &[Slope]) -> std::result::Result<(), Violation> {
    let loc = location(germ);
    let t = &p.ty;
    if t.leg_slopes() != degree {
        return Err(fail(1, &loc, "fiber type legs differ from the extended degree"));
    }
    if let Err(v) = t.check_balancing() {
        return Err(fail(1, &loc, format!("fiber type unbalanced at vertex {v}")));
    }
    if p.lengths.len() != t.graph.edge_count() || p.positions.len() != t.graph.vertex_count() {
        return Err(fail(1, &loc, "affine data do not match the fiber type"));
    }
    // affine functions: the two ends decide positivity on the open piece
    let zero = Rational::zero();
    for (i, f) in p.lengths.iter().enumerate() {
        let ok = match len {
            Some(l) => {
                let (a, b) = (f.at(&zero), f.at(l));
                !a.is_negative() && !b.is_negative() && !(a.is_zero() && b.is_zero())
            }
            None => !f.value.is_negative() && !f.slope.is_negative() && !(f.value.is_zero() && f.slope.is_zero()),
        };
        if !ok {
            return Err(fail(1, &loc, format!("length of edge {i} is not positive on the open piece")));
        }
    }
    let far = len.cloned().unwrap_or_else(Rational::one);
    for s in [zero.clone(), far.clone()] {
        let pos = p.positions_at(&s);
        let lens = p.lengths_at(&s);
        for (e, &(a, b)) in t.graph.edges().iter().enumerate() {
            let sl = t.edge_slope(e);
            let want = Point::new(&pos[a].x + &lens[e] * rational::int(sl.0), &pos[a].y + &lens[e] * rational::int(sl.1));
            if pos[b] != want {
                return Err(fail(1, &loc, format!("positions disagree with edge {e} at parameter {}", rational::format(&s))));
            }
        }
    }
    let mid = &far / rational::int(2);
    if let Err(e) = ParametrizedCurve::new(t.clone(), p.lengths_at(&mid), p.positions_at(&mid)) {
        return Err(fail(1, &loc, format!("interior fiber is not a curve of the type: {e}")));
    }
    Ok(())
}

fn check_contraction(fam: &FamilyDatum, c: &ContractionDatum, w: usize) -> std::result::Result<(), Violation> {
    let loc = format!("{} at vertex {w}", location(c.germ));
    let p = fam.piece(c.germ).expect("piece exists");
    let t = &p.ty;
    let target = &fam.vertices[w];
    let tw = &target.ty;
    if c.vertex_map.len() != t.graph.vertex_count() || c.edge_map.len() != t.graph.edge_count() {
        return Err(fail(0, &loc, "contraction maps have the wrong size"));
    }
    if c.vertex_map.iter().any(|&v| v >= tw.graph.vertex_count()) {
        return Err(fail(0, &loc, "vertex map out of range"));
    }
    let mut hit = vec![false; tw.graph.edge_count()];
    let contracted: Vec<usize> = (0..t.graph.edge_count()).filter(|&e| c.edge_map[e].is_none()).collect();
    for (e, &(a, b)) in t.graph.edges().iter().enumerate() {
        let (ma, mb) = (c.vertex_map[a], c.vertex_map[b]);
        match c.edge_map[e] {
            None => {
                if ma != mb {
                    return Err(fail(0, &loc, format!("contracted edge {e} joins different vertices")));
                }
            }
            Some(f) => {
                if f >= hit.len() || hit[f] {
                    return Err(fail(0, &loc, format!("edge map is not a bijection at edge {e}")));
                }
                hit[f] = true;
                if tw.graph.edge(f) != (ma, mb) || tw.edge_slope(f) != t.edge_slope(e) {
                    return Err(fail(0, &loc, format!("edge {e} does not map onto edge {f}")));
                }
            }
        }
    }
    if hit.iter().any(|&h| !h) {
        return Err(fail(0, &loc, "edge map is not onto"));
    }
    for l in 0..t.graph.leg_count() {
        if c.vertex_map[t.graph.leg(l)] != tw.graph.leg(l) {
            return Err(fail(0, &loc, format!("leg {l} is not carried to itself")));
        }
    }
    // weights: compare with the canonical contraction
    let cf = t.contract_face(&contracted).map_err(|e| fail(0, &loc, e.to_string()))?;
    let mut corr = vec![usize::MAX; cf.ty.graph.vertex_count()];
    for v in 0..t.graph.vertex_count() {
        let k = cf.vertex_map[v];
        if corr[k] == usize::MAX {
            corr[k] = c.vertex_map[v];
        } else if corr[k] != c.vertex_map[v] {
            return Err(fail(0, &loc, "vertex map merges vertices not joined by contracted edges"));
        }
    }
    let mut sorted = corr.clone();
    sorted.sort_unstable();
    if sorted != (0..tw.graph.vertex_count()).collect::<Vec<_>>() {
        return Err(fail(0, &loc, "vertex map is not onto"));
    }
    for k in 0..corr.len() {
        if cf.ty.graph.weight(k) != tw.graph.weight(corr[k]) {
            return Err(fail(0, &loc, format!("weight of vertex {} is not the contracted weight", corr[k])));
        }
    }

    let s = fam.germ_parameter(c.germ);
    let lens = p.lengths_at(&s);
    for (e, m) in c.edge_map.iter().enumerate() {
        let want = match m {
            Some(f) => target.lengths()[*f].clone(),
            None => Rational::zero(),
        };
        if lens[e] != want {
            return Err(fail(2, &loc, format!("length of edge {e} is {}, expected {}", rational::format(&lens[e]), rational::format(&want))));
        }
    }
    let pos = p.positions_at(&s);
    for (u, &mu) in c.vertex_map.iter().enumerate() {
        if pos[u] != *target.position(mu) {
            return Err(fail(3, &loc, format!("position of vertex {u} differs from vertex {mu} over the base vertex")));
        }
    }
    Ok(())
}

/// Derivative of the moduli map along the germ, in the coordinates
/// `x_0, y_0, ..., ℓ_0, ...` of the fiber type over the germ.
pub fn induced_map_slopes(fam: &FamilyDatum, germ: Germ) -> Result<Vec<Rational>> {
    let p = fam.piece(germ).ok_or_else(|| Error::Invalid(format!("no {}", location(germ))))?;
    let sign = match germ {
        Germ::Edge { tail: false, .. } => -Rational::one(),
        _ => Rational::one(),
    };
    let mut out = Vec::with_capacity(2 * p.positions.len() + p.lengths.len());
    for q in &p.positions {
        out.push(&q.slope.x * &sign);
        out.push(&q.slope.y * &sign);
    }
    out.extend(p.lengths.iter().map(|f| &f.slope * &sign));
    Ok(out)
}

/// The star of base vertex `w` as input for the harmonicity check. Slopes
/// of germs whose contraction is an isomorphism are expressed in the
/// coordinates of the curve over `w`.
pub fn star_germs(fam: &FamilyDatum, w: usize) -> Result<Vec<StarGerm>> {
    let mut out = Vec::new();
    for germ in fam.base.graph.star(w) {
        let p = fam.piece(germ).expect("piece exists");
        let c = fam
            .contractions
            .iter()
            .find(|c| c.germ == germ)
            .ok_or_else(|| Error::Invalid(format!("no contraction for {}", location(germ))))?;
        let raw = induced_map_slopes(fam, germ)?;
        let nv = p.positions.len();
        let slope = if c.edge_map.iter().all(Option::is_some) && fam.vertices[w].ty.graph.vertex_count() == nv {
            let mut s = vec![Rational::zero(); raw.len()];
            for (u, &mu) in c.vertex_map.iter().enumerate() {
                s[2 * mu] = raw[2 * u].clone();
                s[2 * mu + 1] = raw[2 * u + 1].clone();
            }
            for (e, f) in c.edge_map.iter().enumerate() {
                s[2 * nv + f.expect("isomorphism")] = raw[2 * nv + e].clone();
            }
            s
        } else {
            raw
        };
        out.push(StarGerm { ty: p.ty.clone(), slope });
    }
    Ok(out)
}

/// The family over a segment or ray traced by a one-dimensional fiber,
/// starting at a bounded end.
pub fn family_from_interval(t: &CombinatorialType, iv: &FiberInterval) -> Result<FamilyDatum> {
    let nv = t.graph.vertex_count();
    let (start, other) = match (&iv.lower, &iv.upper) {
        (IntervalEnd::Bounded(a), b) => (a, b),
        (IntervalEnd::Unbounded, IntervalEnd::Bounded(b)) => (b, &iv.lower),
        _ => return Err(Error::Invalid("interval has no bounded end".into())),
    };
    let reversed = matches!(iv.lower, IntervalEnd::Unbounded);
    let dir: Vec<Rational> = if reversed { iv.direction.iter().map(|v| -v).collect() } else { iv.direction.clone() };
    let piece = PieceDatum {
        ty: t.clone(),
        lengths: start
            .lengths
            .iter()
            .zip(&dir[2 * nv..])
            .map(|(v, s)| AffineFn { value: v.clone(), slope: s.clone() })
            .collect(),
        positions: start
            .positions
            .iter()
            .enumerate()
            .map(|(u, p)| AffinePoint { value: p.clone(), slope: Point::new(dir[2 * u].clone(), dir[2 * u + 1].clone()) })
            .collect(),
    };
    let contraction_at = |end: &crate::evalmap::Endpoint| -> Result<(ParametrizedCurve, Vec<usize>, Vec<Option<usize>>)> {
        let cf = t.contract_face(&end.vanished)?;
        Ok((end.degenerate.clone(), cf.vertex_map, cf.edge_map))
    };
    let (c0, vm0, em0) = contraction_at(start)?;
    let degree = t.leg_slopes().to_vec();
    match other {
        IntervalEnd::Unbounded => {
            let base = TropicalGraph::new(Graph::new(vec![0], vec![], vec![0])?, vec![])?;
            Ok(FamilyDatum {
                base,
                extended_degree: degree,
                edges: vec![],
                legs: vec![piece],
                vertices: vec![c0],
                contractions: vec![ContractionDatum { germ: Germ::Leg(0), vertex_map: vm0, edge_map: em0 }],
                monodromy: None,
            })
        }
        IntervalEnd::Bounded(end) => {
            let span = (&end.parameter - &start.parameter).abs();
            let (c1, vm1, em1) = contraction_at(end)?;
            let base = TropicalGraph::new(Graph::new(vec![0, 0], vec![(0, 1)], vec![])?, vec![span])?;
            Ok(FamilyDatum {
                base,
                extended_degree: degree,
                edges: vec![piece],
                legs: vec![],
                vertices: vec![c0, c1],
                contractions: vec![
                    ContractionDatum { germ: Germ::Edge { edge: 0, tail: true }, vertex_map: vm0, edge_map: em0 },
                    ContractionDatum { germ: Germ::Edge { edge: 0, tail: false }, vertex_map: vm1, edge_map: em1 },
                ],
                monodromy: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two-vertex line piece: vertex 0 at the origin, edge (1,1) to vertex 1.
    fn segment_type() -> CombinatorialType {
        let g = Graph::new(vec![0, 0], vec![(0, 1)], vec![0, 0, 1, 1]).unwrap();
        CombinatorialType::new(g, vec![Slope(1, 1)], vec![Slope(-1, 0), Slope(0, -1), Slope(1, 1), Slope::ZERO]).unwrap()
    }

    fn constant_family() -> FamilyDatum {
        let t = segment_type();
        let len = rational::int(2);
        let curve = ParametrizedCurve::new(t.clone(), vec![len.clone()], vec![Point::from_ints(0, 0), Point::from_ints(2, 2)])
            .unwrap();
        let piece = PieceDatum {
            ty: t.clone(),
            lengths: vec![AffineFn::constant(len)],
            positions: vec![AffinePoint::constant(Point::from_ints(0, 0)), AffinePoint::constant(Point::from_ints(2, 2))],
        };
        let base = TropicalGraph::new(Graph::new(vec![0, 0], vec![(0, 1)], vec![]).unwrap(), vec![rational::int(3)]).unwrap();
        let id = ContractionDatum { germ: Germ::Edge { edge: 0, tail: true }, vertex_map: vec![0, 1], edge_map: vec![Some(0)] };
        FamilyDatum {
            base,
            extended_degree: t.leg_slopes().to_vec(),
            edges: vec![piece],
            legs: vec![],
            vertices: vec![curve.clone(), curve],
            contractions: vec![id.clone(), ContractionDatum { germ: Germ::Edge { edge: 0, tail: false }, ..id }],
            monodromy: None,
        }
    }

    #[test]
    fn constant_family_is_valid() {
        let fam = constant_family();
        assert_eq!(validate(&fam), FamilyVerdict { valid: true, violation: None });
        assert!(induced_map_slopes(&fam, Germ::Edge { edge: 0, tail: true }).unwrap().iter().all(Zero::is_zero));
        let back = FamilyDatum::from_json(&fam.to_json()).unwrap();
        assert_eq!(back, fam);
    }

    #[test]
    fn vanishing_length_is_invalid() {
        let mut fam = constant_family();
        // 2 - s reaches 0 at s = 2 < 3
        fam.edges[0].lengths[0].slope = rational::int(-1);
        fam.edges[0].positions[1].slope = Point::from_ints(-1, -1);
        let v = validate(&fam);
        assert!(!v.valid);
        assert_eq!(v.violation.unwrap().condition, 1);
    }

    #[test]
    fn scaling_family_has_unit_slope() {
        let mut fam = constant_family();
        fam.edges[0].lengths[0].slope = rational::int(1);
        fam.edges[0].positions[1].slope = Point::from_ints(1, 1);
        let s = induced_map_slopes(&fam, Germ::Edge { edge: 0, tail: true }).unwrap();
        assert_eq!(s[4], rational::int(1));
        assert_eq!(s[..2], [rational::int(0), rational::int(0)]);
        // the vertex data no longer match the far end
        assert_eq!(validate(&fam).violation.unwrap().condition, 2);
    }

    #[test]
    fn node_local_model() {
        // length interpolating with slope k_a - k_b = 5 - 2 over a unit edge
        let mut fam = constant_family();
        let t = segment_type();
        fam.base = TropicalGraph::new(fam.base.graph.clone(), vec![rational::int(1)]).unwrap();
        fam.edges[0].lengths[0].slope = rational::int(5 - 2);
        fam.edges[0].positions[1].slope = Point::from_ints(3, 3);
        fam.vertices[1] = ParametrizedCurve::new(t, vec![rational::int(5)], vec![Point::from_ints(0, 0), Point::from_ints(5, 5)]).unwrap();
        assert!(validate(&fam).valid);
        let s = induced_map_slopes(&fam, Germ::Edge { edge: 0, tail: true }).unwrap();
        assert_eq!(s[4], rational::int(3));
        let back = induced_map_slopes(&fam, Germ::Edge { edge: 0, tail: false }).unwrap();
        assert_eq!(back[4], rational::int(-3));
    }

    #[test]
    fn monodromy_rejected() {
        let mut fam = constant_family();
        fam.monodromy = Some(vec![vec![1, 0, 2, 3]]);
        assert_eq!(validate(&fam).violation.unwrap().location, "monodromy");
    }

    #[test]
    fn constant_star_is_harmonic() {
        let fam = constant_family();
        let germs = star_germs(&fam, 0).unwrap();
        let v = crate::wallwalk::check_harmonic_or_lcs(&fam.vertices[0].ty, &germs);
        assert_eq!(v, crate::wallwalk::StarVerdict::Harmonic);
    }

    #[test]
    fn terminal_ray_family_is_valid() {
        for (d, g) in [(2, 0), (3, 0), (3, 1)] {
            let trace = crate::wallwalk::run_standard_walk(d, g, 0).unwrap();
            let w = &trace.terminal;
            let fam = family_from_interval(&w.ty, &w.interval).unwrap();
            assert_eq!(validate(&fam).violation, None, "d={d} g={g}");
            let slope = induced_map_slopes(&fam, Germ::Leg(0)).unwrap();
            let nv = w.ty.graph.vertex_count();
            assert!(slope[..2 * nv].iter().all(Zero::is_zero));
            assert_eq!(slope[2 * nv..].iter().filter(|v| !v.is_zero()).count(), 1);
        }
    }
}
