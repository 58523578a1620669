//! Evaluation of contracted legs and the fibers of that map over a point
//! configuration.

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::corpus;
use crate::error::{Error, Result};
use crate::linalg::{self, AffineSpace, Matrix};
use crate::moduli;
use crate::rational::{self, Point, Rational};
use crate::tropgraph::{CombinatorialType, ParametrizedCurve};

/// Ordered, pairwise distinct points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct PointConfiguration {
    points: Vec<Point>,
}

impl PointConfiguration {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if let Some((i, j)) = first_repeat(&points) {
            return Err(Error::Invalid(format!("points {} and {} coincide", i + 1, j + 1)));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn without(&self, i: usize) -> PointConfiguration {
        let mut p = self.points.clone();
        p.remove(i);
        PointConfiguration { points: p }
    }

    pub fn translated(&self, by: &Point) -> PointConfiguration {
        PointConfiguration { points: self.points.iter().map(|p| Point::new(&p.x + &by.x, &p.y + &by.y)).collect() }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let pts: Vec<Point> = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::new(pts)
    }
}

impl<'de> Deserialize<'de> for PointConfiguration {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pts = Vec::<Point>::deserialize(d)?;
        PointConfiguration::new(pts).map_err(serde::de::Error::custom)
    }
}

fn first_repeat(points: &[Point]) -> Option<(usize, usize)> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i] == points[j] {
                return Some((i, j));
            }
        }
    }
    None
}

/// A boundary point of a one-dimensional fiber.
#[derive(Clone, Debug, Serialize)]
pub struct Endpoint {
    #[serde(with = "rational::as_string")]
    pub parameter: Rational,
    pub positions: Vec<Point>,
    #[serde(with = "rational::vec_string")]
    pub lengths: Vec<Rational>,
    /// Edges whose length is zero here.
    pub vanished: Vec<usize>,
    /// The same curve with the vanished edges contracted.
    pub degenerate: ParametrizedCurve,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntervalEnd {
    Unbounded,
    Bounded(Box<Endpoint>),
}

impl IntervalEnd {
    pub fn is_bounded(&self) -> bool {
        matches!(self, IntervalEnd::Bounded(_))
    }

    pub fn endpoint(&self) -> Option<&Endpoint> {
        match self {
            IntervalEnd::Bounded(e) => Some(e),
            IntervalEnd::Unbounded => None,
        }
    }
}

/// Open segment or ray `base + t·direction`, `lower < t < upper`, in the
/// coordinates `x_0, y_0, ..., ℓ_0, ...`.
#[derive(Clone, Debug, Serialize)]
pub struct FiberInterval {
    #[serde(with = "rational::vec_string")]
    pub base: Vec<Rational>,
    /// Primitive integer vector.
    #[serde(with = "rational::vec_string")]
    pub direction: Vec<Rational>,
    pub lower: IntervalEnd,
    pub upper: IntervalEnd,
    /// A curve in the open interval.
    pub sample: ParametrizedCurve,
}

impl FiberInterval {
    pub fn is_bounded(&self) -> bool {
        self.lower.is_bounded() && self.upper.is_bounded()
    }

    pub fn ends(&self) -> [&IntervalEnd; 2] {
        [&self.lower, &self.upper]
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiberDescription {
    Empty,
    Point { curve: ParametrizedCurve },
    Interval(FiberInterval),
    HigherDim { dimension: usize, sample: ParametrizedCurve },
}

impl FiberDescription {
    pub fn dimension(&self) -> Option<usize> {
        match self {
            FiberDescription::Empty => None,
            FiberDescription::Point { .. } => Some(0),
            FiberDescription::Interval(_) => Some(1),
            FiberDescription::HigherDim { dimension, .. } => Some(*dimension),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, FiberDescription::Empty)
    }
}

/// Linear map from reduced coordinates `(x_0, y_0, ℓ_0, ...)` to full
/// coordinates `(x_0, y_0, x_1, y_1, ..., ℓ_0, ...)`.
struct Coordinates {
    nv: usize,
    ne: usize,
    paths: Vec<Vec<crate::tropgraph::Slope>>,
}

impl Coordinates {
    fn new(t: &CombinatorialType) -> Self {
        let (paths, _) = t.tree_paths();
        Coordinates { nv: t.graph.vertex_count(), ne: t.graph.edge_count(), paths }
    }

    fn reduced_width(&self) -> usize {
        2 + self.ne
    }

    fn expand(&self, z: &[Rational], translate: bool) -> Vec<Rational> {
        let mut out = Vec::with_capacity(2 * self.nv + self.ne);
        for v in 0..self.nv {
            let (mut x, mut y) =
                if translate { (z[0].clone(), z[1].clone()) } else { (Rational::zero(), Rational::zero()) };
            for (e, s) in self.paths[v].iter().enumerate() {
                if !s.is_zero() {
                    x += &z[2 + e] * Rational::from_integer(s.0.into());
                    y += &z[2 + e] * Rational::from_integer(s.1.into());
                }
            }
            out.push(x);
            out.push(y);
        }
        out.extend_from_slice(&z[2..]);
        out
    }

    fn split(&self, full: &[Rational]) -> (Vec<Point>, Vec<Rational>) {
        let positions = (0..self.nv).map(|v| Point::new(full[2 * v].clone(), full[2 * v + 1].clone())).collect();
        (positions, full[2 * self.nv..].to_vec())
    }
}

fn check_marking(t: &CombinatorialType, n: usize) -> Result<()> {
    if t.marked_count() != n || !t.marked_legs_first() {
        return Err(Error::Mismatch(format!(
            "type has {} contracted legs (leading: {}), configuration has {n} points",
            t.marked_count(),
            t.marked_legs_first()
        )));
    }
    Ok(())
}

/// Reduced-coordinate affine space of curves of type `t` through `cfg`,
/// ignoring positivity. `None` if the linear conditions are inconsistent.
fn solution_space(t: &CombinatorialType, coords: &Coordinates, cfg: &[Point]) -> Option<AffineSpace> {
    let w = coords.reduced_width();
    let mut m: Matrix = Vec::new();
    let mut b = Vec::new();
    for row in t.cycle_rows() {
        let mut r = vec![Rational::zero(); 2];
        r.extend(row.iter().map(|&v| Rational::from_integer(v.into())));
        m.push(r);
        b.push(Rational::zero());
    }
    for (i, q) in cfg.iter().enumerate() {
        let v = t.graph.leg(i);
        for (k, target) in [&q.x, &q.y].into_iter().enumerate() {
            let mut r = vec![Rational::zero(); w];
            r[k] = Rational::one();
            for (e, s) in coords.paths[v].iter().enumerate() {
                r[2 + e] = Rational::from_integer((if k == 0 { s.0 } else { s.1 }).into());
            }
            m.push(r);
            b.push(target.clone());
        }
    }
    linalg::solve_affine(&m, &b, w)
}

fn curve_at(t: &CombinatorialType, coords: &Coordinates, z: &[Rational]) -> Result<ParametrizedCurve> {
    let (pos, len) = coords.split(&coords.expand(z, true));
    ParametrizedCurve::new(t.clone(), len, pos)
}

/// The fiber of the evaluation map of type `t` over `cfg`.
pub fn fiber(t: &CombinatorialType, cfg: &PointConfiguration) -> Result<FiberDescription> {
    check_marking(t, cfg.len())?;
    if let Err(v) = t.check_balancing() {
        return Err(Error::Unbalanced(v));
    }
    let coords = Coordinates::new(t);
    let Some(space) = solution_space(t, &coords, cfg.points()) else {
        return Ok(FiberDescription::Empty);
    };
    let ne = t.graph.edge_count();
    let length_coords: Vec<usize> = (2..2 + ne).collect();
    match space.dimension() {
        0 => {
            if space.point[2..].iter().all(|l| l.is_positive()) {
                Ok(FiberDescription::Point { curve: curve_at(t, &coords, &space.point)? })
            } else {
                Ok(FiberDescription::Empty)
            }
        }
        1 => interval(t, &coords, &space),
        k => match linalg::strictly_positive_point(&space, &length_coords) {
            Some(z) => Ok(FiberDescription::HigherDim { dimension: k, sample: curve_at(t, &coords, &z)? }),
            None => Ok(FiberDescription::Empty),
        },
    }
}

fn interval(t: &CombinatorialType, coords: &Coordinates, space: &AffineSpace) -> Result<FiberDescription> {
    let p = &space.point;
    let mut d = space.directions[0].clone();
    // rescale so that the direction in full coordinates is primitive
    let full_dir = coords.expand(&d, true);
    let prim = rational::primitive(&full_dir);
    let (i0, v0) = full_dir.iter().enumerate().find(|(_, v)| !v.is_zero()).expect("nonzero direction");
    let scale = &prim[i0] / v0;
    for x in d.iter_mut() {
        *x *= &scale;
    }

    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    for e in 0..t.graph.edge_count() {
        let (pe, de) = (&p[2 + e], &d[2 + e]);
        if de.is_zero() {
            if !pe.is_positive() {
                return Ok(FiberDescription::Empty);
            }
            continue;
        }
        let root = -(pe / de);
        if de.is_positive() {
            if lo.as_ref().map_or(true, |l| root > *l) {
                lo = Some(root);
            }
        } else if hi.as_ref().map_or(true, |h| root < *h) {
            hi = Some(root);
        }
    }
    if let (Some(l), Some(h)) = (&lo, &hi) {
        if l >= h {
            return Ok(FiberDescription::Empty);
        }
    }
    // re-base at a bounded end so the parametrization is canonical
    let shift = lo.clone().or_else(|| hi.clone()).unwrap_or_else(Rational::zero);
    let base_z: Vec<Rational> = p.iter().zip(&d).map(|(a, b)| a + &shift * b).collect();
    let lo = lo.map(|l| l - &shift);
    let hi = hi.map(|h| h - &shift);
    let at = |s: &Rational| -> Vec<Rational> { base_z.iter().zip(&d).map(|(a, b)| a + s * b).collect() };

    let sample_t = match (&lo, &hi) {
        (Some(l), Some(h)) => (l + h) / Rational::from_integer(2.into()),
        (Some(l), None) => l + Rational::one(),
        (None, Some(h)) => h - Rational::one(),
        (None, None) => Rational::zero(),
    };
    let sample = curve_at(t, coords, &at(&sample_t))?;
    let end = |s: Option<Rational>| -> Result<IntervalEnd> {
        match s {
            None => Ok(IntervalEnd::Unbounded),
            Some(s) => {
                let full = coords.expand(&at(&s), true);
                let (positions, lengths) = coords.split(&full);
                Ok(IntervalEnd::Bounded(Box::new(endpoint(t, s, positions, lengths)?)))
            }
        }
    };
    Ok(FiberDescription::Interval(FiberInterval {
        base: coords.expand(&base_z, true),
        direction: coords.expand(&d, true),
        lower: end(lo)?,
        upper: end(hi)?,
        sample,
    }))
}

/// Closure point with some vanished lengths, together with its contraction.
pub fn endpoint(
    t: &CombinatorialType,
    parameter: Rational,
    positions: Vec<Point>,
    lengths: Vec<Rational>,
) -> Result<Endpoint> {
    let vanished: Vec<usize> = (0..lengths.len()).filter(|&e| lengths[e].is_zero()).collect();
    let c = t.contract_face(&vanished)?;
    let mut pos = vec![Point::origin(); c.ty.graph.vertex_count()];
    for (v, &nv) in c.vertex_map.iter().enumerate() {
        pos[nv] = positions[v].clone();
    }
    let len = (0..lengths.len()).filter(|e| c.edge_map[*e].is_some()).map(|e| lengths[e].clone()).collect();
    let degenerate = ParametrizedCurve::new(c.ty, len, pos)?;
    Ok(Endpoint { parameter, positions, lengths, vanished, degenerate })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Genericity {
    General { corpus_size: usize, corpus: String },
    NotGeneral { reason: String },
    Unknown { reason: String },
}

impl Genericity {
    pub fn is_general(&self) -> Option<bool> {
        match self {
            Genericity::General { .. } => Some(true),
            Genericity::NotGeneral { .. } => Some(false),
            Genericity::Unknown { .. } => None,
        }
    }
}

/// Whether the fiber over `cfg` has the expected dimension (or is empty)
/// for every type of the finite corpus for `(d, g, n)`.
pub fn is_general(points: &[Point], d: u32, g: u32) -> Genericity {
    if let Some((i, j)) = first_repeat(points) {
        return Genericity::NotGeneral { reason: format!("points {} and {} coincide", i + 1, j + 1) };
    }
    let cfg = PointConfiguration { points: points.to_vec() };
    let corpus = match corpus::types(d, g, points.len()) {
        Ok(c) => c,
        Err(e) => return Genericity::Unknown { reason: e.to_string() },
    };
    for t in &corpus.types {
        match codimension_ok(t, &cfg) {
            Ok(true) => {}
            Ok(false) => {
                return Genericity::NotGeneral {
                    reason: format!("fiber of unexpected dimension for type {}", t.to_json()),
                }
            }
            Err(e) => return Genericity::Unknown { reason: e.to_string() },
        }
    }
    Genericity::General { corpus_size: corpus.types.len(), corpus: corpus.description }
}

/// Fiber empty, or of dimension `dim M_Θ - 2n`.
pub fn codimension_ok(t: &CombinatorialType, cfg: &PointConfiguration) -> Result<bool> {
    let f = fiber(t, cfg)?;
    Ok(match f.dimension() {
        None => true,
        Some(k) => k as i64 == moduli::cone_dimension(t) as i64 - 2 * cfg.len() as i64,
    })
}

/// If the fiber is nonempty, the type is weightless, trivalent, and every
/// bounded edge has nonzero slope.
pub fn genericity_conclusion(t: &CombinatorialType, cfg: &PointConfiguration) -> Result<bool> {
    if fiber(t, cfg)?.is_empty() {
        return Ok(true);
    }
    Ok(t.graph.is_weightless() && t.graph.is_trivalent() && t.is_immersed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tropgraph::{star_type, Graph, Slope};

    fn pts(v: &[(i64, i64)]) -> PointConfiguration {
        PointConfiguration::new(v.iter().map(|&(x, y)| Point::from_ints(x, y)).collect()).unwrap()
    }

    #[test]
    fn two_marks_on_one_vertex() {
        let t = star_type(&[Slope::ZERO, Slope::ZERO, Slope(1, 1), Slope(-1, 0), Slope(0, -1)]);
        assert!(fiber(&t, &pts(&[(0, 0), (1, 0)])).unwrap().is_empty());
    }

    /// Tropical line with marked points on its (1,1) and (-1,0) rays.
    fn marked_line() -> CombinatorialType {
        let g = Graph::new(vec![0, 0, 0], vec![(0, 1), (0, 2)], vec![1, 2, 1, 2, 0]).unwrap();
        CombinatorialType::new(
            g,
            vec![Slope(1, 1), Slope(-1, 0)],
            vec![Slope::ZERO, Slope::ZERO, Slope(1, 1), Slope(-1, 0), Slope(0, -1)],
        )
        .unwrap()
    }

    #[test]
    fn unique_line() {
        let f = fiber(&marked_line(), &pts(&[(3, 4), (-2, 1)])).unwrap();
        let FiberDescription::Point { curve } = f else { panic!("{f:?}") };
        // solved by hand: vertex at (0, 1), lengths 3 and 2
        assert_eq!(curve.position(0), &Point::from_ints(0, 1));
        assert_eq!(curve.lengths(), &[rational::int(3), rational::int(2)]);
        // the second point on the wrong side of the vertex
        assert!(fiber(&marked_line(), &pts(&[(3, 4), (0, 1)])).unwrap().is_empty());
    }

    #[test]
    fn one_point_gives_an_interval() {
        // forget the second mark: the vertex slides along the (1,1) ray
        let g = Graph::new(vec![0, 0], vec![(0, 1)], vec![1, 1, 0, 0]).unwrap();
        let t = CombinatorialType::new(
            g,
            vec![Slope(1, 1)],
            vec![Slope::ZERO, Slope(1, 1), Slope(-1, 0), Slope(0, -1)],
        )
        .unwrap();
        let FiberDescription::Interval(i) = fiber(&t, &pts(&[(3, 4)])).unwrap() else { panic!() };
        let ends: Vec<&Endpoint> = i.ends().iter().filter_map(|e| e.endpoint()).collect();
        assert_eq!(ends.len(), 1);
        assert_eq!(ends[0].vanished, vec![0]);
        assert_eq!(ends[0].degenerate.ty.graph.vertex_count(), 1);
        assert_eq!(ends[0].degenerate.position(0), &Point::from_ints(3, 4));
    }

    #[test]
    fn mismatch_rejected() {
        assert!(matches!(fiber(&marked_line(), &pts(&[(0, 0)])), Err(Error::Mismatch(_))));
    }

    #[test]
    fn repeated_point_not_general() {
        let p = vec![Point::from_ints(1, 1), Point::from_ints(1, 1)];
        assert_eq!(is_general(&p, 1, 0).is_general(), Some(false));
        assert!(PointConfiguration::new(p).is_err());
    }
}
