//! Weighted graphs with ordered legs, combinatorial types and parametrized
//! tropical plane curves.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Point, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub struct Slope(pub i64, pub i64);

impl Slope {
    pub const ZERO: Slope = Slope(0, 0);

    pub fn is_zero(self) -> bool {
        self == Slope::ZERO
    }

    pub fn det(self, other: Slope) -> i64 {
        self.0 * other.1 - self.1 * other.0
    }

    /// Lattice length: the gcd of the coordinates.
    pub fn weight(self) -> i64 {
        num::integer::gcd(self.0, self.1)
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.0, self.1)
    }
}

impl Neg for Slope {
    type Output = Slope;
    fn neg(self) -> Slope {
        Slope(-self.0, -self.1)
    }
}

impl Add for Slope {
    type Output = Slope;
    fn add(self, o: Slope) -> Slope {
        Slope(self.0 + o.0, self.1 + o.1)
    }
}

impl Sub for Slope {
    type Output = Slope;
    fn sub(self, o: Slope) -> Slope {
        Slope(self.0 - o.0, self.1 - o.1)
    }
}

impl Mul<&Rational> for Slope {
    type Output = Point;
    fn mul(self, l: &Rational) -> Point {
        Point::new(l * rational::int(self.0), l * rational::int(self.1))
    }
}

pub fn add_points(a: &Point, b: &Point) -> Point {
    Point::new(&a.x + &b.x, &a.y + &b.y)
}

pub fn sub_points(a: &Point, b: &Point) -> Point {
    Point::new(&a.x - &b.x, &a.y - &b.y)
}

/// One half-edge at a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Germ {
    /// `tail` is true for the end at the edge's first vertex.
    Edge { edge: usize, tail: bool },
    Leg(usize),
}

/// Connected weighted graph with ordered legs. Edges are stored as ordered
/// pairs; the order fixes the reference orientation used for slopes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    weights: Vec<u32>,
    edges: Vec<(usize, usize)>,
    legs: Vec<usize>,
}

impl Graph {
    pub fn new(weights: Vec<u32>, edges: Vec<(usize, usize)>, legs: Vec<usize>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::Invalid("graph has no vertices".into()));
        }
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::Invalid(format!("edge ({u},{v}) refers to a missing vertex")));
            }
        }
        if let Some(&l) = legs.iter().find(|&&l| l >= n) {
            return Err(Error::Invalid(format!("leg attached to missing vertex {l}")));
        }
        let g = Graph { weights, edges, legs };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn leg_count(&self) -> usize {
        self.legs.len()
    }

    pub fn weight(&self, v: usize) -> u32 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn leg(&self, l: usize) -> usize {
        self.legs[l]
    }

    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let (u, v) = self.edges[e];
        u == v
    }

    fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.vertex_count());
        for &(u, v) in &self.edges {
            uf.union(u, v);
        }
        let r = uf.find(0);
        (0..self.vertex_count()).all(|v| uf.find(v) == r)
    }

    pub fn star(&self, v: usize) -> Vec<Germ> {
        let mut out = Vec::new();
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if a == v {
                out.push(Germ::Edge { edge: e, tail: true });
            }
            if b == v {
                out.push(Germ::Edge { edge: e, tail: false });
            }
        }
        for (l, &a) in self.legs.iter().enumerate() {
            if a == v {
                out.push(Germ::Leg(l));
            }
        }
        out
    }

    /// Loops count twice, legs once.
    pub fn valency(&self, v: usize) -> usize {
        let e: usize = self.edges.iter().map(|&(a, b)| (a == v) as usize + (b == v) as usize).sum();
        e + self.legs.iter().filter(|&&a| a == v).count()
    }

    /// First Betti number.
    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count()
    }

    /// `χ = 1 - b₁` for a connected graph.
    pub fn euler_characteristic(&self) -> i64 {
        1 - self.betti() as i64
    }

    pub fn genus(&self) -> u32 {
        self.betti() as u32 + self.weights.iter().sum::<u32>()
    }

    pub fn is_stable(&self) -> bool {
        (0..self.vertex_count()).all(|v| match self.weights[v] {
            0 => self.valency(v) >= 3,
            1 => self.valency(v) >= 1,
            _ => true,
        })
    }

    pub fn overvalency(&self) -> usize {
        (0..self.vertex_count()).map(|v| self.valency(v).saturating_sub(3)).sum()
    }

    pub fn is_weightless(&self) -> bool {
        self.weights.iter().all(|&w| w == 0)
    }

    pub fn is_trivalent(&self) -> bool {
        (0..self.vertex_count()).all(|v| self.valency(v) == 3)
    }

    pub fn other_end(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Breadth first spanning tree from vertex 0: for each vertex the edge
    /// used to reach it, and a vertex order in which parents come first.
    pub fn spanning_tree(&self) -> (Vec<Option<usize>>, Vec<usize>) {
        let n = self.vertex_count();
        let mut adj = vec![Vec::new(); n];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            if a != b {
                adj[a].push(e);
                adj[b].push(e);
            }
        }
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = vec![0];
        seen[0] = true;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for &e in &adj[v] {
                let w = self.other_end(e, v);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(e);
                    order.push(w);
                }
            }
        }
        (parent, order)
    }
}

/// Weighted metric graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalGraph {
    pub graph: Graph,
    lengths: Vec<Rational>,
}

impl TropicalGraph {
    pub fn new(graph: Graph, lengths: Vec<Rational>) -> Result<Self> {
        if lengths.len() != graph.edge_count() {
            return Err(Error::Invalid("one length per edge required".into()));
        }
        if let Some(e) = lengths.iter().position(|l| !l.is_positive()) {
            return Err(Error::Invalid(format!("edge {e} has non-positive length")));
        }
        Ok(Self { graph, lengths })
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }
}

/// A graph together with the integer slope of every edge (for its stored
/// orientation) and every leg (pointing away from its vertex).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CombinatorialType {
    pub graph: Graph,
    edge_slopes: Vec<Slope>,
    leg_slopes: Vec<Slope>,
}

/// Result of a weighted edge contraction.
#[derive(Clone, Debug)]
pub struct Contraction {
    pub ty: CombinatorialType,
    /// old vertex -> new vertex
    pub vertex_map: Vec<usize>,
    /// old edge -> new edge, `None` for contracted edges
    pub edge_map: Vec<Option<usize>>,
}

impl CombinatorialType {
    pub fn new(graph: Graph, edge_slopes: Vec<Slope>, leg_slopes: Vec<Slope>) -> Result<Self> {
        if edge_slopes.len() != graph.edge_count() || leg_slopes.len() != graph.leg_count() {
            return Err(Error::Invalid("slope count does not match graph".into()));
        }
        for (e, s) in edge_slopes.iter().enumerate() {
            if graph.is_loop(e) && !s.is_zero() {
                return Err(Error::Invalid(format!("loop {e} has nonzero slope {s}")));
            }
        }
        Ok(Self { graph, edge_slopes, leg_slopes })
    }

    pub fn edge_slope(&self, e: usize) -> Slope {
        self.edge_slopes[e]
    }

    pub fn edge_slopes(&self) -> &[Slope] {
        &self.edge_slopes
    }

    pub fn leg_slope(&self, l: usize) -> Slope {
        self.leg_slopes[l]
    }

    pub fn leg_slopes(&self) -> &[Slope] {
        &self.leg_slopes
    }

    pub fn germ_slope(&self, g: Germ) -> Slope {
        match g {
            Germ::Edge { edge, tail: true } => self.edge_slopes[edge],
            Germ::Edge { edge, tail: false } => -self.edge_slopes[edge],
            Germ::Leg(l) => self.leg_slopes[l],
        }
    }

    pub fn star_slopes(&self, v: usize) -> Vec<Slope> {
        self.graph.star(v).into_iter().map(|g| self.germ_slope(g)).collect()
    }

    /// `Ok` if balanced everywhere, otherwise the first violating vertex.
    pub fn check_balancing(&self) -> std::result::Result<(), usize> {
        let mut sums = vec![Slope::ZERO; self.graph.vertex_count()];
        for (e, &(a, b)) in self.graph.edges().iter().enumerate() {
            sums[a] = sums[a] + self.edge_slopes[e];
            sums[b] = sums[b] - self.edge_slopes[e];
        }
        for (l, &a) in self.graph.legs().iter().enumerate() {
            sums[a] = sums[a] + self.leg_slopes[l];
        }
        match sums.iter().position(|s| !s.is_zero()) {
            None => Ok(()),
            Some(v) => Err(v),
        }
    }

    pub fn genus(&self) -> u32 {
        self.graph.genus()
    }

    /// Number of contracted legs.
    pub fn marked_count(&self) -> usize {
        self.leg_slopes.iter().filter(|s| s.is_zero()).count()
    }

    /// Contracted legs must be exactly `l_1..l_n` at the front.
    pub fn marked_legs_first(&self) -> bool {
        let n = self.marked_count();
        self.leg_slopes[..n].iter().all(|s| s.is_zero())
    }

    /// Non-contracted leg slopes, sorted.
    pub fn degree(&self) -> Vec<Slope> {
        let mut d: Vec<Slope> = self.leg_slopes.iter().copied().filter(|s| !s.is_zero()).collect();
        d.sort();
        d
    }

    /// All leg slopes in leg order.
    pub fn extended_degree(&self) -> Vec<Slope> {
        self.leg_slopes.clone()
    }

    /// Every bounded edge has nonzero slope.
    pub fn is_immersed(&self) -> bool {
        self.edge_slopes.iter().all(|s| !s.is_zero())
    }

    /// Weighted contraction of slope-zero edges.
    pub fn contract(&self, edges: &[usize]) -> Result<Contraction> {
        if let Some(&e) = edges.iter().find(|&&e| e < self.edge_slopes.len() && !self.edge_slopes[e].is_zero()) {
            return Err(Error::NonZeroContraction { edge: e, slope: self.edge_slopes[e] });
        }
        self.contract_face(edges)
    }

    /// Contraction of an arbitrary edge set, as happens on a boundary face
    /// of the moduli cone where those lengths vanish. Slopes of the
    /// collapsed edges are forgotten.
    pub fn contract_face(&self, edges: &[usize]) -> Result<Contraction> {
        let g = &self.graph;
        let mut chosen = vec![false; g.edge_count()];
        for &e in edges {
            if e >= g.edge_count() {
                return Err(Error::Invalid(format!("no edge {e}")));
            }
            chosen[e] = true;
        }
        let mut uf = UnionFind::new(g.vertex_count());
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            if chosen[e] {
                uf.union(a, b);
            }
        }
        let mut vertex_map = vec![usize::MAX; g.vertex_count()];
        let mut reps: Vec<usize> = Vec::new();
        for v in 0..g.vertex_count() {
            let r = uf.find(v);
            let idx = match reps.iter().position(|&x| x == r) {
                Some(i) => i,
                None => {
                    reps.push(r);
                    reps.len() - 1
                }
            };
            vertex_map[v] = idx;
        }
        let n = reps.len();
        let mut weights = vec![0u32; n];
        let mut class_size = vec![0usize; n];
        let mut internal = vec![0usize; n];
        for v in 0..g.vertex_count() {
            weights[vertex_map[v]] += g.weight(v);
            class_size[vertex_map[v]] += 1;
        }
        for (e, &(a, _)) in g.edges().iter().enumerate() {
            if chosen[e] {
                internal[vertex_map[a]] += 1;
            }
        }
        for c in 0..n {
            weights[c] += (internal[c] + 1 - class_size[c]) as u32;
        }
        let mut new_edges = Vec::new();
        let mut slopes = Vec::new();
        let mut edge_map = vec![None; g.edge_count()];
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            if chosen[e] {
                continue;
            }
            let (na, nb) = (vertex_map[a], vertex_map[b]);
            if na == nb && !self.edge_slopes[e].is_zero() {
                return Err(Error::Invalid(format!("contraction turns edge {e} into a loop of nonzero slope")));
            }
            edge_map[e] = Some(new_edges.len());
            new_edges.push((na, nb));
            slopes.push(self.edge_slopes[e]);
        }
        let legs = g.legs().iter().map(|&v| vertex_map[v]).collect();
        let graph = Graph::new(weights, new_edges, legs)?;
        let ty = CombinatorialType::new(graph, slopes, self.leg_slopes.clone())?;
        Ok(Contraction { ty, vertex_map, edge_map })
    }

    /// Vertex positions relative to vertex 0 as linear forms in the edge
    /// lengths, along the spanning tree: `pos(v) = pos(0) + Σ_e c[v][e] ℓ_e`.
    pub fn tree_paths(&self) -> (Vec<Vec<Slope>>, Vec<Option<usize>>) {
        let g = &self.graph;
        let (parent, order) = g.spanning_tree();
        let mut paths = vec![vec![Slope::ZERO; g.edge_count()]; g.vertex_count()];
        for &v in order.iter().skip(1) {
            let e = parent[v].expect("tree edge");
            let (a, b) = g.edge(e);
            let (p, s) = if b == v { (a, self.edge_slopes[e]) } else { (b, -self.edge_slopes[e]) };
            let mut path = paths[p].clone();
            path[e] = path[e] + s;
            paths[v] = path;
        }
        (paths, parent)
    }

    /// Rows of the cycle conditions on edge lengths: for each non-tree
    /// non-loop edge, the x and y components of the closed circuit.
    pub fn cycle_rows(&self) -> Vec<Vec<i64>> {
        let g = &self.graph;
        let (paths, parent) = self.tree_paths();
        let tree: Vec<bool> = (0..g.edge_count()).map(|e| parent.contains(&Some(e))).collect();
        let mut rows = Vec::new();
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            if tree[e] || a == b {
                continue;
            }
            let s = self.edge_slopes[e];
            let mut rx = vec![0i64; g.edge_count()];
            let mut ry = vec![0i64; g.edge_count()];
            for f in 0..g.edge_count() {
                let d = paths[b][f] - paths[a][f];
                rx[f] = d.0;
                ry[f] = d.1;
            }
            rx[e] -= s.0;
            ry[e] -= s.1;
            rows.push(rx);
            rows.push(ry);
        }
        rows
    }
}

/// A combinatorial type with positive edge lengths and vertex positions
/// consistent with the slopes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParametrizedCurve {
    pub ty: CombinatorialType,
    lengths: Vec<Rational>,
    positions: Vec<Point>,
}

impl ParametrizedCurve {
    pub fn new(ty: CombinatorialType, lengths: Vec<Rational>, positions: Vec<Point>) -> Result<Self> {
        if lengths.len() != ty.graph.edge_count() || positions.len() != ty.graph.vertex_count() {
            return Err(Error::Invalid("lengths or positions have wrong size".into()));
        }
        if let Some(e) = lengths.iter().position(|l| !l.is_positive()) {
            return Err(Error::Invalid(format!("edge {e} has non-positive length")));
        }
        if let Err(v) = ty.check_balancing() {
            return Err(Error::Unbalanced(v));
        }
        for (e, &(a, b)) in ty.graph.edges().iter().enumerate() {
            let expect = add_points(&positions[a], &(ty.edge_slope(e) * &lengths[e]));
            if expect != positions[b] {
                return Err(Error::Invalid(format!("edge {e} is inconsistent with vertex positions")));
            }
        }
        Ok(Self { ty, lengths, positions })
    }

    pub fn lengths(&self) -> &[Rational] {
        &self.lengths
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> &Point {
        &self.positions[v]
    }

    pub fn tropical_graph(&self) -> TropicalGraph {
        TropicalGraph { graph: self.ty.graph.clone(), lengths: self.lengths.clone() }
    }

    /// Images of the contracted legs in leg order.
    pub fn evaluation(&self) -> Vec<Point> {
        let g = &self.ty.graph;
        (0..g.leg_count())
            .filter(|&l| self.ty.leg_slope(l).is_zero())
            .map(|l| self.positions[g.leg(l)].clone())
            .collect()
    }

    /// Positions recomputed from vertex 0 along a spanning tree.
    pub fn integrate_positions(&self) -> Vec<Point> {
        let g = &self.ty.graph;
        let (parent, order) = g.spanning_tree();
        let mut pos = vec![Point::origin(); g.vertex_count()];
        pos[0] = self.positions[0].clone();
        for &v in order.iter().skip(1) {
            let e = parent[v].expect("tree edge");
            let (a, b) = g.edge(e);
            pos[v] = if b == v {
                add_points(&pos[a], &(self.ty.edge_slope(e) * &self.lengths[e]))
            } else {
                sub_points(&pos[b], &(self.ty.edge_slope(e) * &self.lengths[e]))
            };
        }
        pos
    }

    /// Product of `|det|` over trivalent vertices that carry no contracted
    /// leg.
    pub fn multiplicity(&self) -> u64 {
        let g = &self.ty.graph;
        let mut m = 1u64;
        for v in 0..g.vertex_count() {
            let star = g.star(v);
            if star.len() != 3 {
                continue;
            }
            if star.iter().any(|&s| matches!(s, Germ::Leg(l) if self.ty.leg_slope(l).is_zero())) {
                continue;
            }
            let a = self.ty.germ_slope(star[0]);
            let b = self.ty.germ_slope(star[1]);
            m *= a.det(b).unsigned_abs();
        }
        m
    }

    /// Drops leg `leg` and stabilizes by smoothing weight-zero vertices of
    /// valency two. Remaining legs keep their relative order.
    pub fn forget_leg(&self, leg: usize) -> Result<ParametrizedCurve> {
        let g = &self.ty.graph;
        if leg >= g.leg_count() {
            return Err(Error::Invalid(format!("no leg {leg}")));
        }
        let mut b = Builder::from_curve(self);
        b.legs.remove(leg);
        b.stabilize()?;
        b.finish()
    }

    /// Same curve with the legs permuted: new leg `i` is old leg `order[i]`.
    pub fn reorder_legs(&self, order: &[usize]) -> Result<ParametrizedCurve> {
        let mut b = Builder::from_curve(self);
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..b.legs.len()).collect::<Vec<_>>() {
            return Err(Error::Invalid("leg order is not a permutation".into()));
        }
        b.legs = order.iter().map(|&i| b.legs[i]).collect();
        b.finish()
    }
}

/// Mutable scratch form of a curve used by local surgery.
#[derive(Clone, Debug)]
pub(crate) struct Builder {
    pub weights: Vec<u32>,
    pub positions: Vec<Point>,
    pub alive: Vec<bool>,
    /// (tail, head, slope, length)
    pub edges: Vec<(usize, usize, Slope, Rational)>,
    pub legs: Vec<(usize, Slope)>,
}

impl Builder {
    pub fn from_curve(c: &ParametrizedCurve) -> Self {
        let g = &c.ty.graph;
        Builder {
            weights: g.weights().to_vec(),
            positions: c.positions.clone(),
            alive: vec![true; g.vertex_count()],
            edges: g
                .edges()
                .iter()
                .enumerate()
                .map(|(e, &(a, b))| (a, b, c.ty.edge_slope(e), c.lengths[e].clone()))
                .collect(),
            legs: g.legs().iter().enumerate().map(|(l, &v)| (v, c.ty.leg_slope(l))).collect(),
        }
    }

    fn valency(&self, v: usize) -> usize {
        self.edges.iter().map(|&(a, b, ..)| (a == v) as usize + (b == v) as usize).sum::<usize>()
            + self.legs.iter().filter(|&&(a, _)| a == v).count()
    }

    pub fn stabilize(&mut self) -> Result<()> {
        loop {
            let Some(v) = (0..self.weights.len())
                .find(|&v| self.alive[v] && self.weights[v] == 0 && self.valency(v) == 2)
            else {
                return Ok(());
            };
            let incident: Vec<usize> =
                (0..self.edges.len()).filter(|&e| self.edges[e].0 == v || self.edges[e].1 == v).collect();
            match incident.len() {
                2 => {
                    let (e1, e2) = (incident[0], incident[1]);
                    // orient e1 as a -> v and e2 as v -> b
                    let (a, s1, l1) = {
                        let (t, h, s, l) = self.edges[e1].clone();
                        if h == v { (t, s, l) } else { (h, -s, l) }
                    };
                    let (bv, l2) = {
                        let (t, h, _, l) = self.edges[e2].clone();
                        if t == v { (h, l) } else { (t, l) }
                    };
                    self.edges[e1] = (a, bv, s1, l1 + l2);
                    self.edges.remove(e2);
                }
                1 => {
                    let e = incident[0];
                    let (t, h, s, _) = self.edges[e].clone();
                    if t == h {
                        return Err(Error::Unsupported("stabilization of an isolated loop".into()));
                    }
                    let other = if t == v { h } else { t };
                    let _ = s;
                    for leg in self.legs.iter_mut() {
                        if leg.0 == v {
                            leg.0 = other;
                        }
                    }
                    self.edges.remove(e);
                }
                _ => return Err(Error::Unsupported("unstable vertex with two legs".into())),
            }
            self.alive[v] = false;
        }
    }

    pub fn finish(self) -> Result<ParametrizedCurve> {
        let mut map = vec![usize::MAX; self.weights.len()];
        let mut weights = Vec::new();
        let mut positions = Vec::new();
        for v in 0..self.weights.len() {
            if self.alive[v] {
                map[v] = weights.len();
                weights.push(self.weights[v]);
                positions.push(self.positions[v].clone());
            }
        }
        let edges = self.edges.iter().map(|&(a, b, ..)| (map[a], map[b])).collect();
        let slopes = self.edges.iter().map(|e| e.2).collect();
        let lengths = self.edges.iter().map(|e| e.3.clone()).collect();
        let legs = self.legs.iter().map(|&(v, _)| map[v]).collect();
        let leg_slopes = self.legs.iter().map(|l| l.1).collect();
        let graph = Graph::new(weights, edges, legs)?;
        let ty = CombinatorialType::new(graph, slopes, leg_slopes)?;
        ParametrizedCurve::new(ty, lengths, positions)
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

// ---------------------------------------------------------------- JSON

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct WireVertex {
    pub id: u64,
    #[serde(default)]
    pub weight: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<Point>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct WireEdge {
    pub u: u64,
    pub v: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<Slope>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "rational::opt_string")]
    pub length: Option<Rational>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct WireLeg {
    pub vertex: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<Slope>,
}

/// Shared wire format for graphs, types and curves.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub struct WireGraph {
    pub vertices: Vec<WireVertex>,
    pub edges: Vec<WireEdge>,
    pub legs: Vec<WireLeg>,
}

impl WireGraph {
    fn graph(&self) -> Result<Graph> {
        let mut index = std::collections::HashMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if index.insert(v.id, i).is_some() {
                return Err(Error::Parse(format!("duplicate vertex id {}", v.id)));
            }
        }
        let look = |id: u64| index.get(&id).copied().ok_or_else(|| Error::Parse(format!("unknown vertex id {id}")));
        let weights = self.vertices.iter().map(|v| v.weight).collect();
        let edges = self.edges.iter().map(|e| Ok((look(e.u)?, look(e.v)?))).collect::<Result<_>>()?;
        let legs = self.legs.iter().map(|l| look(l.vertex)).collect::<Result<_>>()?;
        Graph::new(weights, edges, legs)
    }

    fn slopes(&self) -> Result<(Vec<Slope>, Vec<Slope>)> {
        let missing = || Error::Parse("missing slope".into());
        let es = self.edges.iter().map(|e| e.slope.ok_or_else(missing)).collect::<Result<_>>()?;
        let ls = self.legs.iter().map(|l| l.slope.ok_or_else(missing)).collect::<Result<_>>()?;
        Ok((es, ls))
    }

    fn lengths(&self) -> Result<Vec<Rational>> {
        self.edges.iter().map(|e| e.length.clone().ok_or_else(|| Error::Parse("missing length".into()))).collect()
    }

    pub fn to_tropical_graph(&self) -> Result<TropicalGraph> {
        TropicalGraph::new(self.graph()?, self.lengths()?)
    }

    pub fn to_type(&self) -> Result<CombinatorialType> {
        let (es, ls) = self.slopes()?;
        CombinatorialType::new(self.graph()?, es, ls)
    }

    pub fn to_curve(&self) -> Result<ParametrizedCurve> {
        let ty = self.to_type()?;
        let positions = self
            .vertices
            .iter()
            .map(|v| v.position.clone().ok_or_else(|| Error::Parse("missing position".into())))
            .collect::<Result<_>>()?;
        ParametrizedCurve::new(ty, self.lengths()?, positions)
    }

    fn skeleton(g: &Graph) -> Self {
        WireGraph {
            vertices: (0..g.vertex_count())
                .map(|v| WireVertex { id: v as u64, weight: g.weight(v), position: None })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|&(u, v)| WireEdge { u: u as u64, v: v as u64, slope: None, length: None })
                .collect(),
            legs: g.legs().iter().map(|&v| WireLeg { vertex: v as u64, slope: None }).collect(),
        }
    }

    pub fn from_tropical_graph(t: &TropicalGraph) -> Self {
        let mut w = Self::skeleton(&t.graph);
        for (e, l) in w.edges.iter_mut().zip(&t.lengths) {
            e.length = Some(l.clone());
        }
        w
    }

    pub fn from_type(t: &CombinatorialType) -> Self {
        let mut w = Self::skeleton(&t.graph);
        for (e, s) in w.edges.iter_mut().zip(&t.edge_slopes) {
            e.slope = Some(*s);
        }
        for (l, s) in w.legs.iter_mut().zip(&t.leg_slopes) {
            l.slope = Some(*s);
        }
        w
    }

    pub fn from_curve(c: &ParametrizedCurve) -> Self {
        let mut w = Self::from_type(&c.ty);
        for (e, l) in w.edges.iter_mut().zip(&c.lengths) {
            e.length = Some(l.clone());
        }
        for (v, p) in w.vertices.iter_mut().zip(&c.positions) {
            v.position = Some(p.clone());
        }
        w
    }
}

macro_rules! json_io {
    ($t:ty, $from:ident, $to:ident) => {
        impl $t {
            pub fn from_json(s: &str) -> Result<Self> {
                let w: WireGraph = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
                w.$to()
            }

            pub fn to_json(&self) -> String {
                serde_json::to_string(&WireGraph::$from(self)).expect("serializable")
            }
        }

        impl Serialize for $t {
            fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                WireGraph::$from(self).serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                WireGraph::deserialize(d)?.$to().map_err(serde::de::Error::custom)
            }
        }
    };
}

json_io!(TropicalGraph, from_tropical_graph, to_tropical_graph);
json_io!(CombinatorialType, from_type, to_type);
json_io!(ParametrizedCurve, from_curve, to_curve);

/// Type with a single vertex carrying the given legs.
pub fn star_type(legs: &[Slope]) -> CombinatorialType {
    let g = Graph::new(vec![0], vec![], vec![0; legs.len()]).expect("one vertex");
    CombinatorialType::new(g, vec![], legs.to_vec()).expect("no edges")
}

pub fn zero_length() -> Rational {
    Rational::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn theta(slope: Slope) -> CombinatorialType {
        let g = Graph::new(vec![0, 0], vec![(0, 1), (0, 1), (0, 1)], vec![]).unwrap();
        CombinatorialType::new(g, vec![slope; 3], vec![]).unwrap()
    }

    #[test]
    fn genus_examples() {
        let g = Graph::new(vec![0], vec![], vec![0, 0, 0]).unwrap();
        assert_eq!(g.genus(), 0);
        assert_eq!(theta(Slope::ZERO).genus(), 2);
        let g = Graph::new(vec![1], vec![(0, 0)], vec![]).unwrap();
        assert_eq!(g.genus(), 2);
    }

    #[test]
    fn disconnected_rejected() {
        assert_eq!(Graph::new(vec![0, 0], vec![], vec![0, 1]), Err(Error::Disconnected));
    }

    #[test]
    fn stability_examples() {
        assert!(!Graph::new(vec![0], vec![], vec![0, 0]).unwrap().is_stable());
        assert!(Graph::new(vec![0], vec![], vec![0, 0, 0]).unwrap().is_stable());
        assert!(!Graph::new(vec![1], vec![], vec![]).unwrap().is_stable());
        // a loop counts twice
        assert!(Graph::new(vec![0], vec![(0, 0)], vec![0]).unwrap().is_stable());
    }

    #[test]
    fn balancing_examples() {
        assert_eq!(star_type(&[Slope(1, 1), Slope(-1, 0), Slope(0, -1)]).check_balancing(), Ok(()));
        assert_eq!(star_type(&[Slope(1, 1), Slope(-1, 0)]).check_balancing(), Err(0));
    }

    #[test]
    fn overvalency_examples() {
        assert_eq!(Graph::new(vec![0], vec![], vec![0; 3]).unwrap().overvalency(), 0);
        assert_eq!(Graph::new(vec![0, 0], vec![(0, 1)], vec![0, 0, 0, 1, 1]).unwrap().overvalency(), 1);
        assert_eq!(Graph::new(vec![0], vec![], vec![0; 5]).unwrap().overvalency(), 2);
    }

    #[test]
    fn contraction_examples() {
        // two weight-0 vertices joined by a contracted edge
        let g = Graph::new(vec![0, 0], vec![(0, 1)], vec![0, 0, 1, 1]).unwrap();
        let t = CombinatorialType::new(g, vec![Slope::ZERO], vec![Slope(1, 0), Slope(-1, 0), Slope(0, 1), Slope(0, -1)])
            .unwrap();
        let c = t.contract(&[0]).unwrap();
        assert_eq!(c.ty.graph.vertex_count(), 1);
        assert_eq!(c.ty.graph.weight(0), 0);
        assert_eq!(c.ty.genus(), t.genus());

        let g = Graph::new(vec![0], vec![(0, 0)], vec![0]).unwrap();
        let t = CombinatorialType::new(g, vec![Slope::ZERO], vec![Slope::ZERO]).unwrap();
        let c = t.contract(&[0]).unwrap();
        assert_eq!(c.ty.graph.weight(0), 1);
        assert_eq!(c.ty.genus(), 1);

        let th = theta(Slope::ZERO);
        let c = th.contract(&[0, 1, 2]).unwrap();
        assert_eq!(c.ty.graph.vertex_count(), 1);
        assert_eq!(c.ty.graph.weight(0), 2);
        assert_eq!(c.ty.genus(), th.genus());

        let g = Graph::new(vec![0, 0], vec![(0, 1)], vec![0, 0, 1, 1]).unwrap();
        let t = CombinatorialType::new(g, vec![Slope(1, 0)], vec![Slope(-1, 1), Slope(0, -1), Slope(1, 1), Slope(0, -1)])
            .unwrap();
        assert!(matches!(t.contract(&[0]), Err(Error::NonZeroContraction { .. })));
        assert!(t.contract_face(&[0]).is_ok());
    }

    #[test]
    fn loop_with_slope_rejected() {
        let g = Graph::new(vec![0], vec![(0, 0)], vec![]).unwrap();
        assert!(CombinatorialType::new(g, vec![Slope(1, 0)], vec![]).is_err());
    }

    #[test]
    fn curve_json_round_trip() {
        let g = Graph::new(vec![0, 0], vec![(0, 1)], vec![0, 0, 1, 1]).unwrap();
        let t = CombinatorialType::new(g, vec![Slope(1, 0)], vec![Slope(-1, 1), Slope(0, -1), Slope(1, 1), Slope(0, -1)])
            .unwrap();
        let c = ParametrizedCurve::new(t, vec![int(2)], vec![Point::from_ints(0, 0), Point::from_ints(2, 0)]).unwrap();
        let s = c.to_json();
        let back = ParametrizedCurve::from_json(&s).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.integrate_positions(), c.positions().to_vec());
        assert_eq!(c.multiplicity(), 1);
    }

    #[test]
    fn inconsistent_curve_rejected() {
        let g = Graph::new(vec![0, 0], vec![(0, 1)], vec![0, 0, 1, 1]).unwrap();
        let t = CombinatorialType::new(g, vec![Slope(1, 0)], vec![Slope(-1, 1), Slope(0, -1), Slope(1, 1), Slope(0, -1)])
            .unwrap();
        assert!(ParametrizedCurve::new(t, vec![int(2)], vec![Point::from_ints(0, 0), Point::from_ints(3, 0)]).is_err());
    }
}
