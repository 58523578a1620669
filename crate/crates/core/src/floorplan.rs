//! Vertically stretched configurations, floor decomposition, floor diagrams
//! for the degree `∇_d`, and enumeration of the curves through stretched
//! points.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{BigInt, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evalmap::PointConfiguration;
use crate::rational::{self, Point, Rational};
use crate::tropgraph::{CombinatorialType, Graph, ParametrizedCurve, Slope, UnionFind};

/// Largest degree accepted by the counting entry points.
pub const MAX_COUNT_DEGREE: u32 = 5;

pub fn max_genus(d: u32) -> u32 {
    if d < 3 {
        0
    } else {
        (d - 1) * (d - 2) / 2
    }
}

pub fn point_count(d: u32, g: u32) -> usize {
    (3 * d + g - 1) as usize
}

/// The degree `∇_d` as a sorted slope list.
pub fn nabla(d: u32) -> Vec<Slope> {
    let mut v = Vec::new();
    for _ in 0..d {
        v.extend([Slope(1, 1), Slope(-1, 0), Slope(0, -1)]);
    }
    v.sort();
    v
}

// ------------------------------------------------------------ stretching

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StretchedConfig {
    pub points: PointConfiguration,
    #[serde(with = "rational::as_string")]
    pub lambda: Rational,
    #[serde(default, with = "rational::opt_string", skip_serializing_if = "Option::is_none")]
    pub mu: Option<Rational>,
}

pub fn stretch_factor(n: usize, d: u32) -> BigInt {
    let base = BigInt::from(3 * d.max(1));
    num::pow(base, (3 * d.max(1)) as usize) * BigInt::from(n)
}

/// Points `(i, -μ i)`, `i = 1..n`, with `μ = (3d)^{3d}·n`.
pub fn make_stretched(n: usize, d: u32) -> Result<StretchedConfig> {
    if n == 0 {
        return Err(Error::Invalid("at least one point is required".into()));
    }
    let mu = Rational::from_integer(stretch_factor(n, d));
    let points = (1..=n as i64)
        .map(|i| {
            let x = rational::int(i);
            let y = -(&mu * &x);
            Point::new(x, y)
        })
        .collect();
    let lambda = &mu / Rational::from_integer(BigInt::from(2 * n));
    Ok(StretchedConfig { points: PointConfiguration::new(points)?, lambda, mu: Some(mu) })
}

/// `|y - y'| > λ |x - x'|` for every pair.
pub fn is_vertically_stretched(points: &[Point], lambda: &Rational) -> bool {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dy = (&points[i].y - &points[j].y).abs();
            let dx = (&points[i].x - &points[j].x).abs();
            if dy <= lambda * dx {
                return false;
            }
        }
    }
    true
}

// ------------------------------------------------------------ diagrams

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    /// Floors are numbered `1..=d` from the bottom.
    Floor(usize),
    Infinity,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Elevator {
    pub upper: End,
    pub lower: End,
    pub weight: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mark: Option<usize>,
}

impl Elevator {
    fn class(&self) -> (End, End, u32) {
        (self.upper, self.lower, self.weight)
    }
}

/// Floors `F_1..F_d` bottom to top, weighted elevators, and optionally one
/// point index (1-based) per floor and elevator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FloorDiagram {
    pub floors: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor_marks: Option<Vec<usize>>,
    pub elevators: Vec<Elevator>,
}

impl FloorDiagram {
    pub fn is_marked(&self) -> bool {
        self.floor_marks.is_some() && self.elevators.iter().all(|e| e.mark.is_some())
    }

    pub fn genus(&self) -> i64 {
        let bounded = self.elevators.iter().filter(|e| e.lower != End::Infinity && e.upper != End::Infinity).count();
        bounded as i64 - self.floors as i64 + 1
    }

    /// Down weight minus up weight.
    pub fn divergence(&self, k: usize) -> i64 {
        let mut div = 0i64;
        for e in &self.elevators {
            if e.upper == End::Floor(k) {
                div += e.weight as i64;
            }
            if e.lower == End::Floor(k) {
                div -= e.weight as i64;
            }
        }
        div
    }

    /// Product of squared weights of bounded elevators.
    pub fn multiplicity(&self) -> u64 {
        self.elevators
            .iter()
            .filter(|e| e.upper != End::Infinity && e.lower != End::Infinity)
            .map(|e| (e.weight as u64).pow(2))
            .product()
    }

    fn sort(&mut self) {
        self.elevators.sort_by(|a, b| {
            let key = |e: &Elevator| {
                let up = match e.upper {
                    End::Floor(k) => k,
                    End::Infinity => usize::MAX,
                };
                let low = match e.lower {
                    End::Floor(k) => k,
                    End::Infinity => 0,
                };
                (std::cmp::Reverse(up), std::cmp::Reverse(low), e.weight, e.mark)
            };
            key(a).cmp(&key(b))
        });
    }

    /// Violations of the structural invariants of a `∇_d` diagram.
    pub fn violations(&self, d: usize) -> Vec<String> {
        let mut out = Vec::new();
        if self.floors != d {
            out.push(format!("{} floors, expected {d}", self.floors));
        }
        for e in &self.elevators {
            if e.weight == 0 {
                out.push("elevator of weight 0".into());
            }
            if e.upper == End::Infinity {
                out.push("upward infinite elevator".into());
            }
            if e.lower == End::Infinity && e.weight != 1 {
                out.push("infinite elevator of weight other than 1".into());
            }
            if let (End::Floor(a), End::Floor(b)) = (e.upper, e.lower) {
                if a <= b {
                    out.push(format!("elevator from F{a} to F{b} does not go down"));
                }
            }
        }
        let legs = self.elevators.iter().filter(|e| e.lower == End::Infinity).count();
        if legs != d {
            out.push(format!("{legs} infinite elevators, expected {d}"));
        }
        for k in 1..=self.floors {
            if self.divergence(k) != 1 {
                out.push(format!("floor F{k} has divergence {}", self.divergence(k)));
            }
        }
        if !top_floor_check(self) {
            out.push("top floor condition fails".into());
        }
        if let Some(fm) = &self.floor_marks {
            let mut all: Vec<usize> = fm.clone();
            all.extend(self.elevators.iter().filter_map(|e| e.mark));
            if self.elevators.iter().any(|e| e.mark.is_none()) {
                out.push("elevator without marked point".into());
            }
            let n = self.floors + self.elevators.len();
            let mut sorted = all.clone();
            sorted.sort_unstable();
            if sorted != (1..=n).collect::<Vec<_>>() {
                out.push("marks are not a bijection onto the points".into());
            }
            // higher objects carry smaller indices
            for e in &self.elevators {
                let Some(m) = e.mark else { continue };
                if let End::Floor(a) = e.upper {
                    if fm[a - 1] >= m {
                        out.push(format!("elevator mark {m} above its upper floor"));
                    }
                }
                if let End::Floor(b) = e.lower {
                    if fm[b - 1] <= m {
                        out.push(format!("elevator mark {m} below its lower floor"));
                    }
                }
            }
            for k in 1..self.floors {
                if fm[k - 1] <= fm[k] {
                    out.push(format!("floor marks of F{k} and F{} out of order", k + 1));
                }
            }
        }
        out
    }
}

/// Exactly one elevator touches the top floor and it has weight one, and
/// every floor has a downward elevator.
pub fn top_floor_check(diag: &FloorDiagram) -> bool {
    let top = End::Floor(diag.floors);
    let touching: Vec<&Elevator> = diag.elevators.iter().filter(|e| e.upper == top || e.lower == top).collect();
    let one_top = touching.len() == 1 && touching[0].weight == 1;
    let downs = (1..=diag.floors).all(|k| diag.elevators.iter().any(|e| e.upper == End::Floor(k)));
    one_top && downs
}

impl fmt::Display for FloorDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = |m: Option<usize>| m.map(|q| format!("@{q}")).unwrap_or_default();
        for k in (1..=self.floors).rev() {
            write!(f, "F{k}")?;
            if let Some(fm) = &self.floor_marks {
                write!(f, " @{}", fm[k - 1])?;
            }
            write!(f, ":")?;
            for e in &self.elevators {
                if e.upper == End::Floor(k) {
                    let to = match e.lower {
                        End::Floor(j) => format!("F{j}"),
                        End::Infinity => "down".into(),
                    };
                    write!(f, " {}:F{k}->{to}{}", e.weight, mark(e.mark))?;
                } else if e.upper == End::Infinity && e.lower == End::Floor(k) {
                    write!(f, " {}:up->F{k}{}", e.weight, mark(e.mark))?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for FloorDiagram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::Parse(m);
        let floor_id = |t: &str| -> Result<usize> {
            t.strip_prefix('F')
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .ok_or_else(|| bad(format!("bad floor name {t:?}")))
        };
        let split_mark = |t: &str| -> Result<(String, Option<usize>)> {
            match t.split_once('@') {
                None => Ok((t.to_string(), None)),
                Some((a, m)) => {
                    let q = m.parse::<usize>().map_err(|_| bad(format!("bad mark {m:?}")))?;
                    if q == 0 {
                        return Err(bad("marks are 1-based".into()));
                    }
                    Ok((a.to_string(), Some(q)))
                }
            }
        };
        let mut floors: BTreeMap<usize, Option<usize>> = BTreeMap::new();
        let mut elevators = Vec::new();
        for line in s.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) = line.split_once(':').ok_or_else(|| bad(format!("missing ':' in {line:?}")))?;
            let mut head_parts = head.split_whitespace();
            let name = head_parts.next().ok_or_else(|| bad("empty floor header".into()))?;
            let k = floor_id(name)?;
            let fmark = match head_parts.next() {
                None => None,
                Some(m) => {
                    let q = m
                        .strip_prefix('@')
                        .and_then(|q| q.parse::<usize>().ok())
                        .filter(|&q| q >= 1)
                        .ok_or_else(|| bad(format!("bad floor mark {m:?}")))?;
                    Some(q)
                }
            };
            if head_parts.next().is_some() {
                return Err(bad(format!("trailing text in header {head:?}")));
            }
            if floors.insert(k, fmark).is_some() {
                return Err(bad(format!("floor F{k} listed twice")));
            }
            for arc in rest.split_whitespace() {
                let (w, body) = arc.split_once(':').ok_or_else(|| bad(format!("bad arc {arc:?}")))?;
                let weight = w.parse::<u32>().ok().filter(|&w| w >= 1).ok_or_else(|| bad(format!("bad weight {w:?}")))?;
                let (body, mark) = split_mark(body)?;
                let (src, dst) = body.split_once("->").ok_or_else(|| bad(format!("bad arc {arc:?}")))?;
                let (upper, lower) = if src == "up" {
                    if floor_id(dst)? != k {
                        return Err(bad(format!("arc {arc:?} listed under F{k}")));
                    }
                    (End::Infinity, End::Floor(k))
                } else {
                    if floor_id(src)? != k {
                        return Err(bad(format!("arc {arc:?} listed under F{k}")));
                    }
                    let lower = if dst == "down" { End::Infinity } else { End::Floor(floor_id(dst)?) };
                    (End::Floor(k), lower)
                };
                elevators.push(Elevator { upper, lower, weight, mark });
            }
        }
        let d = floors.len();
        if d == 0 {
            return Err(bad("no floors".into()));
        }
        if floors.keys().copied().ne(1..=d) {
            return Err(bad("floors must be F1..Fd".into()));
        }
        for e in &elevators {
            if let End::Floor(j) = e.lower {
                if j > d {
                    return Err(bad(format!("unknown floor F{j}")));
                }
            }
        }
        let marks: Vec<Option<usize>> = floors.values().copied().collect();
        let any_marked = marks.iter().any(Option::is_some) || elevators.iter().any(|e| e.mark.is_some());
        let floor_marks = if any_marked {
            if marks.iter().any(Option::is_none) || elevators.iter().any(|e| e.mark.is_none()) {
                return Err(bad("either every floor and elevator is marked or none is".into()));
            }
            Some(marks.into_iter().map(|m| m.expect("checked")).collect())
        } else {
            None
        };
        let mut diag = FloorDiagram { floors: d, floor_marks, elevators };
        diag.sort();
        Ok(diag)
    }
}

// ------------------------------------------------------------ enumeration

/// Connected `∇_d` floor diagrams of genus `g`, unmarked.
pub fn enumerate_diagrams(d: u32, g: u32) -> Vec<FloorDiagram> {
    let d = d as usize;
    if d == 0 || g > max_genus(d as u32) {
        return Vec::new();
    }
    if d == 1 {
        return vec![FloorDiagram {
            floors: 1,
            floor_marks: None,
            elevators: vec![Elevator { upper: End::Floor(1), lower: End::Infinity, weight: 1, mark: None }],
        }];
    }
    let bounded = d - 1 + g as usize;
    let mut kinds = Vec::new();
    for j in (2..=d).rev() {
        for i in (1..j).rev() {
            for w in 1..=d as u32 {
                kinds.push((j, i, w));
            }
        }
    }
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    // cut k sits between floors k-1 and k; capacity d - k + 1
    let mut load = vec![0u32; d + 2];
    enumerate_rec(d, &kinds, 0, bounded, &mut chosen, &mut load, &mut out);
    out
}

fn enumerate_rec(
    d: usize,
    kinds: &[(usize, usize, u32)],
    idx: usize,
    left: usize,
    chosen: &mut Vec<(usize, usize, u32)>,
    load: &mut Vec<u32>,
    out: &mut Vec<FloorDiagram>,
) {
    if left == 0 {
        if let Some(diag) = finish_diagram(d, chosen) {
            out.push(diag);
        }
        return;
    }
    if idx == kinds.len() {
        return;
    }
    let (j, i, w) = kinds[idx];
    // take one more of this kind
    let fits = (i + 1..=j).all(|k| load[k] + w <= (d - k + 1) as u32);
    if fits {
        for k in i + 1..=j {
            load[k] += w;
        }
        chosen.push((j, i, w));
        enumerate_rec(d, kinds, idx, left - 1, chosen, load, out);
        chosen.pop();
        for k in i + 1..=j {
            load[k] -= w;
        }
    }
    enumerate_rec(d, kinds, idx + 1, left, chosen, load, out);
}

fn finish_diagram(d: usize, chosen: &[(usize, usize, u32)]) -> Option<FloorDiagram> {
    let mut legs = vec![1i64; d + 1];
    legs[0] = 0;
    let mut uf = UnionFind::new(d + 1);
    for &(j, i, w) in chosen {
        legs[j] -= w as i64;
        legs[i] += w as i64;
        uf.union(j, i);
    }
    if legs[1..].iter().any(|&a| a < 0) {
        return None;
    }
    let r = uf.find(1);
    if (1..=d).any(|k| uf.find(k) != r) {
        return None;
    }
    let mut elevators: Vec<Elevator> = chosen
        .iter()
        .map(|&(j, i, w)| Elevator { upper: End::Floor(j), lower: End::Floor(i), weight: w, mark: None })
        .collect();
    for k in 1..=d {
        for _ in 0..legs[k] {
            elevators.push(Elevator { upper: End::Floor(k), lower: End::Infinity, weight: 1, mark: None });
        }
    }
    let mut diag = FloorDiagram { floors: d, floor_marks: None, elevators };
    diag.sort();
    Some(diag)
}

/// All markings of `diag` by rank positions `1..n` (1 is the highest
/// point), up to swapping parallel identical elevators.
pub fn markings_of(diag: &FloorDiagram) -> Vec<FloorDiagram> {
    let mut classes: Vec<((End, End, u32), usize)> = Vec::new();
    for e in &diag.elevators {
        match classes.iter_mut().find(|(c, _)| *c == e.class()) {
            Some((_, m)) => *m += 1,
            None => classes.push((e.class(), 1)),
        }
    }
    let n = diag.floors + diag.elevators.len();
    let mut state = MarkState {
        d: diag.floors,
        classes: classes.iter().map(|c| c.0).collect(),
        remaining: classes.iter().map(|c| c.1).collect(),
        placed_floors: 0,
        floor_marks: vec![0; diag.floors],
        class_marks: vec![Vec::new(); classes.len()],
    };
    let mut out = Vec::new();
    mark_rec(&mut state, 1, n, &mut out);
    out
}

struct MarkState {
    d: usize,
    classes: Vec<(End, End, u32)>,
    remaining: Vec<usize>,
    placed_floors: usize,
    floor_marks: Vec<usize>,
    class_marks: Vec<Vec<usize>>,
}

fn mark_rec(s: &mut MarkState, pos: usize, n: usize, out: &mut Vec<FloorDiagram>) {
    if pos > n {
        let mut elevators = Vec::new();
        for (c, marks) in s.classes.iter().zip(&s.class_marks) {
            for &m in marks {
                elevators.push(Elevator { upper: c.0, lower: c.1, weight: c.2, mark: Some(m) });
            }
        }
        let mut diag = FloorDiagram { floors: s.d, floor_marks: Some(s.floor_marks.clone()), elevators };
        diag.sort();
        out.push(diag);
        return;
    }
    let floor_placed = |s: &MarkState, k: usize| k > s.d - s.placed_floors;
    // next floor from the top
    if s.placed_floors < s.d {
        let k = s.d - s.placed_floors;
        let ready = s.classes.iter().zip(&s.remaining).all(|(c, &r)| r == 0 || c.1 != End::Floor(k));
        if ready {
            s.placed_floors += 1;
            s.floor_marks[k - 1] = pos;
            mark_rec(s, pos + 1, n, out);
            s.placed_floors -= 1;
        }
    }
    for c in 0..s.classes.len() {
        if s.remaining[c] == 0 {
            continue;
        }
        let upper_ok = match s.classes[c].0 {
            End::Floor(k) => floor_placed(s, k),
            End::Infinity => true,
        };
        if !upper_ok {
            continue;
        }
        s.remaining[c] -= 1;
        s.class_marks[c].push(pos);
        mark_rec(s, pos + 1, n, out);
        s.class_marks[c].pop();
        s.remaining[c] += 1;
    }
}

/// Marked diagrams of degree `∇_d` and genus `g`, marks are rank positions.
pub fn enumerate_marked(d: u32, g: u32) -> Vec<FloorDiagram> {
    let diags = enumerate_diagrams(d, g);
    diags.par_iter().map(markings_of).collect::<Vec<_>>().into_iter().flatten().collect()
}

/// Point indices ordered from the highest point down.
fn height_order(points: &[Point]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[b].y.cmp(&points[a].y).then(a.cmp(&b)));
    idx
}

/// Replaces rank positions by 1-based point indices.
pub fn relabel_by_points(diag: &FloorDiagram, points: &[Point]) -> FloorDiagram {
    let order = height_order(points);
    let map = |r: usize| order[r - 1] + 1;
    let mut out = diag.clone();
    if let Some(fm) = &mut out.floor_marks {
        for m in fm.iter_mut() {
            *m = map(*m);
        }
    }
    for e in out.elevators.iter_mut() {
        e.mark = e.mark.map(map);
    }
    out
}

#[derive(Clone, Copy)]
enum Special {
    Mark(usize),
    Down(usize),
    Up(usize),
}

/// The unique curve of a marked diagram through `points`; marks are 1-based
/// point indices.
pub fn build_curve(diag: &FloorDiagram, points: &[Point]) -> Result<ParametrizedCurve> {
    let Some(floor_marks) = &diag.floor_marks else {
        return Err(Error::Invalid("diagram is not marked".into()));
    };
    let n = points.len();
    if diag.floors + diag.elevators.len() != n {
        return Err(Error::Mismatch(format!("diagram has {} marked objects, {n} points", diag.floors + diag.elevators.len())));
    }
    let d = diag.floors;
    let pt = |q: usize| -> Result<&Point> {
        points.get(q.wrapping_sub(1)).ok_or_else(|| Error::Invalid(format!("mark {q} out of range")))
    };
    let mut emark = Vec::new();
    for e in &diag.elevators {
        if e.upper == End::Infinity {
            return Err(Error::Unsupported("upward infinite elevators".into()));
        }
        emark.push(e.mark.ok_or_else(|| Error::Invalid("unmarked elevator".into()))?);
    }

    let mut positions: Vec<Point> = Vec::new();
    let mut edges: Vec<(usize, usize, Slope, Rational)> = Vec::new();
    let mut contracted: Vec<(usize, usize)> = Vec::new(); // (point index, vertex)
    let mut right_legs = Vec::new();
    let mut left_legs = Vec::new();
    // elevator -> (upper vertex, lower vertex)
    let mut attach: Vec<(Option<usize>, Option<usize>)> = vec![(None, None); diag.elevators.len()];

    for k in (1..=d).rev() {
        let mut specials: Vec<(Rational, Special)> = vec![(pt(floor_marks[k - 1])?.x.clone(), Special::Mark(floor_marks[k - 1]))];
        for (i, e) in diag.elevators.iter().enumerate() {
            if e.upper == End::Floor(k) {
                specials.push((pt(emark[i])?.x.clone(), Special::Down(i)));
            }
            if e.lower == End::Floor(k) {
                specials.push((pt(emark[i])?.x.clone(), Special::Up(i)));
            }
        }
        specials.sort_by(|a, b| a.0.cmp(&b.0));
        if specials.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Invalid(format!("two special points of floor F{k} share an x-coordinate")));
        }
        // slope to the right of each special point
        let mut slopes = Vec::with_capacity(specials.len());
        let mut a = 0i64;
        for (_, s) in &specials {
            match *s {
                Special::Down(i) => a += diag.elevators[i].weight as i64,
                Special::Up(i) => a -= diag.elevators[i].weight as i64,
                Special::Mark(_) => {}
            }
            slopes.push(a);
        }
        if a != 1 {
            return Err(Error::Invalid(format!("floor F{k} has divergence {a}")));
        }
        // heights: pin the floor at its marked point
        let anchor = specials.iter().position(|s| matches!(s.1, Special::Mark(_))).expect("floor mark");
        let mut ys = vec![Rational::zero(); specials.len()];
        ys[anchor] = pt(floor_marks[k - 1])?.y.clone();
        for i in anchor + 1..specials.len() {
            ys[i] = &ys[i - 1] + (&specials[i].0 - &specials[i - 1].0) * rational::int(slopes[i - 1]);
        }
        for i in (0..anchor).rev() {
            ys[i] = &ys[i + 1] - (&specials[i + 1].0 - &specials[i].0) * rational::int(slopes[i]);
        }
        let first = positions.len();
        for (i, (x, s)) in specials.iter().enumerate() {
            let v = positions.len();
            positions.push(Point::new(x.clone(), ys[i].clone()));
            match *s {
                Special::Mark(q) => contracted.push((q, v)),
                Special::Down(e) => attach[e].0 = Some(v),
                Special::Up(e) => attach[e].1 = Some(v),
            }
            if i > 0 {
                let dx = x - &specials[i - 1].0;
                edges.push((v - 1, v, Slope(1, slopes[i - 1]), dx));
            }
        }
        left_legs.push(first);
        right_legs.push(positions.len() - 1);
    }

    // elevators in order of their marks
    let mut order: Vec<usize> = (0..diag.elevators.len()).collect();
    order.sort_by_key(|&i| emark[i]);
    let mut down_legs = Vec::new();
    for i in order {
        let e = &diag.elevators[i];
        let w = e.weight as i64;
        let p = pt(emark[i])?;
        let m = positions.len();
        positions.push(p.clone());
        contracted.push((emark[i], m));
        let top = attach[i].0.expect("upper floor vertex");
        let len = (&positions[top].y - &p.y) / rational::int(w);
        if !len.is_positive() {
            return Err(Error::Invalid(format!("point {} is not below the upper floor of its elevator", emark[i])));
        }
        edges.push((top, m, Slope(0, -w), len));
        match attach[i].1 {
            Some(bottom) => {
                let len = (&p.y - &positions[bottom].y) / rational::int(w);
                if !len.is_positive() {
                    return Err(Error::Invalid(format!("point {} is not above the lower floor of its elevator", emark[i])));
                }
                edges.push((m, bottom, Slope(0, -w), len));
            }
            None => down_legs.push(m),
        }
    }

    contracted.sort();
    let mut legs: Vec<(usize, Slope)> = contracted.iter().map(|&(_, v)| (v, Slope::ZERO)).collect();
    legs.extend(right_legs.iter().map(|&v| (v, Slope(1, 1))));
    legs.extend(left_legs.iter().map(|&v| (v, Slope(-1, 0))));
    legs.extend(down_legs.iter().map(|&v| (v, Slope(0, -1))));

    let graph = Graph::new(
        vec![0; positions.len()],
        edges.iter().map(|e| (e.0, e.1)).collect(),
        legs.iter().map(|l| l.0).collect(),
    )?;
    let ty = CombinatorialType::new(graph, edges.iter().map(|e| e.2).collect(), legs.iter().map(|l| l.1).collect())?;
    ParametrizedCurve::new(ty, edges.into_iter().map(|e| e.3).collect(), positions)
}

/// All curves of degree `∇_d` and genus `g` through a stretched
/// configuration of `3d + g - 1` points.
pub fn enumerate_curves(d: u32, g: u32, cfg: &StretchedConfig) -> Result<Vec<ParametrizedCurve>> {
    let n = point_count(d, g);
    if cfg.points.len() != n {
        return Err(Error::Mismatch(format!("{} points given, {n} required", cfg.points.len())));
    }
    if !is_vertically_stretched(cfg.points.points(), &cfg.lambda) {
        return Err(Error::Invalid("configuration is not vertically stretched for its λ".into()));
    }
    if g > max_genus(d) {
        return Ok(Vec::new());
    }
    let pts = cfg.points.points();
    enumerate_marked(d, g)
        .par_iter()
        .map(|m| {
            let diag = relabel_by_points(m, pts);
            let c = build_curve(&diag, pts)?;
            if c.evaluation() != pts {
                return Err(Error::Invalid("constructed curve misses its points".into()));
            }
            Ok(c)
        })
        .collect()
}

/// Multiplicity-weighted number of curves of degree `∇_d` and genus `g`
/// through `3d + g - 1` stretched points.
pub fn count_severi(d: u32, g: u32) -> Result<u64> {
    if d == 0 {
        return Err(Error::Invalid("degree must be positive".into()));
    }
    if d > MAX_COUNT_DEGREE {
        return Err(Error::ScaleRefused(format!("degree {d} exceeds {MAX_COUNT_DEGREE}")));
    }
    if g > max_genus(d) {
        return Ok(0);
    }
    let cfg = make_stretched(point_count(d, g), d)?;
    let curves = enumerate_curves(d, g, &cfg)?;
    Ok(curves.iter().map(|c| c.multiplicity()).sum())
}

// ------------------------------------------------------------ decomposition

#[derive(Clone, Debug, Serialize)]
pub struct FloorPart {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    /// Non-contracted legs.
    pub legs: Vec<usize>,
    /// Contracted legs.
    pub marks: Vec<usize>,
    #[serde(with = "rational::as_string")]
    pub height: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct ElevatorPart {
    pub edges: Vec<usize>,
    pub legs: Vec<usize>,
    pub marks: Vec<usize>,
    pub weight: i64,
    #[serde(with = "rational::as_string")]
    pub x: Rational,
    /// Ends from the highest to the lowest, with the attaching vertex for
    /// floor ends.
    pub ends: Vec<(End, Option<usize>)>,
}

impl ElevatorPart {
    pub fn upper(&self) -> End {
        self.ends[0].0
    }

    pub fn lower(&self) -> End {
        self.ends[self.ends.len() - 1].0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    /// Bottom to top; `End::Floor(k)` refers to `floors[k - 1]`.
    pub floors: Vec<FloorPart>,
    pub elevators: Vec<ElevatorPart>,
    /// Invariant failures, checked when the degree is `∇_d`.
    pub violations: Vec<String>,
}

impl Decomposition {
    /// Floor containing vertex `v`, 1-based.
    pub fn floor_of(&self, v: usize) -> Option<usize> {
        self.floors.iter().position(|f| f.vertices.contains(&v)).map(|i| i + 1)
    }

    pub fn diagram(&self) -> Result<FloorDiagram> {
        let mut elevators = Vec::new();
        let single = |m: &[usize]| (m.len() == 1).then(|| m[0] + 1);
        let mut all_marked = self.floors.iter().all(|f| f.marks.len() == 1);
        for e in &self.elevators {
            if e.ends.len() != 2 {
                return Err(Error::Invalid(format!("elevator at x = {} has {} ends", e.x, e.ends.len())));
            }
            let mark = single(&e.marks);
            all_marked &= mark.is_some();
            elevators.push(Elevator { upper: e.upper(), lower: e.lower(), weight: e.weight as u32, mark });
        }
        let floor_marks = if all_marked { Some(self.floors.iter().map(|f| f.marks[0] + 1).collect()) } else { None };
        if !all_marked {
            for e in elevators.iter_mut() {
                e.mark = None;
            }
        }
        let mut diag = FloorDiagram { floors: self.floors.len(), floor_marks, elevators };
        diag.sort();
        Ok(diag)
    }
}

/// Splits a curve into floors and elevators.
pub fn decompose(c: &ParametrizedCurve) -> Result<Decomposition> {
    let t = &c.ty;
    let g = &t.graph;
    for e in 0..g.edge_count() {
        let s = t.edge_slope(e);
        if s.0.abs() > 1 {
            return Err(Error::NotFloorDecomposed { what: format!("edge {e}"), slope: s });
        }
    }
    for l in 0..g.leg_count() {
        let s = t.leg_slope(l);
        if s.0.abs() > 1 {
            return Err(Error::NotFloorDecomposed { what: format!("leg {l}"), slope: s });
        }
    }
    let vertical = |s: Slope| s.0 == 0 && s.1 != 0;
    let mut uf = UnionFind::new(g.vertex_count());
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if !vertical(t.edge_slope(e)) {
            uf.union(a, b);
        }
    }
    let mut comp_of = vec![usize::MAX; g.vertex_count()];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for v in 0..g.vertex_count() {
        let r = uf.find(v);
        let i = match roots.iter().position(|&x| x == r) {
            Some(i) => i,
            None => {
                roots.push(r);
                comps.push(Vec::new());
                roots.len() - 1
            }
        };
        comps[i].push(v);
        comp_of[v] = i;
    }
    let mut is_floor = vec![false; comps.len()];
    for (e, &(a, _)) in g.edges().iter().enumerate() {
        if t.edge_slope(e).0 != 0 {
            is_floor[comp_of[a]] = true;
        }
    }
    for l in 0..g.leg_count() {
        if t.leg_slope(l).0 != 0 {
            is_floor[comp_of[g.leg(l)]] = true;
        }
    }

    // floors sorted bottom to top by their highest vertex
    let mut floor_comps: Vec<usize> = (0..comps.len()).filter(|&i| is_floor[i]).collect();
    let top_y = |i: usize| comps[i].iter().map(|&v| c.position(v).y.clone()).max().expect("nonempty");
    floor_comps.sort_by_key(|&i| top_y(i));
    let mut floor_index = vec![None; comps.len()];
    for (k, &i) in floor_comps.iter().enumerate() {
        floor_index[i] = Some(k + 1);
    }
    let mut floors: Vec<FloorPart> = floor_comps
        .iter()
        .map(|&i| FloorPart {
            vertices: comps[i].clone(),
            edges: Vec::new(),
            legs: Vec::new(),
            marks: Vec::new(),
            height: top_y(i),
        })
        .collect();
    for (e, &(a, _)) in g.edges().iter().enumerate() {
        if !vertical(t.edge_slope(e)) {
            if let Some(k) = floor_index[comp_of[a]] {
                floors[k - 1].edges.push(e);
            }
        }
    }

    // elevator pieces, merged through non-floor components
    #[derive(Clone, Copy)]
    enum Piece {
        Edge(usize),
        Leg(usize),
    }
    let mut pieces = Vec::new();
    for e in 0..g.edge_count() {
        if vertical(t.edge_slope(e)) {
            pieces.push(Piece::Edge(e));
        }
    }
    for l in 0..g.leg_count() {
        if vertical(t.leg_slope(l)) {
            pieces.push(Piece::Leg(l));
        }
    }
    let mut puf = UnionFind::new(pieces.len() + comps.len());
    let connector_node = |comp: usize| pieces.len() + comp;
    for (p, piece) in pieces.iter().enumerate() {
        let ends: Vec<usize> = match *piece {
            Piece::Edge(e) => {
                let (a, b) = g.edge(e);
                vec![a, b]
            }
            Piece::Leg(l) => vec![g.leg(l)],
        };
        for v in ends {
            if !is_floor[comp_of[v]] {
                puf.union(p, connector_node(comp_of[v]));
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for p in 0..pieces.len() {
        let r = puf.find(p);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, v)) => v.push(p),
            None => groups.push((r, vec![p])),
        }
    }
    let mut elevators = Vec::new();
    for (root, members) in &groups {
        let mut part = ElevatorPart {
            edges: Vec::new(),
            legs: Vec::new(),
            marks: Vec::new(),
            weight: 0,
            x: Rational::zero(),
            ends: Vec::new(),
        };
        let mut floor_ends: Vec<(Rational, End, usize)> = Vec::new();
        let mut up_inf = false;
        let mut down_inf = false;
        for &p in members {
            let (s, vs) = match pieces[p] {
                Piece::Edge(e) => {
                    part.edges.push(e);
                    let (a, b) = g.edge(e);
                    (t.edge_slope(e), vec![a, b])
                }
                Piece::Leg(l) => {
                    part.legs.push(l);
                    let s = t.leg_slope(l);
                    if s.1 > 0 {
                        up_inf = true;
                    } else {
                        down_inf = true;
                    }
                    (s, vec![g.leg(l)])
                }
            };
            if part.weight == 0 {
                part.weight = s.1.abs();
            } else if part.weight != s.1.abs() && members.len() > 1 && groups.len() > 0 {
                // a junction of elevators of different weights; keep the
                // largest for reporting
                part.weight = part.weight.max(s.1.abs());
            }
            for v in vs {
                part.x = c.position(v).x.clone();
                if let Some(k) = floor_index[comp_of[v]] {
                    floor_ends.push((c.position(v).y.clone(), End::Floor(k), v));
                }
            }
        }
        for v in 0..g.vertex_count() {
            if !is_floor[comp_of[v]] && puf.find(connector_node(comp_of[v])) == *root {
                for l in 0..g.leg_count() {
                    if g.leg(l) == v && t.leg_slope(l).is_zero() {
                        part.marks.push(l);
                    }
                }
            }
        }
        floor_ends.sort_by(|a, b| b.0.cmp(&a.0));
        if up_inf {
            part.ends.push((End::Infinity, None));
        }
        part.ends.extend(floor_ends.into_iter().map(|(_, e, v)| (e, Some(v))));
        if down_inf {
            part.ends.push((End::Infinity, None));
        }
        part.edges.sort_unstable();
        part.legs.sort_unstable();
        part.marks.sort_unstable();
        elevators.push(part);
    }
    elevators.sort_by(|a, b| a.x.cmp(&b.x));

    for l in 0..g.leg_count() {
        let v = g.leg(l);
        let s = t.leg_slope(l);
        match floor_index[comp_of[v]] {
            Some(k) if s.is_zero() => floors[k - 1].marks.push(l),
            Some(k) if !vertical(s) => floors[k - 1].legs.push(l),
            Some(_) => {}
            None if s.is_zero() => {
                if !elevators.iter().any(|e| e.marks.contains(&l)) {
                    return Err(Error::Invalid(format!("contracted leg {l} lies on neither a floor nor an elevator")));
                }
            }
            None => {}
        }
    }

    let mut dec = Decomposition { floors, elevators, violations: Vec::new() };
    let degree = t.degree();
    let d = degree.iter().filter(|s| **s == Slope(0, -1)).count();
    if d > 0 && degree == nabla(d as u32) {
        dec.violations = check_decomposition(&dec, d);
    }
    Ok(dec)
}

fn check_decomposition(dec: &Decomposition, d: usize) -> Vec<String> {
    let mut out = Vec::new();
    for (k, f) in dec.floors.iter().enumerate() {
        if f.marks.len() != 1 {
            out.push(format!("floor F{} carries {} marked points", k + 1, f.marks.len()));
        }
    }
    for e in &dec.elevators {
        if e.marks.len() != 1 {
            out.push(format!("elevator at x = {} carries {} marked points", e.x, e.marks.len()));
        }
    }
    match dec.diagram() {
        Ok(diag) => out.extend(diag.violations(d)),
        Err(e) => out.push(e.to_string()),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stretched_configs() {
        let c = make_stretched(2, 1).unwrap();
        assert!(is_vertically_stretched(c.points.points(), &c.lambda));
        let c = make_stretched(8, 3).unwrap();
        assert!(is_vertically_stretched(c.points.points(), &c.lambda));
        let flat = vec![Point::from_ints(0, 0), Point::from_ints(10, 1)];
        assert!(!is_vertically_stretched(&flat, &rational::int(1)));
    }

    #[test]
    fn diagram_text_round_trip() {
        for diag in enumerate_marked(3, 1).into_iter().chain(enumerate_marked(3, 0).into_iter().take(5)) {
            let text = diag.to_string();
            let back: FloorDiagram = text.parse().unwrap();
            assert_eq!(back, diag, "{text}");
            assert!(diag.violations(3).is_empty(), "{text}");
        }
    }

    #[test]
    fn two_top_elevators_fail() {
        let diag: FloorDiagram = "F2: 1:F2->F1 1:F2->F1\nF1: 1:F1->down 1:F1->down 1:F1->down".parse().unwrap();
        assert!(!top_floor_check(&diag));
        let line: FloorDiagram = "F1: 1:F1->down".parse().unwrap();
        assert!(top_floor_check(&line));
    }

    #[test]
    fn parse_errors() {
        assert!("F1: 1:F2->down".parse::<FloorDiagram>().is_err());
        assert!("F2: 1:F2->F1".parse::<FloorDiagram>().is_err());
        assert!("F1 @1: 1:F1->down".parse::<FloorDiagram>().is_err());
        assert!("".parse::<FloorDiagram>().is_err());
    }

    #[test]
    fn line_through_two_points() {
        let cfg = make_stretched(2, 1).unwrap();
        let curves = enumerate_curves(1, 0, &cfg).unwrap();
        assert_eq!(curves.len(), 1);
        let dec = decompose(&curves[0]).unwrap();
        assert_eq!(dec.floors.len(), 1);
        assert_eq!(dec.elevators.len(), 1);
        assert!(dec.violations.is_empty(), "{:?}", dec.violations);
    }

    #[test]
    fn stretched_rational_cubics() {
        let cfg = make_stretched(8, 3).unwrap();
        for c in enumerate_curves(3, 0, &cfg).unwrap() {
            assert!(c.ty.check_balancing().is_ok());
            let dec = decompose(&c).unwrap();
            assert!(dec.violations.is_empty(), "{:?}", dec.violations);
            assert_eq!(dec.floors.len(), 3);
            assert_eq!(dec.elevators.len(), 5);
            let down = dec.elevators.iter().filter(|e| e.lower() == End::Infinity).count();
            assert_eq!(down, 3);
            let mut marks: Vec<usize> = dec.floors.iter().flat_map(|f| f.marks.clone()).collect();
            marks.extend(dec.elevators.iter().flat_map(|e| e.marks.clone()));
            marks.sort_unstable();
            assert_eq!(marks, (0..8).collect::<Vec<_>>());
        }
    }

    #[test]
    fn steep_edge_not_floor_decomposed() {
        let g = Graph::new(vec![0, 0], vec![(0, 1)], vec![0, 0, 1, 1]).unwrap();
        let t = CombinatorialType::new(
            g,
            vec![Slope(2, 1)],
            vec![Slope(-1, 0), Slope(-1, -1), Slope(1, 0), Slope(1, 1)],
        )
        .unwrap();
        let c = ParametrizedCurve::new(t, vec![rational::int(1)], vec![Point::from_ints(0, 0), Point::from_ints(2, 1)])
            .unwrap();
        assert!(matches!(decompose(&c), Err(Error::NotFloorDecomposed { slope: Slope(2, 1), .. })));
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_severi(1, 0).unwrap(), 1);
        assert_eq!(count_severi(2, 0).unwrap(), 1);
        assert_eq!(count_severi(3, 0).unwrap(), 12);
        assert_eq!(count_severi(3, 1).unwrap(), 1);
        assert!(matches!(count_severi(6, 0), Err(Error::ScaleRefused(_))));
    }
}
