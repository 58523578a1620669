//! The elevator walk: a floor decomposed solution loses its mobile point,
//! its top elevator slides along the floor below, and every simple wall on
//! the way is crossed into the adjacent nice stratum prescribed by the case
//! analysis, until two weight-one elevators merge and a contracted edge of
//! free length appears.

use std::cmp::Ordering;

use num::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evalmap::{self, FiberDescription, FiberInterval, IntervalEnd, PointConfiguration};
use crate::floorplan::{self, Decomposition, StretchedConfig};
use crate::moduli::{self, Resolution, StratumClass};
use crate::rational::{self, Rational};
use crate::tropgraph::{CombinatorialType, Germ, ParametrizedCurve, Slope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    ElevatorMeetsMarkedPoint,
    ElevatorMeetsElevator,
    ElevatorMeetsFloorVertex,
}

/// Which adjacent nice stratum to enter at a wall.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossChoice {
    /// The elevator passes the special point and stays on its floor.
    ContinuePast,
    /// The elevator and the nearest downward elevator join at a new vertex.
    Merge,
    /// The junction passes the marked point on the merged elevator.
    Descend,
    /// The junction reaches the lower floor and the elevator reattaches there.
    Reattach,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    /// `E` ends on a floor and slides along it.
    Slide,
    /// `E` joined a downward elevator of weight `weight` below the floor.
    Merged { weight: i64 },
    /// The junction passed the marked point and moves towards the floor below.
    Descended,
}

/// `x = x_0 < ... < x_r = x'` (or decreasing when `dir < 0`).
#[derive(Clone, Debug, Serialize)]
pub struct Ladder {
    pub k: usize,
    pub r: usize,
    #[serde(with = "rational::vec_string")]
    pub points: Vec<Rational>,
    pub dir: i8,
}

impl Ladder {
    pub fn x(&self) -> &Rational {
        &self.points[0]
    }

    pub fn x_prime(&self) -> &Rational {
        &self.points[self.points.len() - 1]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WallEvent {
    pub kind: EventKind,
    pub wall_type: CombinatorialType,
    pub wall_curve: ParametrizedCurve,
    /// The four-valent vertex.
    pub vertex: usize,
    #[serde(with = "rational::as_string")]
    pub parameter: Rational,
    pub elevator: Germ,
    pub partner: Germ,
    pub resolutions: Vec<Resolution>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StateSummary {
    #[serde(flatten)]
    pub phase: Phase,
    pub class: StratumClass,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Ladder>,
    pub curve: ParametrizedCurve,
}

#[derive(Clone, Debug)]
pub struct WalkState {
    /// A curve in the open stratum, or the wall curve while at a wall.
    pub curve: ParametrizedCurve,
    pub class: StratumClass,
    pub phase: Phase,
    /// The mobile elevator `E` as an edge of `curve`.
    pub elevator: usize,
    pub ladder: Option<Ladder>,
    pub fixed: PointConfiguration,
    /// Edge whose length vanishes on the wall last crossed.
    pub entered_through: Option<usize>,
    pub descent: Vec<(usize, usize)>,
    pub crossings: usize,
    pub bound: usize,
    pending: Option<Pending>,
}

#[derive(Clone, Debug)]
struct Pending {
    event: WallEvent,
    choice: CrossChoice,
    weight: i64,
    /// Floor index reached when reattaching.
    floor: Option<usize>,
}

impl WalkState {
    pub fn summary(&self) -> StateSummary {
        StateSummary { phase: self.phase, class: self.class.clone(), ladder: self.ladder.clone(), curve: self.curve.clone() }
    }

    pub fn at_wall(&self) -> bool {
        self.pending.is_some()
    }

    /// The choice the case analysis prescribes at the current wall.
    pub fn prescribed_choice(&self) -> Option<CrossChoice> {
        self.pending.as_ref().map(|p| p.choice)
    }
}

/// The stratum reached at the end: one slope-zero edge of unbounded length,
/// everything else fixed.
#[derive(Clone, Debug, Serialize)]
pub struct TerminalWitness {
    #[serde(rename = "type")]
    pub ty: CombinatorialType,
    pub class: StratumClass,
    pub curve: ParametrizedCurve,
    pub free_edge: usize,
    pub free_edge_slope: Slope,
    #[serde(with = "rational::vec_string")]
    pub direction: Vec<Rational>,
    pub positions_constant: bool,
    pub other_lengths_constant: bool,
    pub unbounded: bool,
    /// The ray traced by the fiber.
    pub interval: FiberInterval,
}

impl TerminalWitness {
    pub fn is_valid(&self) -> bool {
        self.free_edge_slope.is_zero() && self.positions_constant && self.other_lengths_constant && self.unbounded
    }
}

#[derive(Clone, Debug)]
pub enum Advance {
    Wall(WallEvent),
    Terminal(TerminalWitness),
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub from: StateSummary,
    pub event: WallEvent,
    pub choice: CrossChoice,
    pub to: StateSummary,
}

#[derive(Clone, Debug, Serialize)]
pub struct WalkTrace {
    pub d: u32,
    pub g: u32,
    pub seed: u64,
    pub solution_index: usize,
    pub solution_count: usize,
    /// 1-based index of the point on the top elevator that is released.
    pub mobile_point: usize,
    pub points: PointConfiguration,
    pub start: StateSummary,
    pub steps: Vec<TraceStep>,
    pub terminal: TerminalWitness,
    pub descent: Vec<(usize, usize)>,
    pub crossings: usize,
    pub bound: usize,
}

impl WalkTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    /// Strict lexicographic decrease of the recorded `(k, r)`.
    pub fn descends(&self) -> bool {
        self.descent.windows(2).all(|w| w[1] < w[0])
    }
}

fn walk_err(msg: impl Into<String>) -> Error {
    Error::Walk(msg.into())
}

fn vertical(s: Slope) -> bool {
    s.0 == 0 && s.1 != 0
}

fn germ_end(t: &CombinatorialType, g: Germ) -> Option<usize> {
    match g {
        Germ::Edge { edge, tail } => {
            let (a, b) = t.graph.edge(edge);
            Some(if tail { b } else { a })
        }
        Germ::Leg(_) => None,
    }
}

fn top_vertices(dec: &Decomposition) -> Result<&[usize]> {
    dec.floors.last().map(|f| f.vertices.as_slice()).ok_or_else(|| walk_err("curve has no floors"))
}

/// The vertical edge with exactly one end on the top floor.
fn find_elevator(c: &ParametrizedCurve, dec: &Decomposition) -> Result<usize> {
    let top = top_vertices(dec)?;
    let t = &c.ty;
    let found: Vec<usize> = (0..t.graph.edge_count())
        .filter(|&e| {
            let (a, b) = t.graph.edge(e);
            vertical(t.edge_slope(e)) && (top.contains(&a) != top.contains(&b))
        })
        .collect();
    match found[..] {
        [e] => Ok(e),
        _ => Err(walk_err(format!("expected one elevator at the top floor, found {}", found.len()))),
    }
}

fn lower_end(c: &ParametrizedCurve, e: usize) -> usize {
    let (a, b) = c.ty.graph.edge(e);
    if c.position(a).y < c.position(b).y {
        a
    } else {
        b
    }
}

/// `x` coordinates of downward elevators leaving floor `k`.
fn downward_elevators(c: &ParametrizedCurve, dec: &Decomposition, k: usize) -> Vec<Rational> {
    let t = &c.ty;
    let mut out = Vec::new();
    for &v in &dec.floors[k - 1].vertices {
        for g in t.graph.star(v) {
            let s = t.germ_slope(g);
            if vertical(s) && s.1 < 0 {
                out.push(c.position(v).x.clone());
            }
        }
    }
    out
}

/// Nearest of `xs` to `x`; ties go to the right.
fn nearest(x: &Rational, xs: &[Rational]) -> Option<Rational> {
    xs.iter()
        .min_by(|a, b| {
            let da = (*a - x).abs();
            let db = (*b - x).abs();
            da.cmp(&db).then_with(|| b.cmp(a))
        })
        .cloned()
}

fn sign(q: &Rational) -> i8 {
    match q.cmp(&Rational::zero()) {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    }
}

/// `(k, r)` and the special points between `E` and the nearest downward
/// elevator of its floor.
pub fn ladder(c: &ParametrizedCurve) -> Result<Ladder> {
    let dec = floorplan::decompose(c)?;
    let d = dec.floors.len();
    let e = find_elevator(c, &dec)?;
    let w = lower_end(c, e);
    let k = dec.floor_of(w).ok_or_else(|| walk_err("the mobile elevator does not end on a floor"))?;
    if k >= d {
        return Err(walk_err("the mobile elevator ends on the top floor"));
    }
    let x = c.position(w).x.clone();
    let downs = downward_elevators(c, &dec, k);
    let xp = nearest(&x, &downs).ok_or_else(|| walk_err(format!("floor F{k} has no downward elevator")))?;
    let dir = sign(&(&xp - &x));
    if dir == 0 {
        return Err(walk_err("the mobile elevator sits on a downward elevator"));
    }
    let between = |z: &Rational| if dir > 0 { *z > x && *z <= xp } else { *z < x && *z >= xp };
    let mut pts: Vec<Rational> =
        dec.floors[k - 1].vertices.iter().filter(|&&v| v != w).map(|&v| c.position(v).x.clone()).filter(between).collect();
    pts.sort();
    if dir < 0 {
        pts.reverse();
    }
    if pts.windows(2).any(|p| p[0] == p[1]) {
        return Err(walk_err("two special points share an x-coordinate"));
    }
    let r = pts.len();
    let mut points = vec![x.clone()];
    points.extend(pts);

    // the marked point of the top floor stays outside [x, x']
    let (lo, hi) = if x < xp { (&x, &xp) } else { (&xp, &x) };
    for &l in &dec.floors[d - 1].marks {
        let mx = &c.position(c.ty.graph.leg(l)).x;
        if mx >= lo && mx <= hi {
            return Err(walk_err("the top floor's marked point lies between x and x'"));
        }
    }
    Ok(Ladder { k, r, points, dir })
}

/// `Σ k · (number of special points of F_k)`.
fn step_bound(c: &ParametrizedCurve) -> Result<usize> {
    let dec = floorplan::decompose(c)?;
    Ok(dec.floors.iter().enumerate().map(|(i, f)| (i + 1) * f.vertices.len()).sum())
}

fn interval_of(t: &CombinatorialType, fixed: &PointConfiguration) -> Result<FiberInterval> {
    match evalmap::fiber(t, fixed)? {
        FiberDescription::Interval(i) => Ok(i),
        other => Err(walk_err(format!("fiber of a nice stratum is not an interval: dimension {:?}", other.dimension()))),
    }
}

/// Vertices whose position changes along the interval.
fn moving_vertices(iv: &FiberInterval, nv: usize) -> Vec<usize> {
    (0..nv).filter(|&v| !iv.direction[2 * v].is_zero() || !iv.direction[2 * v + 1].is_zero()).collect()
}

/// Starts the walk from solution number `seed mod count` through `cfg`.
/// Preconditions shared by every walk; returns the stretched solutions.
fn walk_solutions(d: u32, g: u32, cfg: &StretchedConfig) -> Result<Vec<ParametrizedCurve>> {
    if d < 2 {
        return Err(Error::Unsupported("the walk needs a floor below the top floor, so d >= 2".into()));
    }
    if g > floorplan::max_genus(d) {
        return Err(Error::Invalid(format!("no curves of degree {d} and genus {g}")));
    }
    let n = floorplan::point_count(d, g);
    if cfg.points.len() != n {
        return Err(Error::Mismatch(format!("{} points given, {n} required", cfg.points.len())));
    }
    if !floorplan::is_vertically_stretched(cfg.points.points(), &cfg.lambda) {
        return Err(walk_err("configuration is not vertically stretched"));
    }
    let sols = floorplan::enumerate_curves(d, g, cfg)?;
    if sols.is_empty() {
        return Err(walk_err("no floor decomposed solution through the configuration"));
    }
    Ok(sols)
}

pub fn start_walk(d: u32, g: u32, cfg: &StretchedConfig, seed: u64) -> Result<(WalkState, usize, usize, usize)> {
    let sols = walk_solutions(d, g, cfg)?;
    let index = (seed % sols.len() as u64) as usize;
    let (state, mobile) = start_from(&sols[index], cfg)?;
    Ok((state, index, sols.len(), mobile))
}

/// Releases the mark on the top elevator of `sol`.
fn start_from(sol: &ParametrizedCurve, cfg: &StretchedConfig) -> Result<(WalkState, usize)> {
    let dec = floorplan::decompose(sol)?;
    if !dec.violations.is_empty() {
        return Err(walk_err(format!("solution violates floor invariants: {:?}", dec.violations)));
    }
    let top = floorplan::End::Floor(dec.floors.len());
    let e = dec
        .elevators
        .iter()
        .find(|e| e.upper() == top)
        .ok_or_else(|| walk_err("no elevator at the top floor"))?;
    if e.weight != 1 {
        return Err(walk_err(format!("top elevator has weight {}", e.weight)));
    }
    let mark = e.marks[0];
    let curve = sol.forget_leg(mark)?;
    let fixed = cfg.points.without(mark);
    let class = moduli::classify(&curve.ty)?;
    if class != StratumClass::Nice {
        return Err(walk_err(format!("starting stratum is {class:?}")));
    }
    let dec = floorplan::decompose(&curve)?;
    let elevator = find_elevator(&curve, &dec)?;
    let l = ladder(&curve)?;
    let bound = step_bound(&curve)?;
    let state = WalkState {
        curve,
        class,
        phase: Phase::Slide,
        elevator,
        descent: vec![(l.k, l.r)],
        ladder: Some(l),
        fixed,
        entered_through: None,
        crossings: 0,
        bound,
        pending: None,
    };
    Ok((state, mark + 1))
}

/// Moves to the far end of the current fiber interval.
pub fn advance(mut state: WalkState) -> Result<(WalkState, Advance)> {
    if state.pending.is_some() {
        return Err(walk_err("already at a wall; cross it first"));
    }
    let t = state.curve.ty.clone();
    let iv = interval_of(&t, &state.fixed)?;
    let nv = t.graph.vertex_count();

    // which end is the one we came through
    let near = |end: &IntervalEnd| match (end.endpoint(), state.entered_through) {
        (Some(p), Some(e)) => p.vanished.contains(&e),
        _ => false,
    };
    let far: &IntervalEnd = match state.entered_through {
        Some(_) => {
            let [a, b] = iv.ends();
            match (near(a), near(b)) {
                (true, false) => b,
                (false, true) => a,
                _ => return Err(walk_err("cannot tell which end of the interval was entered")),
            }
        }
        None => {
            let l = state.ladder.as_ref().ok_or_else(|| walk_err("initial state without ladder"))?;
            let w = lower_end(&state.curve, state.elevator);
            let dx = &iv.direction[2 * w];
            // the upper end moves along +direction
            if sign(dx) == l.dir {
                &iv.upper
            } else if sign(dx) == -l.dir {
                &iv.lower
            } else {
                return Err(walk_err("the mobile elevator does not move along the fiber"));
            }
        }
    };

    let Some(end) = far.endpoint() else {
        let w = terminal_witness(&t, &iv, state.entered_through, &state.class)?;
        if !w.is_valid() {
            return Err(walk_err("unbounded fiber without a free contracted edge"));
        }
        return Ok((state, Advance::Terminal(w)));
    };

    // only the floors in play move
    let dec = floorplan::decompose(&iv.sample)?;
    let moving = moving_vertices(&iv, nv);
    match state.phase {
        Phase::Slide => {
            let k = state.ladder.as_ref().map(|l| l.k).unwrap_or(0);
            let d = dec.floors.len();
            if let Some(&v) = moving.iter().find(|&&v| !matches!(dec.floor_of(v), Some(f) if f == k || f == d)) {
                return Err(walk_err(format!("vertex {v} off the floors F{k}, F{d} moves")));
            }
        }
        _ => {
            if let Some(&v) = moving.iter().find(|&&v| dec.floor_of(v).is_some()) {
                return Err(walk_err(format!("floor vertex {v} moves while the junction descends")));
            }
        }
    }

    if end.vanished.len() != 1 {
        return Err(walk_err(format!("{} edges vanish at once", end.vanished.len())));
    }
    let wall = end.degenerate.clone();
    let class = moduli::classify(&wall.ty)?;
    let StratumClass::SimpleWall { vertex: u } = class else {
        return Err(walk_err(format!("interval ends on a {class:?} stratum")));
    };
    let pending = analyse_wall(&state, &wall, u, end.parameter.clone())?;
    let event = pending.event.clone();
    state.curve = wall;
    state.class = class;
    state.pending = Some(pending);
    Ok((state, Advance::Wall(event)))
}

fn analyse_wall(state: &WalkState, wall: &ParametrizedCurve, u: usize, parameter: Rational) -> Result<Pending> {
    let t = &wall.ty;
    let dec = floorplan::decompose(wall)?;
    let top = top_vertices(&dec)?.to_vec();
    let star = t.graph.star(u);
    let e_germ = *star
        .iter()
        .find(|&&g| germ_end(t, g).is_some_and(|w| top.contains(&w)) && vertical(t.germ_slope(g)))
        .ok_or_else(|| walk_err("mobile elevator not at the four-valent vertex"))?;
    let others: Vec<Germ> = star.iter().copied().filter(|&g| g != e_germ).collect();
    let floor_germs: Vec<Germ> = others.iter().copied().filter(|&g| t.germ_slope(g).0 != 0).collect();
    let rest: Vec<Germ> = others.iter().copied().filter(|&g| t.germ_slope(g).0 == 0).collect();
    let is_mark = |g: Germ| matches!(g, Germ::Leg(_)) && t.germ_slope(g).is_zero();
    let floor_germ_towards = |dir: i8| -> Result<Germ> {
        floor_germs
            .iter()
            .copied()
            .find(|&g| sign(&rational::int(t.germ_slope(g).0)) == dir)
            .ok_or_else(|| walk_err("no floor germ on the required side"))
    };

    let (kind, partner, choice, weight, floor) = match state.phase {
        Phase::Slide => {
            let l = state.ladder.as_ref().ok_or_else(|| walk_err("sliding without ladder"))?;
            if floor_germs.len() != 2 || rest.len() != 1 {
                return Err(walk_err("slide wall is not elevator on a floor vertex"));
            }
            let v = rest[0];
            let s = t.germ_slope(v);
            if is_mark(v) || s.1 > 0 {
                if l.r <= 1 {
                    return Err(walk_err("met a special point other than x' with r = 1"));
                }
                let kind = if is_mark(v) { EventKind::ElevatorMeetsMarkedPoint } else { EventKind::ElevatorMeetsElevator };
                (kind, floor_germ_towards(l.dir)?, CrossChoice::ContinuePast, 0, None)
            } else {
                if l.r != 1 {
                    return Err(walk_err(format!("met a downward elevator with r = {}", l.r)));
                }
                (EventKind::ElevatorMeetsElevator, v, CrossChoice::Merge, -s.1, None)
            }
        }
        Phase::Merged { weight } => {
            let marks: Vec<Germ> = rest.iter().copied().filter(|&g| is_mark(g)).collect();
            let down: Vec<Germ> = rest.iter().copied().filter(|&g| t.germ_slope(g).1 < 0).collect();
            if !floor_germs.is_empty() || marks.len() != 1 || down.len() != 1 {
                return Err(walk_err("junction wall is not elevator, elevator, marked point, elevator"));
            }
            if t.germ_slope(down[0]) != Slope(0, -weight) {
                return Err(walk_err("lower elevator weight changed at the marked point"));
            }
            (EventKind::ElevatorMeetsMarkedPoint, down[0], CrossChoice::Descend, weight, None)
        }
        Phase::Descended => {
            if floor_germs.len() != 2 || rest.len() != 1 {
                return Err(walk_err("descent wall is not a floor vertex"));
            }
            let k = dec.floor_of(u).ok_or_else(|| walk_err("descent wall off the floors"))?;
            let x = wall.position(u).x.clone();
            let downs = downward_elevators(wall, &dec, k);
            let xp = nearest(&x, &downs).ok_or_else(|| walk_err(format!("floor F{k} has no downward elevator")))?;
            let dir = sign(&(&xp - &x));
            if dir == 0 {
                return Err(walk_err("descent lands on a downward elevator"));
            }
            (EventKind::ElevatorMeetsFloorVertex, floor_germ_towards(dir)?, CrossChoice::Reattach, 0, Some(k))
        }
    };
    let resolutions = moduli::resolve_wall(t, u)?.to_vec();
    Ok(Pending {
        event: WallEvent {
            kind,
            wall_type: t.clone(),
            wall_curve: wall.clone(),
            vertex: u,
            parameter,
            elevator: e_germ,
            partner,
            resolutions,
        },
        choice,
        weight,
        floor,
    })
}

fn pair_eq(a: [Germ; 2], b: [Germ; 2]) -> bool {
    (a[0] == b[0] && a[1] == b[1]) || (a[0] == b[1] && a[1] == b[0])
}

/// Crosses the current wall into the stratum selected by `choice`.
pub fn cross(mut state: WalkState, event: &WallEvent, choice: CrossChoice) -> Result<WalkState> {
    let pending = state.pending.take().ok_or_else(|| walk_err("not at a wall"))?;
    if pending.event.wall_type != event.wall_type || pending.event.vertex != event.vertex {
        return Err(walk_err("event does not match the current wall"));
    }
    if choice != pending.choice {
        return Err(walk_err(format!("choice {choice:?} contradicts the case analysis, which gives {:?}", pending.choice)));
    }
    let ev = &pending.event;
    let want = [ev.elevator, ev.partner];
    let target = ev
        .resolutions
        .iter()
        .find(|r| pair_eq(r.moved, want) || pair_eq(r.stay, want))
        .ok_or_else(|| walk_err("no resolution groups the elevator with its partner"))?
        .clone();

    let prev_slide = state.ladder.clone();
    let ty = target.ty.clone();
    let iv = interval_of(&ty, &state.fixed)?;
    let at_wall = iv.ends().iter().any(|e| e.endpoint().is_some_and(|p| p.vanished == vec![target.new_edge]));
    if !at_wall {
        return Err(walk_err("the chosen stratum does not touch the wall"));
    }
    let sample = iv.sample.clone();
    let dec = floorplan::decompose(&sample)?;
    let elevator = find_elevator(&sample, &dec)?;

    state.crossings += 1;
    if state.crossings > state.bound {
        return Err(walk_err(format!("more than {} crossings", state.bound)));
    }
    state.class = moduli::classify(&ty)?;
    state.curve = sample;
    state.elevator = elevator;
    state.entered_through = Some(target.new_edge);
    state.phase = match choice {
        CrossChoice::ContinuePast | CrossChoice::Reattach => Phase::Slide,
        CrossChoice::Merge => Phase::Merged { weight: pending.weight },
        CrossChoice::Descend => Phase::Descended,
    };
    if state.class != StratumClass::Nice {
        return Err(walk_err(format!("crossed into a {:?} stratum", state.class)));
    }
    state.ladder = None;
    if state.phase == Phase::Slide {
        let l = ladder(&state.curve)?;
        let last = *state.descent.last().expect("initial (k, r)");
        match choice {
            CrossChoice::ContinuePast => {
                let old = prev_slide.ok_or_else(|| walk_err("continued without a ladder"))?;
                if (l.k, l.r) != (old.k, old.r - 1) {
                    return Err(walk_err(format!("expected ({}, {}) after passing, got ({}, {})", old.k, old.r - 1, l.k, l.r)));
                }
            }
            CrossChoice::Reattach => {
                if Some(l.k) != pending.floor || l.k >= last.0 {
                    return Err(walk_err(format!("reattached on F{} coming from F{}", l.k, last.0)));
                }
            }
            _ => {}
        }
        if (l.k, l.r) >= last {
            return Err(walk_err(format!("({}, {}) does not descend from {last:?}", l.k, l.r)));
        }
        state.descent.push((l.k, l.r));
        state.ladder = Some(l);
    }
    Ok(state)
}

fn terminal_witness(
    t: &CombinatorialType,
    iv: &FiberInterval,
    entered: Option<usize>,
    class: &StratumClass,
) -> Result<TerminalWitness> {
    let nv = t.graph.vertex_count();
    let ne = t.graph.edge_count();
    let positions_constant = iv.direction[..2 * nv].iter().all(|v| v.is_zero());
    let moving: Vec<usize> = (0..ne).filter(|&e| !iv.direction[2 * nv + e].is_zero()).collect();
    let free_edge = match (moving.as_slice(), entered) {
        ([e], _) => *e,
        (_, Some(e)) => e,
        _ => return Err(walk_err("no free edge in the unbounded fiber")),
    };
    Ok(TerminalWitness {
        ty: t.clone(),
        class: class.clone(),
        curve: iv.sample.clone(),
        free_edge,
        free_edge_slope: t.edge_slope(free_edge),
        direction: iv.direction.clone(),
        positions_constant,
        other_lengths_constant: moving == vec![free_edge],
        unbounded: !iv.is_bounded(),
        interval: iv.clone(),
    })
}

/// Runs the walk to its terminal stratum.
pub fn run_walk(d: u32, g: u32, cfg: &StretchedConfig, seed: u64) -> Result<WalkTrace> {
    let (state, solution_index, solution_count, mobile_point) = start_walk(d, g, cfg, seed)?;
    finish_walk(d, g, cfg, seed, state, (solution_index, solution_count, mobile_point))
}

/// One walk from every stretched solution, in solution order; the seed of
/// each trace is its solution index.
pub fn run_all_walks(d: u32, g: u32, cfg: &StretchedConfig) -> Result<Vec<WalkTrace>> {
    let sols = walk_solutions(d, g, cfg)?;
    let count = sols.len();
    sols.par_iter()
        .enumerate()
        .map(|(i, sol)| {
            let (state, mobile) = start_from(sol, cfg)?;
            finish_walk(d, g, cfg, i as u64, state, (i, count, mobile))
        })
        .collect()
}

fn finish_walk(
    d: u32,
    g: u32,
    cfg: &StretchedConfig,
    seed: u64,
    mut state: WalkState,
    (solution_index, solution_count, mobile_point): (usize, usize, usize),
) -> Result<WalkTrace> {
    let start = state.summary();
    let mut steps = Vec::new();
    loop {
        let from = state.summary();
        let (next, adv) = advance(state)?;
        match adv {
            Advance::Terminal(terminal) => {
                return Ok(WalkTrace {
                    d,
                    g,
                    seed,
                    solution_index,
                    solution_count,
                    mobile_point,
                    points: cfg.points.clone(),
                    start,
                    steps,
                    terminal,
                    descent: next.descent.clone(),
                    crossings: next.crossings,
                    bound: next.bound,
                });
            }
            Advance::Wall(event) => {
                let choice = next.prescribed_choice().expect("at a wall");
                state = cross(next, &event, choice)?;
                steps.push(TraceStep { from, event, choice, to: state.summary() });
            }
        }
    }
}

/// Runs the walk through the standard stretched configuration.
pub fn run_standard_walk(d: u32, g: u32, seed: u64) -> Result<WalkTrace> {
    let cfg = floorplan::make_stretched(floorplan::point_count(d, g), d.max(1))?;
    run_walk(d, g, &cfg, seed)
}

// ------------------------------------------------------------ harmonicity

/// A germ of a one-parameter family at a point of the moduli space: the
/// stratum it enters and its derivative in the base stratum's coordinates.
#[derive(Clone, Debug)]
pub struct StarGerm {
    pub ty: CombinatorialType,
    pub slope: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StarVerdict {
    Harmonic,
    NotHarmonic {
        #[serde(with = "rational::vec_string")]
        sum: Vec<Rational>,
    },
    LocallySurjective {
        /// For each resolution, a germ entering it.
        witnesses: Vec<usize>,
    },
    NotLocallySurjective {
        missing: Vec<usize>,
    },
    Invalid {
        reason: String,
    },
}

/// Harmonicity when all germs stay in the stratum of `base`; otherwise local
/// combinatorial surjectivity onto the three resolutions of the wall.
pub fn check_harmonic_or_lcs(base: &CombinatorialType, germs: &[StarGerm]) -> StarVerdict {
    if germs.is_empty() {
        return StarVerdict::Invalid { reason: "empty star".into() };
    }
    let inside: Vec<bool> = germs.iter().map(|g| moduli::same_type(&g.ty, base)).collect();
    if inside.iter().all(|&b| b) {
        let dim = germs[0].slope.len();
        if germs.iter().any(|g| g.slope.len() != dim) {
            return StarVerdict::Invalid { reason: "germ slopes of different lengths".into() };
        }
        let mut sum = vec![Rational::zero(); dim];
        for g in germs {
            for (s, v) in sum.iter_mut().zip(&g.slope) {
                *s += v;
            }
        }
        return if sum.iter().all(Zero::is_zero) { StarVerdict::Harmonic } else { StarVerdict::NotHarmonic { sum } };
    }
    let u = match moduli::classify(base) {
        Ok(StratumClass::SimpleWall { vertex }) => vertex,
        Ok(c) => return StarVerdict::Invalid { reason: format!("family leaves a {c:?} stratum") },
        Err(e) => return StarVerdict::Invalid { reason: e.to_string() },
    };
    let res = match moduli::resolve_wall(base, u) {
        Ok(r) => r,
        Err(e) => return StarVerdict::Invalid { reason: e.to_string() },
    };
    let mut witnesses = Vec::new();
    let mut missing = Vec::new();
    for (i, r) in res.iter().enumerate() {
        match germs.iter().position(|g| moduli::same_type(&g.ty, &r.ty)) {
            Some(j) => witnesses.push(j),
            None => missing.push(i),
        }
    }
    if missing.is_empty() {
        StarVerdict::LocallySurjective { witnesses }
    } else {
        StarVerdict::NotLocallySurjective { missing }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tropgraph::star_type;

    #[test]
    fn conic_walk() {
        let tr = run_standard_walk(2, 0, 0).unwrap();
        assert_eq!(tr.start.ladder.as_ref().unwrap().k, 1);
        assert!(tr.terminal.is_valid());
        assert!(tr.descends());
        assert!(tr.steps.len() <= 3);
    }

    #[test]
    fn line_has_no_walk() {
        assert!(matches!(run_standard_walk(1, 0, 0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn unstretched_rejected() {
        let mut cfg = floorplan::make_stretched(5, 2).unwrap();
        cfg.lambda = cfg.mu.clone().unwrap() * rational::int(2);
        assert!(start_walk(2, 0, &cfg, 0).is_err());
    }

    #[test]
    fn wrong_choice_rejected() {
        let cfg = floorplan::make_stretched(5, 2).unwrap();
        let (s, ..) = start_walk(2, 0, &cfg, 0).unwrap();
        let (s, adv) = advance(s).unwrap();
        let Advance::Wall(ev) = adv else { panic!("terminal at once") };
        let good = s.prescribed_choice().unwrap();
        let bad = if good == CrossChoice::Merge { CrossChoice::ContinuePast } else { CrossChoice::Merge };
        assert!(cross(s.clone(), &ev, bad).is_err());
        assert!(cross(s, &ev, good).is_ok());
    }

    #[test]
    fn harmonic_and_surjective() {
        let t = star_type(&[Slope(1, 1), Slope(-1, 0), Slope(0, -1)]);
        let a = StarGerm { ty: t.clone(), slope: vec![rational::int(1), rational::int(-2)] };
        let b = StarGerm { ty: t.clone(), slope: vec![rational::int(-1), rational::int(2)] };
        assert_eq!(check_harmonic_or_lcs(&t, &[a.clone(), b]), StarVerdict::Harmonic);
        assert!(matches!(check_harmonic_or_lcs(&t, &[a.clone(), a]), StarVerdict::NotHarmonic { .. }));

        let wall = star_type(&[Slope(1, 1), Slope(-1, 0), Slope(0, -1), Slope::ZERO]);
        let rs = moduli::resolve_wall(&wall, 0).unwrap();
        let germs: Vec<StarGerm> = rs.iter().map(|r| StarGerm { ty: r.ty.clone(), slope: vec![] }).collect();
        assert!(matches!(check_harmonic_or_lcs(&wall, &germs), StarVerdict::LocallySurjective { .. }));
        assert_eq!(
            check_harmonic_or_lcs(&wall, &germs[..2]),
            StarVerdict::NotLocallySurjective { missing: vec![2] }
        );
    }

    #[test]
    fn all_walks_match_single_walks() {
        let cfg = floorplan::make_stretched(floorplan::point_count(3, 0), 3).unwrap();
        let all = run_all_walks(3, 0, &cfg).unwrap();
        assert_eq!(all.len(), all[0].solution_count);
        for t in all.iter().step_by(5) {
            let one = run_walk(3, 0, &cfg, t.seed).unwrap();
            assert_eq!(one.to_json(), t.to_json());
        }
    }

    #[test]
    fn marked_point_wall_has_three_nice_neighbours() {
        let t = run_standard_walk(3, 1, 0).unwrap();
        let step = t.steps.iter().find(|s| s.event.kind == EventKind::ElevatorMeetsMarkedPoint).expect("such a wall");
        assert_eq!(step.event.resolutions.len(), 3);
        for r in &step.event.resolutions {
            assert_eq!(moduli::classify(&r.ty).unwrap(), StratumClass::Nice);
        }
    }
}
