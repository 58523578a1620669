//! Markings of nodes of an arrangement of `d` general lines: irreducibility,
//! similarity moves, equivalence classes, branch codimensions and the
//! dimension count of Severi varieties.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `d` accepted by [`equivalence_classes`].
pub const MAX_CLASS_DEGREE: usize = 7;

/// Lines `L_1..L_d`; node `q_{i,j} = L_i ∩ L_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrangement {
    pub d: usize,
}

impl Arrangement {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 || d > 11 {
            return Err(Error::Invalid(format!("need 1 <= d <= 11 lines, got {d}")));
        }
        Ok(Arrangement { d })
    }

    /// All nodes `(i, j)`, `i < j`, in lexicographic order.
    pub fn nodes(&self) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for i in 1..=self.d {
            for j in i + 1..=self.d {
                v.push((i, j));
            }
        }
        v
    }

    pub fn node_count(&self) -> usize {
        self.d * (self.d - 1) / 2
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        // nodes before row i, then offset within the row
        let before: usize = (1..i).map(|a| self.d - a).sum();
        before + (j - i - 1)
    }

    fn bit(&self, i: usize, j: usize) -> u64 {
        1u64 << self.index(i, j)
    }
}

/// An unordered set of nodes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MarkingSet {
    pub d: usize,
    /// Sorted pairs `(i, j)` with `1 <= i < j <= d`.
    pub nodes: Vec<(usize, usize)>,
}

impl MarkingSet {
    pub fn new(d: usize, nodes: Vec<(usize, usize)>) -> Result<Self> {
        let arr = Arrangement::new(d)?;
        let mut norm = Vec::with_capacity(nodes.len());
        for (i, j) in nodes {
            let (i, j) = if i < j { (i, j) } else { (j, i) };
            if i == 0 || j > d || i == j {
                return Err(Error::Invalid(format!("({i}, {j}) is not a node of {d} lines")));
            }
            norm.push((i, j));
        }
        norm.sort_unstable();
        let len = norm.len();
        norm.dedup();
        if norm.len() != len {
            return Err(Error::Invalid("repeated node".into()));
        }
        let _ = arr;
        Ok(MarkingSet { d, nodes: norm })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: MarkingSet = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        MarkingSet::new(m.d, m.nodes)
    }

    pub fn delta(&self) -> usize {
        self.nodes.len()
    }

    fn arrangement(&self) -> Arrangement {
        Arrangement { d: self.d }
    }

    fn mask(&self) -> u64 {
        let a = self.arrangement();
        self.nodes.iter().fold(0, |m, &(i, j)| m | a.bit(i, j))
    }

    fn from_mask(d: usize, mask: u64) -> Self {
        let a = Arrangement { d };
        let nodes = a.nodes().into_iter().filter(|&(i, j)| mask & a.bit(i, j) != 0).collect();
        MarkingSet { d, nodes }
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.nodes.binary_search(&(i, j)).is_ok()
    }

    /// Number of marked nodes on `L_i`.
    pub fn on_line(&self, i: usize) -> usize {
        self.nodes.iter().filter(|&&(a, b)| a == i || b == i).count()
    }
}

fn connected_complement(d: usize, mask: u64) -> bool {
    let a = Arrangement { d };
    let mut seen = vec![false; d + 1];
    let mut stack = vec![1];
    seen[1] = true;
    while let Some(i) = stack.pop() {
        for j in 1..=d {
            if j != i && !seen[j] && mask & a.bit(i, j) == 0 {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen[1..].iter().all(|&s| s)
}

/// The lines stay connected through the unmarked nodes.
pub fn is_irreducible(m: &MarkingSet) -> bool {
    connected_complement(m.d, m.mask())
}

fn moves_of_mask(d: usize, mask: u64) -> BTreeSet<u64> {
    let a = Arrangement { d };
    let mut out = BTreeSet::new();
    for l in 1..=d {
        for l1 in 1..=d {
            if l1 == l || mask & a.bit(l, l1) != 0 {
                continue;
            }
            for l2 in 1..=d {
                if l2 == l || l2 == l1 {
                    continue;
                }
                let q = a.bit(l1, l2);
                let r = a.bit(l, l2);
                let next = match (mask & q != 0, mask & r != 0) {
                    (true, false) | (false, true) => mask ^ q ^ r,
                    _ => mask,
                };
                out.insert(next);
            }
        }
    }
    out
}

/// All markings `μ^τ` for ordered triples `(L, L', L'')` with `L ∩ L'`
/// unmarked and `τ` swapping `L' ∩ L''` and `L ∩ L''`.
pub fn similar_moves(m: &MarkingSet) -> Vec<MarkingSet> {
    moves_of_mask(m.d, m.mask()).into_iter().map(|x| MarkingSet::from_mask(m.d, x)).collect::<BTreeSet<_>>().into_iter().collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkingClass {
    pub irreducible: bool,
    pub markings: Vec<MarkingSet>,
}

fn all_masks(nodes: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    fn rec(start: usize, nodes: usize, k: usize, cur: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(cur);
            return;
        }
        for b in start..nodes {
            if nodes - b < k {
                break;
            }
            rec(b + 1, nodes, k - 1, cur | (1 << b), out);
        }
    }
    rec(0, nodes, k, 0, &mut out);
    out
}

/// Partition of all `δ`-markings into similarity classes, ordered by their
/// smallest member.
pub fn equivalence_classes(d: usize, delta: usize) -> Result<Vec<MarkingClass>> {
    if d > MAX_CLASS_DEGREE {
        return Err(Error::ScaleRefused(format!("d = {d} exceeds {MAX_CLASS_DEGREE}")));
    }
    let arr = Arrangement::new(d)?;
    let n = arr.node_count();
    if delta > n {
        return Ok(Vec::new());
    }
    let masks = all_masks(n, delta);
    let mut class_of: BTreeMap<u64, usize> = BTreeMap::new();
    let mut classes: Vec<Vec<u64>> = Vec::new();
    for &start in &masks {
        if class_of.contains_key(&start) {
            continue;
        }
        let id = classes.len();
        let mut members = vec![start];
        class_of.insert(start, id);
        let mut queue = VecDeque::from([start]);
        while let Some(m) = queue.pop_front() {
            for next in moves_of_mask(d, m) {
                if let std::collections::btree_map::Entry::Vacant(e) = class_of.entry(next) {
                    e.insert(id);
                    members.push(next);
                    queue.push_back(next);
                }
            }
        }
        classes.push(members);
    }
    let mut out: Vec<MarkingClass> = classes
        .into_iter()
        .map(|ms| {
            let mut markings: Vec<MarkingSet> = ms.iter().map(|&m| MarkingSet::from_mask(d, m)).collect();
            markings.sort();
            let irreducible = is_irreducible(&markings[0]);
            MarkingClass { irreducible, markings }
        })
        .collect();
    out.sort_by(|a, b| a.markings[0].cmp(&b.markings[0]));
    Ok(out)
}

pub fn branch_codim(m: &MarkingSet, m2: &MarkingSet) -> Result<usize> {
    if m.d != m2.d {
        return Err(Error::Mismatch(format!("markings of {} and {} lines", m.d, m2.d)));
    }
    if m.delta() != m2.delta() {
        return Err(Error::Mismatch(format!("markings of sizes {} and {}", m.delta(), m2.delta())));
    }
    Ok(m2.nodes.iter().filter(|&&(i, j)| !m.contains(i, j)).count())
}

fn binom2(n: i64) -> i64 {
    if n < 2 {
        0
    } else {
        n * (n - 1) / 2
    }
}

/// No irreducible `δ`-marking exists.
pub fn empty_criterion(d: usize, delta: usize) -> bool {
    delta as i64 > binom2(d as i64 - 1)
}

/// An irreducible `δ`-marking avoiding `L_1`, found by search.
pub fn witness_disjoint_from_first(d: usize, delta: usize) -> Option<MarkingSet> {
    let arr = Arrangement::new(d).ok()?;
    let off: Vec<(usize, usize)> = arr.nodes().into_iter().filter(|&(i, _)| i != 1).collect();
    if delta > off.len() {
        return None;
    }
    // any subset of nodes off L_1 keeps every line joined to L_1
    Some(MarkingSet { d, nodes: off[..delta].to_vec() })
        .filter(is_irreducible)
}

/// The first half of the equivalence argument: moves that push marked
/// nodes off `L_1`, each strictly lowering the count on `L_1`.
pub fn reduce_off_first_line(m: &MarkingSet) -> Result<Vec<MarkingSet>> {
    if !is_irreducible(m) {
        return Err(Error::Invalid("marking is not irreducible".into()));
    }
    let d = m.d;
    let mut cur = m.clone();
    let mut path = vec![cur.clone()];
    while cur.on_line(1) > 0 {
        // C: lines meeting L_1 in a marked node; C': the others
        let in_c: Vec<bool> = (0..=d).map(|i| i > 1 && cur.contains(1, i)).collect();
        let mut step = None;
        'search: for i in 2..=d {
            if !in_c[i] {
                continue;
            }
            for j in 2..=d {
                if j != i && !in_c[j] && !cur.contains(i, j) {
                    step = Some((i, j));
                    break 'search;
                }
            }
        }
        let (i, j) = step.ok_or_else(|| Error::Invalid("no reducing move; marking is reducible".into()))?;
        let mut nodes: Vec<(usize, usize)> = cur.nodes.iter().copied().filter(|&n| n != (1, i)).collect();
        nodes.push(if i < j { (i, j) } else { (j, i) });
        let next = MarkingSet::new(d, nodes)?;
        debug_assert!(similar_moves(&cur).contains(&next));
        if next.on_line(1) >= cur.on_line(1) {
            return Err(Error::Invalid("reduction did not lower the count on L_1".into()));
        }
        cur = next;
        path.push(cur.clone());
    }
    Ok(path)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeveriDimension {
    pub d: u32,
    pub g: i64,
    pub delta: i64,
    pub dimension: i64,
    /// `C(d+2, 2) - 1 - δ`.
    pub decorated: i64,
}

pub fn severi_dim(d: u32, g: i64) -> Result<SeveriDimension> {
    let di = d as i64;
    let max = binom2(di - 1);
    if d == 0 || g < 1 - di || g > max {
        return Err(Error::Invalid(format!("genus {g} out of range [{}, {max}] for degree {d}", 1 - di)));
    }
    let delta = max - g;
    let dimension = 3 * di + g - 1;
    let decorated = (di + 2) * (di + 1) / 2 - 1 - delta;
    if dimension != decorated {
        return Err(Error::Invalid(format!("dimension counts disagree: {dimension} vs {decorated}")));
    }
    Ok(SeveriDimension { d, g, delta, dimension, decorated })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mk(d: usize, n: &[(usize, usize)]) -> MarkingSet {
        MarkingSet::new(d, n.to_vec()).unwrap()
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible(&mk(3, &[(1, 2)])));
        assert!(!is_irreducible(&mk(4, &[(1, 2), (1, 3), (1, 4)])));
        assert!(is_irreducible(&mk(4, &[(1, 2), (3, 4), (1, 3)])));
    }

    #[test]
    fn move_examples() {
        let m = mk(3, &[(1, 2)]);
        let moves = similar_moves(&m);
        assert!(moves.contains(&mk(3, &[(2, 3)])));
        let m = mk(4, &[(1, 2), (1, 3), (2, 3)]);
        for x in similar_moves(&m) {
            assert_eq!(is_irreducible(&x), is_irreducible(&m));
        }
    }

    #[test]
    fn class_examples() {
        let c = equivalence_classes(3, 1).unwrap();
        let irr: Vec<_> = c.iter().filter(|c| c.irreducible).collect();
        assert_eq!(irr.len(), 1);
        assert_eq!(irr[0].markings.len(), 3);
        let c = equivalence_classes(2, 0).unwrap();
        assert_eq!(c.len(), 1);
        assert!(matches!(equivalence_classes(8, 1), Err(Error::ScaleRefused(_))));
    }

    #[test]
    fn codims() {
        let a = mk(4, &[(1, 2), (3, 4)]);
        let b = mk(4, &[(1, 2), (1, 3)]);
        assert_eq!(branch_codim(&a, &a).unwrap(), 0);
        assert_eq!(branch_codim(&a, &b).unwrap(), 1);
        assert_eq!(branch_codim(&a, &mk(4, &[(1, 4), (2, 3)])).unwrap(), 2);
        assert!(branch_codim(&a, &mk(4, &[(1, 2)])).is_err());
    }

    #[test]
    fn emptiness_and_dimension() {
        assert!(empty_criterion(4, 4));
        assert!(!empty_criterion(4, 3));
        assert!(witness_disjoint_from_first(4, 3).is_some());
        assert!(!empty_criterion(1, 0));
        assert_eq!(severi_dim(3, 1).unwrap().dimension, 9);
        assert_eq!(severi_dim(4, 0).unwrap().decorated, 11);
        assert_eq!(severi_dim(1, 0).unwrap().dimension, 2);
        assert!(severi_dim(3, 2).is_err());
    }

    #[test]
    fn reduction_strategy() {
        let m = mk(4, &[(1, 2), (1, 3), (2, 4)]);
        let path = reduce_off_first_line(&m).unwrap();
        assert_eq!(path.last().unwrap().on_line(1), 0);
        assert!(path.windows(2).all(|w| w[1].on_line(1) < w[0].on_line(1)));
    }
}
