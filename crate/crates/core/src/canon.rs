//! Canonical labeling of combinatorial types by colour refinement with
//! individualization, and the order of the automorphism group.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::tropgraph::{CombinatorialType, Graph, Slope};

/// Relabeling-invariant encoding of a combinatorial type. Legs keep their
/// order; vertices are renumbered.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CanonicalForm {
    pub weights: Vec<u32>,
    /// `(tail, head, slope)` with `tail <= head`, sorted.
    pub edges: Vec<(usize, usize, Slope)>,
    pub legs: Vec<(usize, Slope)>,
}

impl CanonicalForm {
    pub fn to_type(&self) -> CombinatorialType {
        let g = Graph::new(
            self.weights.clone(),
            self.edges.iter().map(|&(a, b, _)| (a, b)).collect(),
            self.legs.iter().map(|&(v, _)| v).collect(),
        )
        .expect("canonical form of a connected graph");
        CombinatorialType::new(
            g,
            self.edges.iter().map(|e| e.2).collect(),
            self.legs.iter().map(|l| l.1).collect(),
        )
        .expect("canonical form of a valid type")
    }
}

fn encode(t: &CombinatorialType, perm: &[usize]) -> CanonicalForm {
    let g = &t.graph;
    let mut weights = vec![0; g.vertex_count()];
    for v in 0..g.vertex_count() {
        weights[perm[v]] = g.weight(v);
    }
    let mut edges: Vec<(usize, usize, Slope)> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(a, b))| {
            let (pa, pb, s) = (perm[a], perm[b], t.edge_slope(e));
            if pa <= pb {
                (pa, pb, s)
            } else {
                (pb, pa, -s)
            }
        })
        .collect();
    edges.sort();
    let legs = g.legs().iter().enumerate().map(|(l, &v)| (perm[v], t.leg_slope(l))).collect();
    CanonicalForm { weights, edges, legs }
}

struct Refiner<'a> {
    t: &'a CombinatorialType,
    /// per vertex: (neighbour, slope leaving this vertex)
    adj: Vec<Vec<(usize, Slope)>>,
}

impl<'a> Refiner<'a> {
    fn new(t: &'a CombinatorialType) -> Self {
        let g = &t.graph;
        let mut adj = vec![Vec::new(); g.vertex_count()];
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            let s = t.edge_slope(e);
            adj[a].push((b, s));
            adj[b].push((a, -s));
        }
        Refiner { t, adj }
    }

    fn initial(&self) -> Vec<usize> {
        let g = &self.t.graph;
        let sigs: Vec<(u32, Vec<(usize, Slope)>)> = (0..g.vertex_count())
            .map(|v| {
                let legs = g
                    .legs()
                    .iter()
                    .enumerate()
                    .filter(|&(_, &a)| a == v)
                    .map(|(l, _)| (l, self.t.leg_slope(l)))
                    .collect();
                (g.weight(v), legs)
            })
            .collect();
        rank(&sigs)
    }

    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        loop {
            let classes = count_classes(&colors);
            let sigs: Vec<(usize, Vec<(usize, Slope)>)> = (0..colors.len())
                .map(|v| {
                    let mut n: Vec<(usize, Slope)> = self.adj[v].iter().map(|&(w, s)| (colors[w], s)).collect();
                    n.sort();
                    (colors[v], n)
                })
                .collect();
            let next = rank(&sigs);
            if count_classes(&next) == classes {
                return next;
            }
            colors = next;
        }
    }
}

fn rank<T: Ord + Clone>(sigs: &[T]) -> Vec<usize> {
    let mut sorted: Vec<T> = sigs.to_vec();
    sorted.sort();
    sorted.dedup();
    let index: BTreeMap<&T, usize> = sorted.iter().enumerate().map(|(i, s)| (s, i)).collect();
    sigs.iter().map(|s| index[s]).collect()
}

fn count_classes(c: &[usize]) -> usize {
    let mut v = c.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

struct Search<'a> {
    refiner: Refiner<'a>,
    best: Option<(CanonicalForm, Vec<usize>)>,
    best_count: u64,
}

impl Search<'_> {
    fn run(&mut self, colors: Vec<usize>) {
        let colors = self.refiner.refine(colors);
        let n = colors.len();
        if count_classes(&colors) == n {
            let form = encode(self.refiner.t, &colors);
            match &self.best {
                Some((b, _)) if form > *b => {}
                Some((b, _)) if form == *b => self.best_count += 1,
                _ => {
                    self.best = Some((form, colors));
                    self.best_count = 1;
                }
            }
            return;
        }
        let mut sizes: HashMap<usize, usize> = HashMap::new();
        for &c in &colors {
            *sizes.entry(c).or_default() += 1;
        }
        let target = (0..n).map(|v| colors[v]).filter(|c| sizes[c] > 1).min().expect("non-discrete");
        for v in (0..n).filter(|&v| colors[v] == target) {
            let mut c2: Vec<usize> = colors.iter().map(|&c| 2 * c + 1).collect();
            c2[v] = 2 * target;
            self.run(rank(&c2));
        }
    }
}

fn search(t: &CombinatorialType) -> Search<'_> {
    let refiner = Refiner::new(t);
    let init = refiner.initial();
    let mut s = Search { refiner, best: None, best_count: 0 };
    s.run(init);
    s
}

/// Canonical form and the relabeling `old vertex -> new vertex` realizing it.
pub fn canonical_form(t: &CombinatorialType) -> (CanonicalForm, Vec<usize>) {
    let s = search(t);
    s.best.expect("at least one leaf")
}

pub fn canonical_type(t: &CombinatorialType) -> CombinatorialType {
    canonical_form(t).0.to_type()
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// `|Aut(Θ)|`: vertex permutations preserving everything, times the
/// permutations of parallel identical edges, times two for each loop.
pub fn aut_order(t: &CombinatorialType) -> u64 {
    let s = search(t);
    let vertex_autos = s.best_count;
    let (form, _) = s.best.expect("leaf");
    let mut classes: HashMap<(usize, usize, Slope), usize> = HashMap::new();
    for &e in &form.edges {
        *classes.entry(e).or_default() += 1;
    }
    let parallel: u64 = classes.values().map(|&m| factorial(m)).product();
    let loops = form.edges.iter().filter(|e| e.0 == e.1).count() as u32;
    vertex_autos * parallel * 2u64.pow(loops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tropgraph::star_type;

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, n - 1);
                out.push(q);
            }
        }
        out
    }

    /// Counts pairs (vertex bijection, edge bijection, loop flips) that
    /// preserve weights, incidences, slopes and legs.
    fn brute_force_aut(t: &CombinatorialType) -> u64 {
        let g = &t.graph;
        let (nv, ne) = (g.vertex_count(), g.edge_count());
        let loops: Vec<usize> = (0..ne).filter(|&e| g.is_loop(e)).collect();
        let mut count = 0;
        for pv in permutations(nv) {
            if (0..nv).any(|v| g.weight(v) != g.weight(pv[v])) {
                continue;
            }
            if g.legs().iter().any(|&v| pv[v] != v) {
                continue;
            }
            for pe in permutations(ne) {
                for flips in 0..(1u32 << loops.len()) {
                    let ok = (0..ne).all(|e| {
                        let (a, b) = g.edge(e);
                        let (c, d) = g.edge(pe[e]);
                        let s = t.edge_slope(e);
                        let s2 = t.edge_slope(pe[e]);
                        if a == b {
                            return c == d && pv[a] == c && s == s2;
                        }
                        let _ = flips;
                        (pv[a] == c && pv[b] == d && s == s2) || (pv[a] == d && pv[b] == c && s == -s2)
                    });
                    if ok {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    fn theta() -> CombinatorialType {
        let g = Graph::new(vec![0, 0], vec![(0, 1); 3], vec![]).unwrap();
        CombinatorialType::new(g, vec![Slope::ZERO; 3], vec![]).unwrap()
    }

    #[test]
    fn theta_graph() {
        assert_eq!(aut_order(&theta()), 12);
        assert_eq!(brute_force_aut(&theta()), 12);
    }

    #[test]
    fn double_edge() {
        let g = Graph::new(vec![0, 0], vec![(0, 1), (0, 1)], vec![0, 1]).unwrap();
        let t = CombinatorialType::new(g, vec![Slope(0, 1); 2], vec![Slope(0, -2), Slope(0, 2)]).unwrap();
        assert_eq!(aut_order(&t), 2);
        assert_eq!(brute_force_aut(&t), 2);
    }

    #[test]
    fn asymmetric() {
        let t = star_type(&[Slope(1, 1), Slope(-1, 0), Slope(0, -1)]);
        assert_eq!(aut_order(&t), 1);
    }

    #[test]
    fn loops_and_symmetric_cycles() {
        let g = Graph::new(vec![0], vec![(0, 0), (0, 0)], vec![]).unwrap();
        let t = CombinatorialType::new(g, vec![Slope::ZERO; 2], vec![]).unwrap();
        assert_eq!(aut_order(&t), 8);
        assert_eq!(brute_force_aut(&t), 8);
        // a 4-cycle of zero slopes: dihedral group of order 8
        let g = Graph::new(vec![0; 4], vec![(0, 1), (1, 2), (2, 3), (3, 0)], vec![]).unwrap();
        let t = CombinatorialType::new(g, vec![Slope::ZERO; 4], vec![]).unwrap();
        assert_eq!(aut_order(&t), 8);
        assert_eq!(brute_force_aut(&t), 8);
    }

    #[test]
    fn relabeling_invariance() {
        let g = Graph::new(vec![0, 0, 1], vec![(0, 1), (1, 2), (2, 0)], vec![0, 1]).unwrap();
        let t = CombinatorialType::new(g, vec![Slope(1, 0), Slope(0, 1), Slope(-1, -1)], vec![Slope::ZERO, Slope::ZERO])
            .unwrap();
        let g2 = Graph::new(vec![1, 0, 0], vec![(2, 1), (1, 0), (0, 2)], vec![2, 1]).unwrap();
        let t2 = CombinatorialType::new(g2, vec![Slope(1, 0), Slope(0, 1), Slope(-1, -1)], vec![Slope::ZERO, Slope::ZERO])
            .unwrap();
        assert_eq!(canonical_form(&t).0, canonical_form(&t2).0);
        assert_eq!(aut_order(&t), brute_force_aut(&t));
    }
}
