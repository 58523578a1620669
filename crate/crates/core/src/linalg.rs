//! Exact linear algebra over the rationals: row reduction, kernels, affine
//! solution sets and a small simplex solver.

use num::{One, Signed, Zero};

use crate::rational::Rational;

pub type Matrix = Vec<Vec<Rational>>;

pub fn from_ints(rows: &[Vec<i64>]) -> Matrix {
    rows.iter().map(|r| r.iter().map(|&v| Rational::from_integer(v.into())).collect()).collect()
}

/// Reduced row echelon form in place. Returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r][c..].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Basis of `{x : m x = 0}`; `cols` is needed when `m` has no rows.
pub fn nullspace(m: &Matrix, cols: usize) -> Vec<Vec<Rational>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -a[i][f].clone();
            }
            v
        })
        .collect()
}

/// `{x : m x = b}` as a particular solution plus a kernel basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSpace {
    pub point: Vec<Rational>,
    pub directions: Vec<Vec<Rational>>,
}

impl AffineSpace {
    pub fn dimension(&self) -> usize {
        self.directions.len()
    }

    pub fn at(&self, coeffs: &[Rational]) -> Vec<Rational> {
        let mut p = self.point.clone();
        for (c, d) in coeffs.iter().zip(&self.directions) {
            for (x, y) in p.iter_mut().zip(d) {
                *x += c * y;
            }
        }
        p
    }
}

pub fn solve_affine(m: &Matrix, b: &[Rational], cols: usize) -> Option<AffineSpace> {
    let mut aug: Matrix = m
        .iter()
        .zip(b)
        .map(|(row, v)| {
            let mut r = row.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut point = vec![Rational::zero(); cols];
    for (i, &p) in pivots.iter().enumerate() {
        point[p] = aug[i][cols].clone();
    }
    Some(AffineSpace { point, directions: nullspace(m, cols) })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Unbounded,
    Infeasible,
}

/// Maximize `c·y` over free variables `y` subject to `g y <= h`.
///
/// Dense two-phase simplex with Bland's rule. Problems here have at most a
/// few dozen variables, so exactness matters more than speed.
pub fn maximize(c: &[Rational], g: &Matrix, h: &[Rational]) -> LpOutcome {
    let k = c.len();
    let m = g.len();
    // columns: y+ (k), y- (k), slack (m), artificial (one per negative row)
    let neg_rows: Vec<usize> = (0..m).filter(|&i| h[i].is_negative()).collect();
    let n_art = neg_rows.len();
    let width = 2 * k + m + n_art;
    let mut t: Matrix = Vec::with_capacity(m);
    let mut basis = vec![0usize; m];
    let mut art_of_row = vec![None; m];
    for (a, &i) in neg_rows.iter().enumerate() {
        art_of_row[i] = Some(a);
    }
    for i in 0..m {
        let sign = if h[i].is_negative() { -Rational::one() } else { Rational::one() };
        let mut row = vec![Rational::zero(); width + 1];
        for j in 0..k {
            row[j] = &sign * &g[i][j];
            row[k + j] = -&sign * &g[i][j];
        }
        row[2 * k + i] = sign.clone();
        row[width] = &sign * &h[i];
        match art_of_row[i] {
            Some(a) => {
                row[2 * k + m + a] = Rational::one();
                basis[i] = 2 * k + m + a;
            }
            None => basis[i] = 2 * k + i,
        }
        t.push(row);
    }

    if n_art > 0 {
        let mut obj = vec![Rational::zero(); width];
        for a in 0..n_art {
            obj[2 * k + m + a] = -Rational::one();
        }
        match run_simplex(&mut t, &mut basis, &obj, width) {
            Some(v) if v.is_zero() => {}
            _ => return LpOutcome::Infeasible,
        }
        // pivot remaining artificials out of the basis where possible
        for i in 0..m {
            if basis[i] >= 2 * k + m {
                if let Some(j) = (0..2 * k + m).find(|&j| !t[i][j].is_zero()) {
                    pivot(&mut t, i, j);
                    basis[i] = j;
                }
            }
        }
        // forbid artificials from re-entering
        for row in t.iter_mut() {
            for a in 0..n_art {
                row[2 * k + m + a] = Rational::zero();
            }
        }
    }

    let mut obj = vec![Rational::zero(); width];
    for j in 0..k {
        obj[j] = c[j].clone();
        obj[k + j] = -c[j].clone();
    }
    match run_simplex(&mut t, &mut basis, &obj, width) {
        None => LpOutcome::Unbounded,
        Some(value) => {
            let mut x = vec![Rational::zero(); width];
            for (i, &b) in basis.iter().enumerate() {
                x[b] = t[i][width].clone();
            }
            let point = (0..k).map(|j| &x[j] - &x[k + j]).collect();
            LpOutcome::Optimal { value, point }
        }
    }
}

fn pivot(t: &mut Matrix, r: usize, c: usize) {
    let inv = t[r][c].recip();
    for v in t[r].iter_mut() {
        *v *= &inv;
    }
    let prow = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r && !row[c].is_zero() {
            let f = row[c].clone();
            for (v, p) in row.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
    }
}

/// Maximizes `obj·x` from a feasible basis; `None` if unbounded.
fn run_simplex(t: &mut Matrix, basis: &mut [usize], obj: &[Rational], width: usize) -> Option<Rational> {
    loop {
        // reduced costs
        let mut entering = None;
        for j in 0..width {
            if basis.contains(&j) {
                continue;
            }
            let mut rc = obj[j].clone();
            for (i, &b) in basis.iter().enumerate() {
                if !t[i][j].is_zero() && !obj[b].is_zero() {
                    rc -= &obj[b] * &t[i][j];
                }
            }
            if rc.is_positive() {
                entering = Some(j);
                break;
            }
        }
        let Some(j) = entering else {
            let mut v = Rational::zero();
            for (i, &b) in basis.iter().enumerate() {
                v += &obj[b] * &t[i][width];
            }
            return Some(v);
        };
        let mut best: Option<(Rational, usize, usize)> = None;
        for i in 0..t.len() {
            if t[i][j].is_positive() {
                let ratio = &t[i][width] / &t[i][j];
                let better = match &best {
                    None => true,
                    Some((r, _, b)) => ratio < *r || (ratio == *r && basis[i] < *b),
                };
                if better {
                    best = Some((ratio, i, basis[i]));
                }
            }
        }
        let (_, r, _) = best?;
        pivot(t, r, j);
        basis[r] = j;
    }
}

/// Finds a point of `{base + Σ z_i dir_i}` whose selected coordinates are all
/// strictly positive, if one exists.
pub fn strictly_positive_point(space: &AffineSpace, coords: &[usize]) -> Option<Vec<Rational>> {
    if coords.is_empty() {
        return Some(space.point.clone());
    }
    let k = space.directions.len();
    if k == 0 {
        return coords.iter().all(|&c| space.point[c].is_positive()).then(|| space.point.clone());
    }
    // variables (z_1..z_k, s): maximize s with  -(base_c + dir·z) + s <= 0,  s <= 1
    let mut g = Vec::new();
    let mut h = Vec::new();
    for &c in coords {
        let mut row: Vec<Rational> = space.directions.iter().map(|d| -d[c].clone()).collect();
        row.push(Rational::one());
        g.push(row);
        h.push(space.point[c].clone());
    }
    let mut cap = vec![Rational::zero(); k];
    cap.push(Rational::one());
    g.push(cap);
    h.push(Rational::one());
    let mut obj = vec![Rational::zero(); k];
    obj.push(Rational::one());
    match maximize(&obj, &g, &h) {
        LpOutcome::Optimal { value, point } if value.is_positive() => Some(space.at(&point[..k])),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn rank_and_kernel() {
        let m = from_ints(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(rank(&m), 2);
        let k = nullspace(&m, 3);
        assert_eq!(k.len(), 1);
        for row in &m {
            let dot: Rational = row.iter().zip(&k[0]).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn affine_inconsistent() {
        let m = from_ints(&[vec![1, 1], vec![1, 1]]);
        assert!(solve_affine(&m, &[int(1), int(2)], 2).is_none());
        let s = solve_affine(&m, &[int(1), int(1)], 2).unwrap();
        assert_eq!(s.dimension(), 1);
    }

    #[test]
    fn simplex_small() {
        // max x + y, x <= 2, y <= 3, x + y <= 4, -x <= -1
        let g = from_ints(&[vec![1, 0], vec![0, 1], vec![1, 1], vec![-1, 0]]);
        let h = vec![int(2), int(3), int(4), int(-1)];
        match maximize(&[int(1), int(1)], &g, &h) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(4)),
            other => panic!("{other:?}"),
        }
        let g = from_ints(&[vec![1], vec![-1]]);
        assert_eq!(maximize(&[int(1)], &g, &[int(1), int(-2)]), LpOutcome::Infeasible);
        let g = from_ints(&[vec![-1]]);
        assert_eq!(maximize(&[int(1)], &g, &[int(0)]), LpOutcome::Unbounded);
    }

    #[test]
    fn positive_point() {
        // line (t, 1 - t): both positive for 0 < t < 1
        let s = AffineSpace { point: vec![int(0), int(1)], directions: vec![vec![int(1), int(-1)]] };
        let p = strictly_positive_point(&s, &[0, 1]).unwrap();
        assert!(p[0].is_positive() && p[1].is_positive());
        let s = AffineSpace { point: vec![int(0), int(0)], directions: vec![vec![int(1), int(-1)]] };
        assert!(strictly_positive_point(&s, &[0, 1]).is_none());
        let s = AffineSpace { point: vec![ratio(1, 2)], directions: vec![] };
        assert!(strictly_positive_point(&s, &[0]).is_some());
    }
}
