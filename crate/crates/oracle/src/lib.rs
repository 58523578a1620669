//! Independent enumerative recursions for plane curves.
//!
//! Two classical routes are provided:
//!
//! * the Caporaso–Harris recursion for Severi degrees `N^{d,δ}(α,β)` of
//!   possibly reducible nodal curves with tangency conditions to a fixed
//!   line, together with the inclusion–exclusion that extracts counts of
//!   irreducible curves of fixed genus;
//! * Kontsevich's recursion for rational curves.
//!
//! Nothing here knows about tropical curves. The crate exists so that the
//! tropical enumeration can be checked against a code path that shares no
//! logic with it.

use std::collections::HashMap;

use num::{BigInt, One, Zero};

/// Tangency profile: entry `k - 1` is the number of contact points of order `k`.
type Profile = Vec<u32>;

fn weight(p: &[u32]) -> u32 {
    p.iter().enumerate().map(|(i, &c)| (i as u32 + 1) * c).sum()
}

fn count(p: &[u32]) -> i64 {
    p.iter().map(|&c| c as i64).sum()
}

fn trim(mut p: Profile) -> Profile {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Memoized Caporaso–Harris recursion.
#[derive(Debug, Default)]
pub struct CaporasoHarris {
    memo: HashMap<(u32, i64, Profile, Profile), BigInt>,
}

impl CaporasoHarris {
    pub fn new() -> Self {
        Self::default()
    }

    /// `N^{d,δ}(α,β)`: reduced degree-`d` curves with `δ` nodes, `α_k` assigned
    /// and `β_k` unassigned points of contact order `k` with a fixed line,
    /// through `2d + g - 1 + |β|` general points where `g = (d-1)(d-2)/2 - δ`.
    pub fn relative(&mut self, d: u32, delta: i64, alpha: &[u32], beta: &[u32]) -> BigInt {
        if delta < 0 || weight(alpha) + weight(beta) != d {
            return BigInt::zero();
        }
        let genus = (d as i64 - 1) * (d as i64 - 2) / 2 - delta;
        let points = 2 * d as i64 + genus - 1 + count(beta);
        if points < 0 {
            return BigInt::zero();
        }
        if d == 0 {
            return if delta == 0 { BigInt::one() } else { BigInt::zero() };
        }
        let key = (d, delta, trim(alpha.to_vec()), trim(beta.to_vec()));
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }

        let len = d as usize;
        let mut a: Profile = alpha.to_vec();
        let mut b: Profile = beta.to_vec();
        a.resize(len, 0);
        b.resize(len, 0);

        let mut total = BigInt::zero();

        // A point specializes onto the line and becomes an assigned contact.
        for k in 0..len {
            if b[k] > 0 {
                let mut a2 = a.clone();
                let mut b2 = b.clone();
                a2[k] += 1;
                b2[k] -= 1;
                total += BigInt::from(k as u64 + 1) * self.relative(d, delta, &a2, &b2);
            }
        }

        // The curve splits off the line itself.
        for a_prime in sub_profiles(&a) {
            let rest = d - 1;
            let used = weight(&a_prime) + weight(&b);
            if used > rest {
                continue;
            }
            for gamma in profiles_of_weight(rest - used, len) {
                let b_prime: Profile = b.iter().zip(&gamma).map(|(x, y)| x + y).collect();
                let delta_prime = delta - (d as i64 - 1) + count(&gamma);
                if delta_prime < 0 {
                    continue;
                }
                let inner = self.relative(d - 1, delta_prime, &a_prime, &b_prime);
                if inner.is_zero() {
                    continue;
                }
                let mut factor = BigInt::one();
                for k in 0..len {
                    factor *= BigInt::from(k as u64 + 1).pow(gamma[k]);
                    factor *= binomial(a[k] as u64, a_prime[k] as u64);
                    factor *= binomial(b_prime[k] as u64, b[k] as u64);
                }
                total += factor * inner;
            }
        }

        self.memo.insert(key, total.clone());
        total
    }

    /// Severi degree `N^{d,δ}`: reduced nodal curves of degree `d` with `δ`
    /// nodes through `d(d+3)/2 - δ` general points.
    pub fn severi_degree(&mut self, d: u32, delta: i64) -> BigInt {
        let mut beta = vec![0; d.max(1) as usize];
        beta[0] = d;
        self.relative(d, delta, &[], &beta)
    }

    /// Possibly reducible curves of degree `d` through `n` general points.
    pub fn through_points(&mut self, d: u32, n: u32) -> BigInt {
        let delta = (d * (d + 3) / 2) as i64 - n as i64;
        if d == 0 {
            return if n == 0 { BigInt::one() } else { BigInt::zero() };
        }
        self.severi_degree(d, delta)
    }
}

fn sub_profiles(p: &[u32]) -> Vec<Profile> {
    let mut out = vec![Vec::new()];
    for &c in p {
        let mut next = Vec::new();
        for prefix in &out {
            for v in 0..=c {
                let mut q = prefix.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn profiles_of_weight(w: u32, len: usize) -> Vec<Profile> {
    fn rec(k: usize, left: u32, len: usize, cur: &mut Profile, out: &mut Vec<Profile>) {
        if k == len {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let step = k as u32 + 1;
        let mut c = 0;
        while c * step <= left {
            cur.push(c);
            rec(k + 1, left - c * step, len, cur, out);
            cur.pop();
            c += 1;
        }
    }
    let mut out = Vec::new();
    rec(0, w, len, &mut Vec::new(), &mut out);
    out
}

/// Counts of irreducible curves, extracted from Caporaso–Harris by peeling
/// off the component through the first point.
#[derive(Debug, Default)]
pub struct IrreducibleCounts {
    ch: CaporasoHarris,
    memo: HashMap<(u32, u32), BigInt>,
}

impl IrreducibleCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// Irreducible degree-`d` curves through `n` general points.
    pub fn through_points(&mut self, d: u32, n: u32) -> BigInt {
        if d == 0 || n == 0 {
            return BigInt::zero();
        }
        if let Some(v) = self.memo.get(&(d, n)) {
            return v.clone();
        }
        let mut value = self.ch.through_points(d, n);
        for d1 in 1..=d {
            for n1 in 1..=n {
                if (d1, n1) == (d, n) {
                    continue;
                }
                let rest = self.ch.through_points(d - d1, n - n1);
                if rest.is_zero() {
                    continue;
                }
                let part = self.through_points(d1, n1);
                value -= binomial((n - 1) as u64, (n1 - 1) as u64) * part * rest;
            }
        }
        self.memo.insert((d, n), value.clone());
        value
    }

    /// Irreducible curves of degree `d` and geometric genus `g` through
    /// `3d + g - 1` general points.
    pub fn genus(&mut self, d: u32, g: u32) -> BigInt {
        self.through_points(d, 3 * d + g - 1)
    }
}

/// Kontsevich's recursion for rational plane curves of degree `d`.
pub fn kontsevich(d: u32) -> BigInt {
    let mut n: Vec<BigInt> = vec![BigInt::zero(), BigInt::one()];
    for e in 2..=d as u64 {
        let mut acc = BigInt::zero();
        for a in 1..e {
            let b = e - a;
            let left = BigInt::from(b) * binomial(3 * e - 4, 3 * a - 2);
            let right = BigInt::from(a) * binomial(3 * e - 4, 3 * a - 1);
            acc += &n[a as usize] * &n[b as usize] * BigInt::from(a * a * b) * (left - right);
        }
        n.push(acc);
    }
    n[d as usize].clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn classical_severi_degrees() {
        let mut ch = CaporasoHarris::new();
        assert_eq!(ch.severi_degree(2, 0), big(1));
        assert_eq!(ch.severi_degree(2, 1), big(3));
        assert_eq!(ch.severi_degree(3, 1), big(12));
        assert_eq!(ch.severi_degree(3, 2), big(21));
        assert_eq!(ch.severi_degree(3, 3), big(15));
        assert_eq!(ch.severi_degree(4, 1), big(27));
        assert_eq!(ch.severi_degree(4, 2), big(225));
        assert_eq!(ch.severi_degree(4, 3), big(675));
    }

    #[test]
    fn irreducible_counts() {
        let mut irr = IrreducibleCounts::new();
        assert_eq!(irr.genus(1, 0), big(1));
        assert_eq!(irr.genus(2, 0), big(1));
        assert_eq!(irr.genus(3, 0), big(12));
        assert_eq!(irr.genus(3, 1), big(1));
        assert_eq!(irr.genus(4, 0), big(620));
        assert_eq!(irr.genus(4, 1), big(225));
        assert_eq!(irr.genus(4, 2), big(27));
        assert_eq!(irr.genus(4, 3), big(1));
        // a nodal conic is reducible
        assert_eq!(irr.through_points(2, 4), big(0));
    }

    #[test]
    fn kontsevich_agrees_with_caporaso_harris() {
        let mut irr = IrreducibleCounts::new();
        for d in 1..=5 {
            assert_eq!(kontsevich(d), irr.genus(d, 0), "d = {d}");
        }
        assert_eq!(kontsevich(5), big(87304));
    }
}
