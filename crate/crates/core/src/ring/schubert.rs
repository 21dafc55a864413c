//! Schubert calculus on `G(k, n)`: Pieri products with special classes and
//! Giambelli expansion of arbitrary Schubert classes.
//!
//! Convention: `σ_p = c_p(Q)` with `Q` the universal quotient bundle, so the
//! special classes are the one-row partitions `(p)`, `1 ≤ p ≤ n−k`, and they
//! generate the ring.

use std::collections::BTreeMap;

use crate::arith::Rational;

/// A partition stored without trailing zeros.
pub type Partition = Vec<u32>;

pub fn trim(mut parts: Vec<u32>) -> Partition {
    while parts.last() == Some(&0) {
        parts.pop();
    }
    parts
}

/// True if `parts` is non-increasing and fits in `rows × cols`.
pub fn fits_box(parts: &[u32], rows: u32, cols: u32) -> bool {
    parts.len() <= rows as usize
        && parts.iter().all(|&p| p <= cols)
        && parts.windows(2).all(|w| w[0] >= w[1])
}

/// Partitions `μ ⊇ λ` inside the box with `|μ| = |λ| + p` and `μ/λ` a
/// horizontal strip (no two added boxes in one column).
pub fn pieri_terms(lambda: &[u32], p: u32, rows: u32, cols: u32) -> Vec<Partition> {
    let rows = rows as usize;
    let lam: Vec<u32> = (0..rows).map(|i| lambda.get(i).copied().unwrap_or(0)).collect();
    let mut out = Vec::new();
    let mut mu = Vec::with_capacity(rows);
    pieri_rec(&lam, cols, p, &mut mu, &mut out);
    out
}

fn pieri_rec(lam: &[u32], cols: u32, left: u32, mu: &mut Vec<u32>, out: &mut Vec<Partition>) {
    let i = mu.len();
    if i == lam.len() {
        if left == 0 {
            out.push(trim(mu.clone()));
        }
        return;
    }
    // interlacing: λ_i ≤ μ_i ≤ λ_{i-1}, and μ_1 ≤ cols
    let upper = if i == 0 { cols } else { lam[i - 1] };
    for v in lam[i]..=upper.min(lam[i] + left) {
        mu.push(v);
        pieri_rec(lam, cols, left - (v - lam[i]), mu, out);
        mu.pop();
    }
}

/// A polynomial in the special classes `σ_1..σ_m`; exponent vectors have
/// length `m`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpecialPolynomial {
    pub terms: BTreeMap<Vec<u32>, Rational>,
}

impl SpecialPolynomial {
    fn constant(m: usize, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; m], c);
        }
        SpecialPolynomial { terms }
    }

    fn special(m: usize, p: u32) -> Self {
        match p {
            0 => Self::constant(m, Rational::one()),
            p if p as usize > m => Self::default(),
            p => {
                let mut e = vec![0; m];
                e[p as usize - 1] = 1;
                SpecialPolynomial {
                    terms: BTreeMap::from([(e, Rational::one())]),
                }
            }
        }
    }

    fn add_scaled(&mut self, other: &Self, c: &Rational) {
        for (e, v) in &other.terms {
            let entry = self.terms.entry(e.clone()).or_insert_with(Rational::zero);
            *entry += &(v * c);
            if entry.is_zero() {
                self.terms.remove(e);
            }
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = SpecialPolynomial::default();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let e: Vec<u32> = a.iter().zip(b).map(|(i, j)| i + j).collect();
                let single = SpecialPolynomial {
                    terms: BTreeMap::from([(e, x * y)]),
                };
                out.add_scaled(&single, &Rational::one());
            }
        }
        out
    }
}

/// Jacobi–Trudi determinant `det(σ_{λ_i + j − i})` as a polynomial in the
/// special classes, with `σ_p = 0` for `p < 0` or `p > m`.
pub fn jacobi_trudi(lambda: &[u32], m: usize) -> SpecialPolynomial {
    let len = lambda.len();
    if len == 0 {
        return SpecialPolynomial::constant(m, Rational::one());
    }
    let entry = |i: usize, j: usize| -> SpecialPolynomial {
        let idx = lambda[i] as i64 + j as i64 - i as i64;
        if idx < 0 {
            SpecialPolynomial::default()
        } else {
            SpecialPolynomial::special(m, idx as u32)
        }
    };
    let mut out = SpecialPolynomial::default();
    let mut perm: Vec<usize> = (0..len).collect();
    permutations(&mut perm, 0, &mut |p, sign| {
        let mut prod = SpecialPolynomial::constant(m, Rational::from(sign));
        for (i, &j) in p.iter().enumerate() {
            prod = prod.mul(&entry(i, j));
            if prod.terms.is_empty() {
                return;
            }
        }
        out.add_scaled(&prod, &Rational::one());
    });
    out
}

// Visits every permutation of `p` with its sign.
fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize], i64)) {
    fn rec(p: &mut Vec<usize>, k: usize, sign: i64, f: &mut impl FnMut(&[usize], i64)) {
        if k == p.len() {
            f(p, sign);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            rec(p, k + 1, if i == k { sign } else { -sign }, f);
            p.swap(k, i);
        }
    }
    rec(p, k, 1, f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pieri_enumeration() {
        assert_eq!(pieri_terms(&[], 1, 2, 2), vec![vec![1]]);
        let mut t = pieri_terms(&[1], 1, 2, 2);
        t.sort();
        assert_eq!(t, vec![vec![1, 1], vec![2]]);
        assert_eq!(pieri_terms(&[2, 1], 1, 2, 2), vec![vec![2, 2]]);
        let mut t = pieri_terms(&[2, 1], 2, 3, 3);
        t.sort();
        assert_eq!(t, vec![vec![2, 2, 1], vec![3, 1, 1], vec![3, 2]]);
    }

    #[test]
    fn box_check() {
        assert!(fits_box(&[2, 2], 2, 2));
        assert!(!fits_box(&[3], 2, 2));
        assert!(!fits_box(&[1, 1, 1], 2, 2));
        assert!(!fits_box(&[1, 2], 2, 2));
        assert!(fits_box(&[], 2, 2));
    }

    #[test]
    fn giambelli_small() {
        // σ_{1,1} = σ_1² − σ_2
        let jt = jacobi_trudi(&[1, 1], 2);
        let expected = BTreeMap::from([
            (vec![2, 0], Rational::one()),
            (vec![0, 1], Rational::from(-1)),
        ]);
        assert_eq!(jt.terms, expected);
        // σ_{2,2} = σ_2² − σ_3σ_1 with σ_3 = 0
        let jt = jacobi_trudi(&[2, 2], 2);
        assert_eq!(jt.terms, BTreeMap::from([(vec![0, 2], Rational::one())]));
        let jt = jacobi_trudi(&[2], 2);
        assert_eq!(jt.terms, BTreeMap::from([(vec![0, 1], Rational::one())]));
    }
}
