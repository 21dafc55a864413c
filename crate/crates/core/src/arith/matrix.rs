use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{ArithError, Rational};

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Matrix, ArithError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(ArithError::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix {
            rows: n,
            cols: m,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Matrix {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Matrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Result<Vec<Rational>, ArithError> {
        if x.len() != self.cols {
            return Err(ArithError::DimensionMismatch(format!(
                "{}x{} matrix times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, ArithError> {
        if self.cols != other.rows {
            return Err(ArithError::DimensionMismatch("inner dimensions differ".into()));
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum()
        }))
    }

    /// Exact determinant by fraction-free elimination.
    pub fn determinant(&self) -> Result<Rational, ArithError> {
        if !self.is_square() {
            return Err(ArithError::DimensionMismatch("determinant of non-square matrix".into()));
        }
        if self.rows == 0 {
            return Ok(Rational::one());
        }
        let (mut ints, scale) = integer_rows(self, None);
        let ech = bareiss_echelon(&mut ints, self.cols);
        if ech.pivots.len() < self.rows {
            return Ok(Rational::zero());
        }
        let last = ints[self.rows - 1][self.cols - 1].clone();
        let det = if ech.swaps % 2 == 1 { -last } else { last };
        Ok(Rational::from_int(det) / Rational::from_int(scale))
    }

    pub fn inverse(&self) -> Result<Matrix, ArithError> {
        if !self.is_square() {
            return Err(ArithError::DimensionMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[j] = Rational::one();
            let col = solve_linear(self, &e)?;
            for (i, v) in col.into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        Ok(inv)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries((0..self.rows).map(|i| self.row(i)))
            .finish()
    }
}

/// Scales each row of `a` (optionally augmented by `b`) to integers.
/// Returns the integer rows and the product of the row multipliers.
fn integer_rows(a: &Matrix, b: Option<&[Rational]>) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut scale = BigInt::one();
    let rows = (0..a.rows)
        .map(|i| {
            let mut row: Vec<&Rational> = a.row(i).iter().collect();
            if let Some(b) = b {
                row.push(&b[i]);
            }
            let lcm = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            scale *= &lcm;
            row.iter()
                .map(|q| q.numer() * (&lcm / q.denom()))
                .collect()
        })
        .collect();
    (rows, scale)
}

struct Echelon {
    pivots: Vec<usize>,
    swaps: usize,
}

/// In-place fraction-free (Bareiss) row echelon form over the integers,
/// pivoting only in the first `pivot_cols` columns. Every division is exact.
fn bareiss_echelon(m: &mut [Vec<BigInt>], pivot_cols: usize) -> Echelon {
    let nrows = m.len();
    let ncols = m.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut swaps = 0;
    let mut pr = 0;
    for c in 0..pivot_cols {
        if pr == nrows {
            break;
        }
        let Some(p) = (pr..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        if p != pr {
            m.swap(p, pr);
            swaps += 1;
        }
        let (top, rest) = m.split_at_mut(pr + 1);
        let pivot_row = &top[pr];
        for row in rest.iter_mut() {
            let factor = row[c].clone();
            for j in (c + 1)..ncols {
                let v = &pivot_row[c] * &row[j] - &factor * &pivot_row[j];
                debug_assert!((&v % &prev).is_zero());
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = m[pr][c].clone();
        pivots.push(c);
        pr += 1;
    }
    Echelon { pivots, swaps }
}

/// Pivot columns and the reduced integer rows of an augmented system.
type Reduced = (Vec<usize>, Vec<Vec<BigInt>>);

/// Reduces the augmented system, or `None` when it is inconsistent.
fn reduce_augmented(a: &Matrix, b: &[Rational]) -> Result<Option<Reduced>, ArithError> {
    if b.len() != a.rows {
        return Err(ArithError::DimensionMismatch(format!(
            "{} equations but right-hand side of length {}",
            a.rows,
            b.len()
        )));
    }
    let (mut ints, _) = integer_rows(a, Some(b));
    let ech = bareiss_echelon(&mut ints, a.cols);
    let rank = ech.pivots.len();
    if ints[rank..].iter().any(|row| !row[a.cols].is_zero()) {
        return Ok(None);
    }
    Ok(Some((ech.pivots, ints)))
}

fn back_substitute(pivots: &[usize], rows: &[Vec<BigInt>], ncols: usize) -> Vec<Rational> {
    let mut x = vec![Rational::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate().rev() {
        let row = &rows[r];
        let mut acc = Rational::from_int(row[ncols].clone());
        for j in (c + 1)..ncols {
            if !row[j].is_zero() {
                acc -= &(Rational::from_int(row[j].clone()) * &x[j]);
            }
        }
        x[c] = acc / Rational::from_int(row[c].clone());
    }
    x
}

/// Solves the square system `a·x = b` exactly.
pub fn solve_linear(a: &Matrix, b: &[Rational]) -> Result<Vec<Rational>, ArithError> {
    if !a.is_square() {
        return Err(ArithError::DimensionMismatch(format!(
            "solve_linear needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    match reduce_augmented(a, b)? {
        Some((pivots, rows)) if pivots.len() == a.cols => Ok(back_substitute(&pivots, &rows, a.cols)),
        _ => Err(ArithError::SingularMatrix),
    }
}

/// Some exact solution of a possibly rectangular or rank-deficient system,
/// with free variables set to zero. `None` when no solution exists.
pub fn solve_particular(a: &Matrix, b: &[Rational]) -> Result<Option<Vec<Rational>>, ArithError> {
    Ok(reduce_augmented(a, b)?.map(|(pivots, rows)| back_substitute(&pivots, &rows, a.cols)))
}

/// The `(r+1)×(r+1)` matrix with entry `m^i` at row `m`, column `i`
/// (`0^0 = 1`).
pub fn vandermonde_matrix(r: usize) -> Matrix {
    Matrix::from_fn(r + 1, r + 1, |m, i| Rational::from(m).pow(i as u32))
}

/// Lagrange basis weights `ℓ_m(target)` for the given integer nodes, so that
/// `p(target) = Σ ℓ_m(target)·p(node_m)` whenever `deg p < nodes.len()`.
pub fn lagrange_extrapolate_coeffs(nodes: &[i64], target: i64) -> Result<Vec<Rational>, ArithError> {
    for (i, a) in nodes.iter().enumerate() {
        if nodes[i + 1..].contains(a) {
            return Err(ArithError::DuplicateNodes);
        }
    }
    Ok(nodes
        .iter()
        .enumerate()
        .map(|(m, &xm)| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != m)
                .map(|(_, &xj)| Rational::new(target - xj, xm - xj))
                .product()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> Rational {
        Rational::from(n)
    }

    fn mat(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect()).unwrap()
    }

    // Cramer's rule with cofactor-expansion determinants; independent of the
    // elimination path.
    fn cofactor_det(m: &Matrix) -> Rational {
        let n = m.rows();
        if n == 0 {
            return Rational::one();
        }
        (0..n)
            .map(|j| {
                let minor = Matrix::from_fn(n - 1, n - 1, |i, k| {
                    m.get(i + 1, if k < j { k } else { k + 1 }).clone()
                });
                let sign = if j % 2 == 0 { q(1) } else { q(-1) };
                sign * m.get(0, j) * cofactor_det(&minor)
            })
            .sum()
    }

    fn cramer(a: &Matrix, b: &[Rational]) -> Vec<Rational> {
        let d = cofactor_det(a);
        (0..a.cols())
            .map(|j| {
                let aj = Matrix::from_fn(a.rows(), a.cols(), |i, k| {
                    if k == j { b[i].clone() } else { a.get(i, k).clone() }
                });
                cofactor_det(&aj) / &d
            })
            .collect()
    }

    #[test]
    fn solve_identity() {
        let b = vec![Rational::new(3, 2), q(-5)];
        assert_eq!(solve_linear(&Matrix::identity(2), &b).unwrap(), b);
    }

    #[test]
    fn solve_forward_substitution() {
        let a = mat(&[&[1, 0], &[1, 1]]);
        let (u, v) = (Rational::new(7, 3), q(-2));
        let x = solve_linear(&a, &[u.clone(), v.clone()]).unwrap();
        assert_eq!(x, vec![u.clone(), v - u]);
    }

    #[test]
    fn solve_vandermonde_three() {
        // x0 = p0, x1 = (4p1 - p2 - 3p0)/2, x2 = (p2 - 2p1 + p0)/2
        let v = vandermonde_matrix(2);
        for (p0, p1, p2) in [(1, 0, 0), (0, 1, 0), (0, 0, 1), (3, -7, 11)] {
            let p = [q(p0), q(p1), q(p2)];
            let x = solve_linear(&v, &p).unwrap();
            assert_eq!(x, cramer(&v, &p));
            assert_eq!(x[0], q(p0));
            assert_eq!(x[1], Rational::new(4 * p1 - p2 - 3 * p0, 2));
            assert_eq!(x[2], Rational::new(p2 - 2 * p1 + p0, 2));
        }
    }

    #[test]
    fn singular_is_reported() {
        let a = mat(&[&[1, 2], &[2, 4]]);
        assert_eq!(solve_linear(&a, &[q(1), q(2)]), Err(ArithError::SingularMatrix));
        assert_eq!(a.determinant().unwrap(), q(0));
        assert!(solve_linear(&mat(&[&[1, 2]]), &[q(1)]).is_err());
    }

    #[test]
    fn vandermonde_shapes() {
        assert_eq!(vandermonde_matrix(2), mat(&[&[1, 0, 0], &[1, 1, 1], &[1, 2, 4]]));
        assert_eq!(vandermonde_matrix(0), mat(&[&[1]]));
        assert_eq!(
            vandermonde_matrix(3),
            mat(&[&[1, 0, 0, 0], &[1, 1, 1, 1], &[1, 2, 4, 8], &[1, 3, 9, 27]])
        );
    }

    #[test]
    fn vandermonde_determinants() {
        for r in 0..=8usize {
            let det = vandermonde_matrix(r).determinant().unwrap();
            // product formula over distinct nodes 0..r
            let mut expected = q(1);
            for i in 0..=r {
                for j in (i + 1)..=r {
                    expected = expected * q((j - i) as i64);
                }
            }
            assert_eq!(det, expected, "r = {r}");
            assert!(!det.is_zero());
        }
    }

    #[test]
    fn lagrange_examples() {
        let c = lagrange_extrapolate_coeffs(&[0, 1, 2], -1).unwrap();
        assert_eq!(c, vec![q(3), q(-3), q(1)]);
        let c = lagrange_extrapolate_coeffs(&[0, 1], 0).unwrap();
        assert_eq!(c, vec![q(1), q(0)]);
        let c = lagrange_extrapolate_coeffs(&[0, 1, 2, 3], -1).unwrap();
        assert_eq!(c, vec![q(4), q(-6), q(4), q(-1)]);
        assert_eq!(lagrange_extrapolate_coeffs(&[0, 1, 0], 5), Err(ArithError::DuplicateNodes));
    }

    #[test]
    fn lagrange_alternating_binomials() {
        for r in 0..=8i64 {
            let nodes: Vec<i64> = (0..=r).collect();
            let c = lagrange_extrapolate_coeffs(&nodes, -1).unwrap();
            for (m, cm) in c.iter().enumerate() {
                let sign = if m % 2 == 0 { q(1) } else { q(-1) };
                assert_eq!(cm, &(sign * Rational::binomial(r + 1, m as i64 + 1)));
            }
        }
    }

    #[test]
    fn particular_solutions() {
        // rank 1, consistent
        let a = mat(&[&[1, 2], &[2, 4]]);
        let x = solve_particular(&a, &[q(3), q(6)]).unwrap().unwrap();
        assert_eq!(a.mul_vec(&x).unwrap(), vec![q(3), q(6)]);
        // inconsistent
        assert_eq!(solve_particular(&a, &[q(3), q(7)]).unwrap(), None);
        // wide, zero first column
        let a = mat(&[&[0, 1, 1], &[0, 0, 2]]);
        let x = solve_particular(&a, &[q(1), q(4)]).unwrap().unwrap();
        assert_eq!(a.mul_vec(&x).unwrap(), vec![q(1), q(4)]);
        // tall
        let a = mat(&[&[1, 0], &[0, 1], &[1, 1]]);
        assert!(solve_particular(&a, &[q(1), q(1), q(3)]).unwrap().is_none());
        assert_eq!(solve_particular(&a, &[q(1), q(1), q(2)]).unwrap(), Some(vec![q(1), q(1)]));
    }

    #[test]
    fn inverse_of_vandermonde() {
        let v = vandermonde_matrix(4);
        let inv = v.inverse().unwrap();
        assert_eq!(v.mul(&inv).unwrap(), Matrix::identity(5));
    }

    fn square_with_rhs() -> impl Strategy<Value = (Matrix, Vec<Rational>)> {
        (1usize..=8).prop_flat_map(|n| {
            (
                prop::collection::vec(-9i64..=9, n * n),
                prop::collection::vec((-20i64..=20, 1i64..=5), n),
            )
                .prop_map(move |(a, b)| {
                    let m = Matrix::from_fn(n, n, |i, j| q(a[i * n + j]));
                    let b = b.into_iter().map(|(x, y)| Rational::new(x, y)).collect();
                    (m, b)
                })
        })
    }

    proptest! {
        #[test]
        fn solve_remultiplies((a, b) in square_with_rhs()) {
            match solve_linear(&a, &b) {
                Ok(x) => prop_assert_eq!(a.mul_vec(&x).unwrap(), b),
                Err(e) => {
                    prop_assert_eq!(e, ArithError::SingularMatrix);
                    prop_assert!(a.determinant().unwrap().is_zero());
                }
            }
        }

        #[test]
        fn determinant_matches_cofactors((a, _b) in square_with_rhs()) {
            prop_assume!(a.rows() <= 6);
            prop_assert_eq!(a.determinant().unwrap(), cofactor_det(&a));
        }
    }
}
