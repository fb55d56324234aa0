//! Exact rational linear algebra: fraction-free (Bareiss) elimination.
//!
//! Rational matrices are first scaled row-by-row to integer matrices so the
//! elimination runs entirely in `BigInt` with exact divisions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::linalg::Matrix;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Scales each row by the lcm of its denominators. Returns the integer matrix
/// and the per-row scale factors.
fn integerize(m: &Matrix<Rational>) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let mut rows = Vec::with_capacity(m.rows());
    let mut scales = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let l = m
            .row(i)
            .iter()
            .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        rows.push(
            m.row(i)
                .iter()
                .map(|v| v.numer() * (&l / v.denom()))
                .collect(),
        );
        scales.push(l);
    }
    (rows, scales)
}

/// Determinant of an integer matrix by Bareiss elimination.
pub fn bareiss_integer_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

pub fn bareiss_determinant(m: &Matrix<Rational>) -> Rational {
    assert!(m.is_square());
    let (rows, scales) = integerize(m);
    let det = bareiss_integer_determinant(rows);
    let denom = scales.iter().fold(BigInt::one(), |acc, s| acc * s);
    Rational::new(det, denom)
}

/// Exact inverse by fraction-free Gauss-Jordan elimination on `[A | I]`.
/// Returns `None` when `A` is singular.
pub fn inverse(m: &Matrix<Rational>) -> Option<Matrix<Rational>> {
    assert!(m.is_square());
    let n = m.rows();
    let (rows, scales) = integerize(m);
    let mut a: Vec<Vec<BigInt>> = rows
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let width = 2 * n;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let p = (k + 1..n).find(|&i| !a[i][k].is_zero())?;
            a.swap(k, p);
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            for j in 0..width {
                if j == k {
                    continue;
                }
                let v = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    // Left block is now d * I with d = +-det of the integerized matrix.
    let d = a[n - 1][n - 1].clone();
    if d.is_zero() {
        return None;
    }
    // inv(A) = inv(S A) S where S = diag(scales)
    Some(Matrix::from_fn(n, n, |i, j| {
        Rational::new(&a[i][n + j] * &scales[j], d.clone())
    }))
}

pub fn is_zero_matrix(m: &Matrix<Rational>) -> bool {
    m.as_slice().iter().all(Zero::is_zero)
}

/// Largest absolute entry, exactly.
pub fn max_abs(m: &Matrix<Rational>) -> Rational {
    m.as_slice()
        .iter()
        .map(Signed::abs)
        .fold(Rational::zero(), |a, b| if b > a { b } else { a })
}
