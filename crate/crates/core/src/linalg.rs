//! Dense matrices over an exact or floating scalar field.
//!
//! The same operator algebra is run twice in this crate: once over
//! arbitrary-precision rationals, where identities must hold exactly, and
//! once over `f64`, where they hold to a tolerance. [`Matrix`] is generic over
//! [`Scalar`] so both modes share one code path; only the determinant
//! algorithm differs (Bareiss elimination for rationals, LU with partial
//! pivoting for floats).

use std::fmt::Debug;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn determinant(m: &Matrix<Self>) -> Self;
    fn to_f64(&self) -> f64;
    fn from_f64(x: f64) -> Self;
    /// A specialised product, when the field has one.
    fn fast_mul(_a: &Matrix<Self>, _b: &Matrix<Self>) -> Option<Matrix<Self>> {
        None
    }
}

impl Scalar for f64 {
    fn determinant(m: &Matrix<f64>) -> f64 {
        lu_determinant(m)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn from_f64(x: f64) -> f64 {
        x
    }
    fn fast_mul(a: &Matrix<f64>, b: &Matrix<f64>) -> Option<Matrix<f64>> {
        let (m, k, n) = (a.rows, a.cols, b.cols);
        let mut data = vec![0.0; m * n];
        if m * k * n > 0 {
            // SAFETY: row-major buffers of the stated shapes
            unsafe {
                matrixmultiply::dgemm(
                    m, k, n, 1.0,
                    a.data.as_ptr(), k as isize, 1,
                    b.data.as_ptr(), n as isize, 1,
                    0.0,
                    data.as_mut_ptr(), n as isize, 1,
                );
            }
        }
        Some(Matrix { rows: m, cols: n, data })
    }
}

impl Scalar for BigRational {
    fn determinant(m: &Matrix<BigRational>) -> BigRational {
        crate::exact::bareiss_determinant(m)
    }
    fn to_f64(&self) -> f64 {
        // numer/denom individually may overflow f64 even when the ratio does not
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            let n = self.numer().bits() as i64;
            let d = self.denom().bits() as i64;
            let shift = (n - d - 60).max(0) as u64;
            let shifted = BigRational::new(self.numer() >> shift, self.denom().clone());
            ToPrimitive::to_f64(&shifted).unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
        })
    }
    fn from_f64(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn diagonal(d: &[S]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = v.clone();
        }
        m
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

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Multiplies row `i` by `left[i]` and column `j` by `right[j]`.
    pub fn scale_rows_cols(&self, left: &[S], right: &[S]) -> Self {
        assert_eq!(left.len(), self.rows);
        assert_eq!(right.len(), self.cols);
        Self::from_fn(self.rows, self.cols, |i, j| {
            left[i].clone() * self[(i, j)].clone() * right[j].clone()
        })
    }

    pub fn determinant(&self) -> S {
        assert!(self.is_square(), "determinant of a non-square matrix");
        S::determinant(self)
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        if let Some(m) = S::fast_mul(self, rhs) {
            return Ok(m);
        }
        let n = rhs.cols;
        let mut data = vec![S::zero(); self.rows * n];
        let row_product = |(i, out): (usize, &mut [S])| {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let brow = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out.iter_mut().zip(brow) {
                    *o = o.clone() + a.clone() * b.clone();
                }
            }
        };
        if self.rows * self.cols * n > PAR_THRESHOLD.pow(3) {
            data.par_chunks_mut(n.max(1)).enumerate().for_each(row_product);
        } else {
            data.chunks_mut(n.max(1)).enumerate().for_each(row_product);
        }
        Ok(Self {
            rows: self.rows,
            cols: n,
            data,
        })
    }

    /// Largest entrywise distance, as `f64`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// Assembles a block matrix; blocks in one block-row share their row count
    /// and blocks in one block-column share their column count.
    pub fn from_blocks(blocks: &[Vec<Self>]) -> Result<Self> {
        let nb = blocks.len();
        if nb == 0 {
            return Ok(Self::zeros(0, 0));
        }
        let row_sizes: Vec<usize> = blocks.iter().map(|r| r[0].rows).collect();
        let col_sizes: Vec<usize> = blocks[0].iter().map(|b| b.cols).collect();
        for (bi, brow) in blocks.iter().enumerate() {
            if brow.len() != col_sizes.len() {
                return Err(Error::DimensionMismatch("ragged block rows".into()));
            }
            for (bj, b) in brow.iter().enumerate() {
                if b.rows != row_sizes[bi] || b.cols != col_sizes[bj] {
                    return Err(Error::DimensionMismatch(format!(
                        "block ({bi},{bj}) is {}x{}, expected {}x{}",
                        b.rows, b.cols, row_sizes[bi], col_sizes[bj]
                    )));
                }
            }
        }
        let total_r: usize = row_sizes.iter().sum();
        let total_c: usize = col_sizes.iter().sum();
        let mut out = Self::zeros(total_r, total_c);
        let mut r0 = 0;
        for (bi, brow) in blocks.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in brow.iter().enumerate() {
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                    }
                }
                c0 += col_sizes[bj];
            }
            r0 += row_sizes[bi];
        }
        Ok(out)
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> Add for &Matrix<S> {
    type Output = Matrix<S>;
    fn add(self, rhs: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }
}

impl<S: Scalar> Sub for &Matrix<S> {
    type Output = Matrix<S>;
    fn sub(self, rhs: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }
}

impl<S: Scalar> Mul for &Matrix<S> {
    type Output = Matrix<S>;
    fn mul(self, rhs: &Matrix<S>) -> Matrix<S> {
        self.try_mul(rhs).expect("matrix product dimension mismatch")
    }
}

const PAR_THRESHOLD: usize = 128;

/// Determinant by LU factorization with partial pivoting.
pub fn lu_determinant(m: &Matrix<f64>) -> f64 {
    let n = m.rows();
    let mut a = m.data.clone();
    let mut det = 1.0;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        let (top, bottom) = a.split_at_mut((k + 1) * n);
        let prow = &top[k * n..(k + 1) * n];
        let eliminate = |row: &mut [f64]| {
            let f = row[k] / pivot;
            if f != 0.0 {
                for j in k + 1..n {
                    row[j] -= f * prow[j];
                }
            }
        };
        if n - k > PAR_THRESHOLD {
            bottom.par_chunks_mut(n).for_each(eliminate);
        } else {
            bottom.chunks_mut(n).for_each(eliminate);
        }
    }
    det
}

/// Solves `A x = b` for square `A` by LU with partial pivoting; `None` if singular.
pub fn lu_solve(a: &Matrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert_eq!(b.len(), n);
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))?;
        if m[p * n + k] == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        for i in k + 1..n {
            let f = m[i * n + k] / m[k * n + k];
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k * n + j] * x[j]).sum();
        x[k] = (x[k] - s) / m[k * n + k];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn lu_matches_cofactor_expansion() {
        let m = Matrix::from_rows(vec![
            vec![2.0, -1.0, 0.5],
            vec![4.0, 3.0, -2.0],
            vec![-1.0, 0.25, 1.0],
        ])
        .unwrap();
        let cof = 2.0 * (3.0 * 1.0 - (-2.0) * 0.25) - -(4.0 * 1.0 - (-2.0) * (-1.0))
            + 0.5 * (4.0 * 0.25 - -3.0);
        assert!((m.determinant() - cof).abs() < 1e-13);
    }

    #[test]
    fn singular_matrix_has_zero_determinant() {
        let m = Matrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(m.determinant(), 0.0);
        let q = Matrix::from_rows(vec![vec![r(1, 3), r(2, 3)], vec![r(1, 2), r(1, 1)]]).unwrap();
        assert!(q.determinant().is_zero());
    }

    #[test]
    fn rational_and_float_determinants_agree() {
        let q = Matrix::from_fn(4, 4, |i, j| r((i * 3 + j * j) as i64 - 4, (i + j + 1) as i64));
        let f = q.to_f64();
        let exact = Scalar::to_f64(&q.determinant());
        assert!((f.determinant() - exact).abs() < 1e-10 * exact.abs().max(1.0));
    }

    #[test]
    fn block_assembly_checks_shapes() {
        let a = Matrix::<f64>::identity(2);
        let b = Matrix::<f64>::zeros(2, 3);
        let c = Matrix::<f64>::zeros(1, 2);
        let d = Matrix::<f64>::identity(3);
        assert!(Matrix::from_blocks(&[vec![a.clone(), b.clone()], vec![c, d]]).is_err());
        let c = Matrix::<f64>::zeros(3, 2);
        let m = Matrix::from_blocks(&[vec![a, b], vec![c, Matrix::identity(3)]]).unwrap();
        assert_eq!(m, Matrix::identity(5));
    }

    #[test]
    fn solve_recovers_rhs() {
        let a = Matrix::from_rows(vec![vec![3.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let x = lu_solve(&a, &[9.0, 8.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14 && (x[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn huge_rationals_convert() {
        let big = BigRational::new(BigInt::from(10).pow(400) * 3, BigInt::from(10).pow(400));
        assert!((Scalar::to_f64(&big) - 3.0).abs() < 1e-12);
    }
}
