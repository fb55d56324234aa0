//! Nystrom discretization of Fredholm determinants, the truncated Fredholm
//! series, block (multi-time) determinants and diagonal conjugation.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::{Decay, Kernel};
use crate::linalg::{lu_determinant, Matrix};
use crate::quadrature::QuadratureGrid;

/// Largest series order and grid size accepted by [`series_determinant`].
pub const SERIES_MAX_ORDER: usize = 8;
pub const SERIES_MAX_NODES: usize = 24;

/// `sqrt(w_a) k(x_a, y_b) sqrt(w'_b)` for rows on `rows` and columns on `cols`.
pub fn discretize_between(
    k: &dyn Kernel,
    rows: &QuadratureGrid,
    cols: &QuadratureGrid,
) -> Result<Matrix<f64>> {
    let (sr, sc) = (rows.sqrt_weights(), cols.sqrt_weights());
    let (xs, ys) = (rows.nodes(), cols.nodes());
    let data: Vec<Result<Vec<f64>>> = (0..xs.len())
        .into_par_iter()
        .map(|a| {
            (0..ys.len())
                .map(|b| Ok(sr[a] * k.try_eval(xs[a], ys[b])? * sc[b]))
                .collect()
        })
        .collect();
    let rows_vec = data.into_iter().collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(rows_vec)
}

/// The discretized kernel `M[a][b] = sqrt(w_a) k(x_a, x_b) sqrt(w_b)`.
pub fn discretize(k: &dyn Kernel, grid: &QuadratureGrid) -> Result<Matrix<f64>> {
    discretize_between(k, grid, grid)
}

/// `det(I - M)` for the discretized kernel.
pub fn nystrom_determinant(k: &dyn Kernel, grid: &QuadratureGrid) -> Result<f64> {
    let m = discretize(k, grid)?;
    Ok(lu_determinant(&(&Matrix::identity(m.rows()) - &m)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesDeterminant {
    pub value: f64,
    /// Magnitude of the last included term.
    pub last_term: f64,
}

/// `1 + sum_{k=1}^{max_order} (-1)^k / k! int det[k(x_i, x_j)]`, each
/// `k`-fold integral taken on the grid. On a grid the `k!` orderings of
/// distinct nodes collapse to one sum over `k`-subsets of principal minors.
pub fn series_determinant(
    k: &dyn Kernel,
    grid: &QuadratureGrid,
    max_order: usize,
) -> Result<SeriesDeterminant> {
    if max_order == 0 || max_order > SERIES_MAX_ORDER {
        return Err(Error::InvalidArgument(format!(
            "series order must be in 1..={SERIES_MAX_ORDER}"
        )));
    }
    if grid.len() > SERIES_MAX_NODES {
        return Err(Error::InvalidArgument(format!(
            "series oracle limited to {SERIES_MAX_NODES} nodes"
        )));
    }
    let m = discretize(k, grid)?;
    let n = m.rows();
    let mut value = 1.0;
    let mut last_term = 0.0;
    for order in 1..=max_order.min(n) {
        let sum: f64 = subsets(n, order)
            .par_iter()
            .map(|s| lu_determinant(&Matrix::from_fn(order, order, |i, j| m[(s[i], s[j])])))
            .sum();
        let term = if order % 2 == 0 { sum } else { -sum };
        value += term;
        last_term = term.abs();
    }
    Ok(SeriesDeterminant { value, last_term })
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n - (k - cur.len()) {
            cur.push(i);
            go(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    go(n, k, 0, &mut cur, &mut out);
    out
}

/// A multiplication operator `q(x)`.
pub type Multiplier<'a> = &'a (dyn Fn(f64) -> f64 + Sync);

/// `det(I - Q B)` where `B` is the `n x n` block operator with kernel
/// `blocks[i][j]` from time `j` to time `i`, time `i` discretized on
/// `grids[i]`, and `Q = diag(q_i)`.
pub fn block_nystrom_determinant(
    blocks: &[Vec<&dyn Kernel>],
    grids: &[QuadratureGrid],
    q: &[Multiplier<'_>],
) -> Result<f64> {
    let n = blocks.len();
    if grids.len() != n || q.len() != n || blocks.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "need {n}x{n} blocks, {n} grids and {n} multipliers"
        )));
    }
    let mats = (0..n)
        .map(|i| {
            let qi: Vec<f64> = grids[i].nodes().iter().map(|&x| q[i](x)).collect();
            (0..n)
                .map(|j| {
                    let b = discretize_between(blocks[i][j], &grids[i], &grids[j])?;
                    let ones = vec![1.0; b.cols()];
                    let qb = b.scale_rows_cols(&qi, &ones);
                    Ok(if i == j {
                        &Matrix::identity(qb.rows()) - &qb
                    } else {
                        qb.scale(&-1.0)
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(lu_determinant(&Matrix::from_blocks(&mats)?))
}

/// Pointwise multipliers `u`, `u'` with `u u' = 1` where both are finite.
pub struct ConjugationPair<'a> {
    pub u: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    pub u_prime: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
}

impl<'a> ConjugationPair<'a> {
    pub fn new(u: impl Fn(f64) -> f64 + Sync + 'a, u_prime: impl Fn(f64) -> f64 + Sync + 'a) -> Self {
        Self {
            u: Box::new(u),
            u_prime: Box::new(u_prime),
        }
    }

    /// `u` together with its reciprocal.
    pub fn reciprocal(u: impl Fn(f64) -> f64 + Sync + Clone + 'a) -> Self {
        let v = u.clone();
        Self::new(u, move |x| 1.0 / v(x))
    }

    pub fn identity() -> Self {
        Self::new(|_| 1.0, |_| 1.0)
    }

    /// Largest `|u(x) u'(x) - 1|` over `xs` where both factors are finite.
    pub fn product_defect(&self, xs: &[f64]) -> f64 {
        xs.iter()
            .map(|&x| ((self.u)(x), (self.u_prime)(x)))
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| (a * b - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// The kernel `(x, y) -> u(x) k(x, y) u'(y)`.
pub struct ConjugatedKernel<'k, 'p> {
    kernel: &'k dyn Kernel,
    pair: &'p ConjugationPair<'p>,
}

pub fn apply_conjugation<'k, 'p>(
    kernel: &'k dyn Kernel,
    pair: &'p ConjugationPair<'p>,
) -> ConjugatedKernel<'k, 'p> {
    ConjugatedKernel { kernel, pair }
}

impl Kernel for ConjugatedKernel<'_, '_> {
    fn eval(&self, x: f64, y: f64) -> f64 {
        let k = self.kernel.eval(x, y);
        if k == 0.0 {
            return 0.0;
        }
        (self.pair.u)(x) * k * (self.pair.u_prime)(y)
    }

    fn decay(&self) -> Decay {
        self.kernel.decay()
    }

    fn try_eval(&self, x: f64, y: f64) -> Result<f64> {
        let v = self.eval(x, y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::ConjugationOverflow { x, y })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{FnKernel, Zero};
    use crate::quadrature::gauss_legendre;

    fn gaussian_rank_one() -> FnKernel<impl Fn(f64, f64) -> f64 + Sync> {
        FnKernel::symmetric(|x: f64, y: f64| 0.5 * (-(x * x + y * y) / 2.0).exp())
    }

    #[test]
    fn zero_kernel() {
        let g = gauss_legendre(10, -1.0, 1.0).unwrap();
        assert_eq!(nystrom_determinant(&Zero, &g).unwrap(), 1.0);
        assert_eq!(series_determinant(&Zero, &g, 4).unwrap().value, 1.0);
    }

    #[test]
    fn rank_one_determinant() {
        // int_{-4}^{4} 0.5 e^{-x^2} dx
        let c = 0.5 * std::f64::consts::PI.sqrt() * 0.999_999_984_582_742_1;
        let g = gauss_legendre(60, -4.0, 4.0).unwrap();
        let k = gaussian_rank_one();
        assert!((nystrom_determinant(&k, &g).unwrap() - (1.0 - c)).abs() < 1e-12);
        let g20 = gauss_legendre(20, -4.0, 4.0).unwrap();
        let s = series_determinant(&k, &g20, 8).unwrap();
        assert!(s.last_term < 1e-12);
        assert!((s.value - nystrom_determinant(&k, &g20).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn series_matches_lu_for_contraction() {
        let k = FnKernel::symmetric(|x: f64, y: f64| 0.4 * (-(x - y).powi(2)).exp() * (-(x * x + y * y) / 8.0).exp());
        let g = gauss_legendre(20, -3.0, 3.0).unwrap();
        let s = series_determinant(&k, &g, 8).unwrap();
        let lu = nystrom_determinant(&k, &g).unwrap();
        assert!((s.value - lu).abs() < 1e-8, "{} vs {lu}", s.value);
    }

    #[test]
    fn series_limits() {
        let g = gauss_legendre(25, 0.0, 1.0).unwrap();
        assert!(series_determinant(&Zero, &g, 2).is_err());
        let g = gauss_legendre(5, 0.0, 1.0).unwrap();
        assert!(series_determinant(&Zero, &g, 9).is_err());
    }

    #[test]
    fn block_reduces_to_single_and_diagonal() {
        let k = gaussian_rank_one();
        let g = gauss_legendre(30, -4.0, 4.0).unwrap();
        let one = |_: f64| 1.0;
        let single = block_nystrom_determinant(&[vec![&k]], std::slice::from_ref(&g), &[&one]).unwrap();
        let d = nystrom_determinant(&k, &g).unwrap();
        assert!((single - d).abs() < 1e-14);
        let blocks: Vec<Vec<&dyn Kernel>> = vec![vec![&k, &Zero], vec![&Zero, &k]];
        let two = block_nystrom_determinant(&blocks, &[g.clone(), g.clone()], &[&one, &one]).unwrap();
        assert!((two - d * d).abs() < 1e-14);
    }

    #[test]
    fn conjugation_invariance() {
        let k = gaussian_rank_one();
        let g = gauss_legendre(40, -4.0, 4.0).unwrap();
        let pair = ConjugationPair::reciprocal(|x: f64| (-x * x / 2.0).exp() * (1.0 + x * x));
        assert!(pair.product_defect(g.nodes()) < 1e-15);
        let c = apply_conjugation(&k, &pair);
        let a = nystrom_determinant(&k, &g).unwrap();
        let b = nystrom_determinant(&c, &g).unwrap();
        assert!(((a - b) / a).abs() < 1e-12);
        let id = ConjugationPair::identity();
        assert_eq!(apply_conjugation(&k, &id).eval(0.3, 0.7), k.eval(0.3, 0.7));
    }

    #[test]
    fn conjugation_overflow_is_reported() {
        let k = FnKernel::new(|_: f64, _: f64| 1.0);
        let pair = ConjugationPair::reciprocal(|x: f64| (x * x).exp());
        let g = gauss_legendre(4, 20.0, 40.0).unwrap();
        let c = apply_conjugation(&k, &pair);
        assert!(matches!(nystrom_determinant(&c, &g), Err(Error::ConjugationOverflow { .. })));
    }
}
