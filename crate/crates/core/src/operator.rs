//! Finite-dimensional operator families `W_{t_i,t_j}`, `K_{t_i}`,
//! `W_{t_j,t_i}K_{t_i}` and the two determinants they define: the extended
//! kernel determinant `det(I - Q K^ext)` and the path-integral determinant
//! `det(I - K + Qbar W Qbar ... W K)`.

use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::graph::Ensemble;
use crate::linalg::{Matrix, Scalar};

/// Strictly increasing times `t_1 < ... < t_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidArgument("need at least one time".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("times must be finite".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Smallest gap `tau`; infinite for a single time.
    pub fn min_gap(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn span(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// The same grid shifted by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            times: self.times.iter().map(|t| t + dt).collect(),
        }
    }
}

/// `W[i][j]` (`i <= j`), `K[i]` and `WK[j][i] = W_{t_j,t_i} K_{t_i}` (`i <= j`)
/// on a `d`-dimensional state space. Indices are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorFamily<S> {
    d: usize,
    forward: Vec<Vec<Matrix<S>>>,
    kernels: Vec<Matrix<S>>,
    backward: Vec<Vec<Matrix<S>>>,
}

impl<S: Scalar> OperatorFamily<S> {
    /// `w(i, j)` is called for `i < j`, `k(i)` for every `i`, and
    /// `wk(j, i)` for `i < j`; `W[i][i] = I` and `WK[i][i] = K[i]` are implied.
    pub fn from_fn(
        n: usize,
        d: usize,
        mut w: impl FnMut(usize, usize) -> Matrix<S>,
        mut k: impl FnMut(usize) -> Matrix<S>,
        mut wk: impl FnMut(usize, usize) -> Matrix<S>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("family needs at least one time".into()));
        }
        let kernels: Vec<Matrix<S>> = (0..n).map(&mut k).collect();
        let forward = (0..n)
            .map(|i| {
                (i..n)
                    .map(|j| if i == j { Matrix::identity(d) } else { w(i, j) })
                    .collect()
            })
            .collect();
        let backward = (0..n)
            .map(|j| {
                (0..=j)
                    .map(|i| if i == j { kernels[j].clone() } else { wk(j, i) })
                    .collect()
            })
            .collect();
        let fam = Self {
            d,
            forward,
            kernels,
            backward,
        };
        fam.check_dimensions()?;
        Ok(fam)
    }

    fn check_dimensions(&self) -> Result<()> {
        let ok = |m: &Matrix<S>| m.rows() == self.d && m.cols() == self.d;
        let all = self.kernels.iter().all(ok)
            && self.forward.iter().flatten().all(ok)
            && self.backward.iter().flatten().all(ok);
        if all {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "every family member must be {0}x{0}",
                self.d
            )))
        }
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `W_{t_i,t_j}` for `i <= j`.
    pub fn w(&self, i: usize, j: usize) -> &Matrix<S> {
        assert!(i <= j, "forward operator needs i <= j");
        &self.forward[i][j - i]
    }

    pub fn kernel(&self, i: usize) -> &Matrix<S> {
        &self.kernels[i]
    }

    /// `W_{t_j,t_i} K_{t_i}` for `i <= j`.
    pub fn wk(&self, j: usize, i: usize) -> &Matrix<S> {
        assert!(i <= j, "backward composite needs i <= j");
        &self.backward[j][i]
    }

    /// `W_{t_i,t_j} K_{t_j}` for any order of `i`, `j`.
    pub fn w_times_k(&self, i: usize, j: usize) -> Matrix<S> {
        if i >= j {
            self.wk(i, j).clone()
        } else {
            self.w(i, j) * self.kernel(j)
        }
    }

    pub fn set_w(&mut self, i: usize, j: usize, m: Matrix<S>) {
        assert!(i < j);
        self.forward[i][j - i] = m;
    }

    pub fn set_wk(&mut self, j: usize, i: usize, m: Matrix<S>) {
        assert!(i < j);
        self.backward[j][i] = m;
    }

    /// `A M A^{-1}` applied to every member.
    pub fn conjugated(&self, a: &Matrix<S>, a_inv: &Matrix<S>) -> Self {
        let c = |m: &Matrix<S>| &(a * m) * a_inv;
        Self {
            d: self.d,
            forward: self.forward.iter().map(|r| r.iter().map(c).collect()).collect(),
            kernels: self.kernels.iter().map(c).collect(),
            backward: self.backward.iter().map(|r| r.iter().map(c).collect()).collect(),
        }
    }

    pub fn to_f64(&self) -> OperatorFamily<f64> {
        let c = |m: &Matrix<S>| m.to_f64();
        OperatorFamily {
            d: self.d,
            forward: self.forward.iter().map(|r| r.iter().map(c).collect()).collect(),
            kernels: self.kernels.iter().map(c).collect(),
            backward: self.backward.iter().map(|r| r.iter().map(c).collect()).collect(),
        }
    }
}

/// Diagonal multipliers `Q_{t_i}`; complements are derived on demand.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierFamily<S> {
    q: Vec<Vec<S>>,
}

impl<S: Scalar> MultiplierFamily<S> {
    pub fn new(q: Vec<Vec<S>>) -> Self {
        Self { q }
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            q: vec![vec![S::zero(); d]; n],
        }
    }

    pub fn ones(n: usize, d: usize) -> Self {
        Self {
            q: vec![vec![S::one(); d]; n],
        }
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn q(&self, i: usize) -> &[S] {
        &self.q[i]
    }

    /// `qbar = 1 - q` at time `i`.
    pub fn qbar(&self, i: usize) -> Vec<S> {
        self.q[i].iter().map(|v| S::one() - v.clone()).collect()
    }

    fn check(&self, fam: &OperatorFamily<S>) -> Result<()> {
        if self.q.len() != fam.len() || self.q.iter().any(|v| v.len() != fam.dim()) {
            return Err(Error::DimensionMismatch(format!(
                "multipliers must be {} vectors of length {}",
                fam.len(),
                fam.dim()
            )));
        }
        Ok(())
    }
}

fn diag_left<S: Scalar>(d: &[S], m: &Matrix<S>) -> Matrix<S> {
    let ones = vec![S::one(); m.cols()];
    m.scale_rows_cols(d, &ones)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub right_invertibility: f64,
    pub semigroup: f64,
    pub reversibility: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Max-norm residuals of `W_ij W_ji K_i - K_i`, `W_ij W_jk - W_ik` and
/// `W_ij K_j - K_i W_ij` over all index pairs and triples.
pub fn verify_structural_assumptions<S: Scalar>(
    fam: &OperatorFamily<S>,
    tol: f64,
) -> StructuralReport {
    let n = fam.len();
    let max = |a: f64, b: f64| a.max(b);
    let (right, rev) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = 0.0f64;
            let mut v = 0.0f64;
            for j in i..n {
                let w = fam.w(i, j);
                r = r.max((w * fam.wk(j, i)).max_abs_diff(fam.kernel(i)));
                v = v.max((w * fam.kernel(j)).max_abs_diff(&(fam.kernel(i) * w)));
            }
            (r, v)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let semigroup = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0f64;
            for j in i..n {
                for k in j..n {
                    s = s.max((fam.w(i, j) * fam.w(j, k)).max_abs_diff(fam.w(i, k)));
                }
            }
            s
        })
        .reduce(|| 0.0, max);
    StructuralReport {
        right_invertibility: right,
        semigroup,
        reversibility: rev,
        tolerance: tol,
        pass: right <= tol && semigroup <= tol && rev <= tol,
    }
}

/// The `(n d) x (n d)` extended kernel: block `(i, j)` is `W_ij K_j` for
/// `i >= j` and `-W_ij (I - K_j)` for `i < j`.
pub fn build_extended_kernel<S: Scalar>(fam: &OperatorFamily<S>) -> Matrix<S> {
    let n = fam.len();
    let blocks: Vec<Vec<Matrix<S>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i >= j {
                        fam.wk(i, j).clone()
                    } else {
                        &fam.w_times_k(i, j) - fam.w(i, j)
                    }
                })
                .collect()
        })
        .collect();
    Matrix::from_blocks(&blocks).expect("blocks share the state dimension")
}

/// `det(I - Q K^ext)` over the `n d`-dimensional block space.
pub fn extended_determinant<S: Scalar>(
    fam: &OperatorFamily<S>,
    q: &MultiplierFamily<S>,
) -> Result<S> {
    q.check(fam)?;
    let k = build_extended_kernel(fam);
    let qdiag: Vec<S> = q.q.iter().flatten().cloned().collect();
    let m = &Matrix::identity(k.rows()) - &diag_left(&qdiag, &k);
    Ok(m.determinant())
}

/// `Qbar_1 W_12 Qbar_2 ... W_{n-1,n} Qbar_n`, associated left to right.
pub fn qbar_chain<S: Scalar>(fam: &OperatorFamily<S>, q: &MultiplierFamily<S>, from: usize) -> Matrix<S> {
    let n = fam.len();
    let mut p = Matrix::diagonal(&q.qbar(from));
    for i in from + 1..n {
        p = &p * fam.w(i - 1, i);
        p = p.scale_rows_cols(&vec![S::one(); p.rows()], &q.qbar(i));
    }
    p
}

/// `det(I - K_1 + Qbar_1 W_12 ... Qbar_n (W_{n,1} K_1))`.
pub fn path_integral_side<S: Scalar>(fam: &OperatorFamily<S>, q: &MultiplierFamily<S>) -> Result<S> {
    q.check(fam)?;
    let n = fam.len();
    let chain = &qbar_chain(fam, q, 0) * fam.wk(n - 1, 0);
    let m = &(&Matrix::identity(fam.dim()) - fam.kernel(0)) + &chain;
    Ok(m.determinant())
}

/// The alternating expansion
/// `sum_{j>=i} sum_k (-1)^k sum_{j=a_0<...<a_k} W_{i,j} Q_j W_{j,a_1} Q_{a_1} ... Q_{a_k} W_{a_k,1} K_1`,
/// evaluated chain by chain.
pub fn alt_expansion_side<S: Scalar>(
    fam: &OperatorFamily<S>,
    q: &MultiplierFamily<S>,
    i: usize,
) -> Result<Matrix<S>> {
    q.check(fam)?;
    let n = fam.len();
    if i >= n {
        return Err(Error::InvalidArgument(format!("start index {i} >= n = {n}")));
    }
    let mut total = Matrix::zeros(fam.dim(), fam.dim());
    for j in i..n {
        let rest: Vec<usize> = (j + 1..n).collect();
        for mask in 0u32..(1u32 << rest.len()) {
            let chain: Vec<usize> = std::iter::once(j)
                .chain(rest.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &a)| a))
                .collect();
            let mut term = fam.w(i, j).clone();
            for (pos, &a) in chain.iter().enumerate() {
                term = term.scale_rows_cols(&vec![S::one(); term.rows()], q.q(a));
                term = match chain.get(pos + 1) {
                    Some(&b) => &term * fam.w(a, b),
                    None => &term * fam.wk(a, 0),
                };
            }
            total = if (chain.len() - 1).is_multiple_of(2) {
                &total + &term
            } else {
                &total - &term
            };
        }
    }
    Ok(total)
}

/// `W_{i,1} K_1 - Qbar_i W_{i,i+1} ... Qbar_n W_{n,1} K_1`.
pub fn telescoped_side<S: Scalar>(
    fam: &OperatorFamily<S>,
    q: &MultiplierFamily<S>,
    i: usize,
) -> Result<Matrix<S>> {
    q.check(fam)?;
    let n = fam.len();
    let chain = &qbar_chain(fam, q, i) * fam.wk(n - 1, 0);
    Ok(fam.wk(i, 0) - &chain)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    /// Passes iff `|lhs - rhs| <= tol * max(1, |lhs|)`.
    pub fn relative(lhs: f64, rhs: f64, tol: f64) -> Self {
        let diff = (lhs - rhs).abs();
        Self {
            lhs,
            rhs,
            diff,
            tolerance: tol,
            pass: diff <= tol * lhs.abs().max(1.0),
        }
    }

    /// Passes iff `|lhs - rhs| <= tol`.
    pub fn absolute(lhs: f64, rhs: f64, tol: f64) -> Self {
        let diff = (lhs - rhs).abs();
        Self {
            lhs,
            rhs,
            diff,
            tolerance: tol,
            pass: diff <= tol,
        }
    }
}

pub fn identity_check<S: Scalar>(
    fam: &OperatorFamily<S>,
    q: &MultiplierFamily<S>,
    tol: f64,
) -> Result<IdentityReport> {
    let lhs = extended_determinant(fam, q)?.to_f64();
    let rhs = path_integral_side(fam, q)?.to_f64();
    Ok(IdentityReport::relative(lhs, rhs, tol))
}

/// Generator for families built from one orthogonal eigenbasis:
/// `W_ij = U diag(exp(-(t_j - t_i) mu)) U^T` and `K = U diag(1_{k < rank}) U^T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutingFamilySpec {
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    /// Rank of the projector; drawn from `1..=d` when absent.
    #[serde(default)]
    pub rank: Option<usize>,
    /// Eigenvalues `mu_k`; drawn uniformly from `[0, 2]` when absent.
    #[serde(default)]
    pub spectrum: Option<Vec<f64>>,
}

/// A random commuting family with its times and a random multiplier family
/// with entries in `[0, 1]`.
#[derive(Clone, Debug)]
pub struct CommutingInstance {
    pub times: TimeGrid,
    pub family: OperatorFamily<f64>,
    pub multipliers: MultiplierFamily<f64>,
}

/// Orthogonal matrix from modified Gram-Schmidt on a Gaussian matrix.
pub fn random_orthogonal(rng: &mut impl Rng, d: usize) -> Matrix<f64> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for c in &cols {
            let p: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    Matrix::from_fn(d, d, |i, j| cols[j][i])
}

pub fn commuting_family(spec: &CommutingFamilySpec) -> Result<CommutingInstance> {
    let (n, d) = (spec.n, spec.d);
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument("n and d must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let rank = match spec.rank {
        Some(r) if r > d => {
            return Err(Error::InvalidArgument(format!("rank {r} exceeds d = {d}")))
        }
        Some(r) => r,
        None => rng.random_range(1..=d),
    };
    let mu = match &spec.spectrum {
        Some(s) if s.len() != d => {
            return Err(Error::DimensionMismatch(format!(
                "spectrum has {} values, d = {d}",
                s.len()
            )))
        }
        Some(s) => s.clone(),
        None => (0..d).map(|_| rng.random_range(0.0..2.0)).collect(),
    };
    let mut times = vec![0.0];
    for _ in 1..n {
        let last = *times.last().unwrap();
        times.push(last + rng.random_range(0.1..0.8));
    }
    let u = random_orthogonal(&mut rng, d);
    let ut = u.transpose();
    let spectral = |f: &dyn Fn(usize) -> f64| {
        let diag: Vec<f64> = (0..d).map(f).collect();
        &(&u * &Matrix::diagonal(&diag)) * &ut
    };
    let proj = |k: usize| if k < rank { 1.0 } else { 0.0 };
    let family = OperatorFamily::from_fn(
        n,
        d,
        |i, j| spectral(&|k| (-(times[j] - times[i]) * mu[k]).exp()),
        |_| spectral(&proj),
        |j, i| spectral(&|k| ((times[j] - times[i]) * mu[k]).exp() * proj(k)),
    )?;
    let q = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(0.0..=1.0)).collect())
        .collect();
    Ok(CommutingInstance {
        times: TimeGrid::new(times)?,
        family,
        multipliers: MultiplierFamily::new(q),
    })
}

/// The graph ensemble as an operator family over layers `0..T`, each layer
/// embedded in the first `|V_n|` coordinates of a common space of dimension
/// `max |V_n|`; unused coordinates are dead states.
pub fn graph_family(ens: &Ensemble) -> Result<OperatorFamily<Rational>> {
    let ens = if ens.is_biorthogonal() {
        ens.clone()
    } else {
        ens.biorthogonalize()?
    };
    let g = ens.graph();
    let n = g.layer_count();
    let d = (0..n).map(|i| g.layer_len(i)).max().unwrap_or(1);
    let pad = |m: Matrix<Rational>| {
        Matrix::from_fn(d, d, |a, b| {
            if a < m.rows() && b < m.cols() {
                m[(a, b)].clone()
            } else {
                Rational::zero()
            }
        })
    };
    let mut err = None;
    let mut keep = |r: Result<Matrix<Rational>>| match r {
        Ok(m) => pad(m),
        Err(e) => {
            err.get_or_insert(e);
            Matrix::zeros(d, d)
        }
    };
    let w: Vec<Vec<Matrix<Rational>>> = (0..n)
        .map(|i| (0..n).map(|j| if i < j { keep(ens.transition(i, j)) } else { Matrix::zeros(d, d) }).collect())
        .collect();
    let k: Vec<Matrix<Rational>> = (0..n).map(|i| keep(ens.kernel_at(i))).collect();
    let wk: Vec<Vec<Matrix<Rational>>> = (0..n)
        .map(|j| (0..n).map(|i| if i < j { keep(ens.cross_kernel(j, i)) } else { Matrix::zeros(d, d) }).collect())
        .collect();
    if let Some(e) = err {
        return Err(e);
    }
    OperatorFamily::from_fn(n, d, |i, j| w[i][j].clone(), |i| k[i].clone(), |j, i| wk[j][i].clone())
}

/// Pads per-layer multipliers `q_n` on `V_n` to the common dimension of [`graph_family`].
pub fn graph_multipliers(ens: &Ensemble, q: &[Vec<Rational>]) -> MultiplierFamily<Rational> {
    let g = ens.graph();
    let d = (0..g.layer_count()).map(|i| g.layer_len(i)).max().unwrap_or(1);
    MultiplierFamily::new(
        q.iter()
            .map(|qn| {
                let mut v = qn.clone();
                v.resize(d, Rational::zero());
                v
            })
            .collect(),
    )
}

/// A `d x d` matrix block of a family document: `forward` entries are
/// `W[i][j]`, `backward` entries are `WK[j][i]`, both with `i < j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockEntry {
    pub i: usize,
    pub j: usize,
    pub matrix: Vec<Vec<f64>>,
}

/// A floating operator family with its multipliers, as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDocument {
    pub kernels: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    pub forward: Vec<BlockEntry>,
    #[serde(default)]
    pub backward: Vec<BlockEntry>,
    pub q: Vec<Vec<f64>>,
}

impl FamilyDocument {
    pub fn family(&self) -> Result<OperatorFamily<f64>> {
        let n = self.kernels.len();
        let d = self.kernels.first().map_or(0, Vec::len);
        let lookup = |entries: &[BlockEntry], what: &str| -> Result<Vec<Vec<Option<Matrix<f64>>>>> {
            let mut table = vec![vec![None; n]; n];
            for e in entries {
                if !(e.i < e.j && e.j < n) {
                    return Err(Error::InvalidArgument(format!("{what} entry ({}, {}) needs i < j < {n}", e.i, e.j)));
                }
                table[e.i][e.j] = Some(Matrix::from_rows(e.matrix.clone())?);
            }
            Ok(table)
        };
        let fwd = lookup(&self.forward, "forward")?;
        let bwd = lookup(&self.backward, "backward")?;
        for i in 0..n {
            for j in i + 1..n {
                if fwd[i][j].is_none() || bwd[i][j].is_none() {
                    return Err(Error::InvalidArgument(format!("missing block ({i}, {j})")));
                }
            }
        }
        let kernels = self
            .kernels
            .iter()
            .map(|k| Matrix::from_rows(k.clone()))
            .collect::<Result<Vec<_>>>()?;
        OperatorFamily::from_fn(
            n,
            d,
            |i, j| fwd[i][j].clone().expect("checked"),
            |i| kernels[i].clone(),
            |j, i| bwd[i][j].clone().expect("checked"),
        )
    }

    pub fn multipliers(&self) -> MultiplierFamily<f64> {
        MultiplierFamily::new(self.q.clone())
    }

    /// The document form of a family, keeping every block.
    pub fn from_family(fam: &OperatorFamily<f64>, q: &MultiplierFamily<f64>) -> Self {
        let n = fam.len();
        let rows = |m: &Matrix<f64>| (0..m.rows()).map(|r| m.row(r).to_vec()).collect::<Vec<_>>();
        let pairs = || (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)));
        Self {
            kernels: (0..n).map(|i| rows(fam.kernel(i))).collect(),
            forward: pairs().map(|(i, j)| BlockEntry { i, j, matrix: rows(fam.w(i, j)) }).collect(),
            backward: pairs().map(|(i, j)| BlockEntry { i, j, matrix: rows(fam.wk(j, i)) }).collect(),
            q: (0..q.len()).map(|i| q.q(i).to_vec()).collect(),
        }
    }
}
