//! Monte-Carlo sampling of the stationary Hermitian Ornstein-Uhlenbeck matrix
//! process, whose eigenvalues perform stationary Dyson Brownian motion.
//!
//! Normalization: the stationary law has density proportional to
//! `exp(-tr H^2)`, so a 1x1 sample has density `e^{-x^2}/sqrt(pi)`, and every
//! entry decorrelates as `e^{-t}`. The eigenvalue process then has the
//! extended Hermite kernel with level decay `e^{-tk}`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::profile::Profile;

/// Standard deviation of a diagonal entry.
pub const DIAGONAL_SD: f64 = std::f64::consts::FRAC_1_SQRT_2;
/// Standard deviation of the real and of the imaginary part of an off-diagonal entry.
pub const OFF_DIAGONAL_SD: f64 = 0.5;

const JACOBI_TOLERANCE: f64 = 1e-12;
const JACOBI_SWEEPS: usize = 100;

/// Deterministic random streams: stream `i` depends only on the seed and `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededRng {
    pub seed: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// A Hermitian matrix with its upper triangle stored row by row.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOUState {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    time: f64,
}

fn packed(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < n);
    i * n - i * (i + 1) / 2 + j
}

fn entry_sd(i: usize, j: usize) -> f64 {
    if i == j {
        DIAGONAL_SD
    } else {
        OFF_DIAGONAL_SD
    }
}

/// A draw from the stationary law at time 0.
pub fn sample_stationary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<HermitianOUState> {
    if n == 0 {
        return Err(Error::InvalidArgument("matrix size must be positive".into()));
    }
    let len = n * (n + 1) / 2;
    let mut re = Vec::with_capacity(len);
    let mut im = Vec::with_capacity(len);
    for i in 0..n {
        for j in i..n {
            let sd = entry_sd(i, j);
            re.push(sd * rng.sample::<f64, _>(StandardNormal));
            im.push(if i == j { 0.0 } else { sd * rng.sample::<f64, _>(StandardNormal) });
        }
    }
    Ok(HermitianOUState { n, re, im, time: 0.0 })
}

impl HermitianOUState {
    /// A state with the given diagonal and zero off-diagonal part.
    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut s = Self {
            n,
            re: vec![0.0; n * (n + 1) / 2],
            im: vec![0.0; n * (n + 1) / 2],
            time: 0.0,
        };
        for (i, &v) in d.iter().enumerate() {
            s.re[packed(n, i, i)] = v;
        }
        s
    }

    /// Sets entry `(i, j)` and, implicitly, its conjugate `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, re: f64, im: f64) {
        let (a, b, sign) = if i <= j { (i, j, 1.0) } else { (j, i, -1.0) };
        let k = packed(self.n, a, b);
        self.re[k] = re;
        self.im[k] = if a == b { 0.0 } else { sign * im };
    }

    /// Entry `(i, j)` as `(re, im)`.
    pub fn get(&self, i: usize, j: usize) -> (f64, f64) {
        if i <= j {
            let k = packed(self.n, i, j);
            (self.re[k], self.im[k])
        } else {
            let k = packed(self.n, j, i);
            (self.re[k], -self.im[k])
        }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.re[packed(self.n, i, i)]).sum()
    }

    /// The exact transition over `dt > 0`.
    pub fn evolve<R: Rng + ?Sized>(&self, dt: f64, rng: &mut R) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
        }
        let rho = (-dt).exp();
        let noise = (-(-2.0 * dt).exp_m1()).sqrt();
        let mut next = self.clone();
        let n = self.n;
        for i in 0..n {
            for j in i..n {
                let k = packed(n, i, j);
                let sd = noise * entry_sd(i, j);
                next.re[k] = rho * self.re[k] + sd * rng.sample::<f64, _>(StandardNormal);
                if i != j {
                    next.im[k] = rho * self.im[k] + sd * rng.sample::<f64, _>(StandardNormal);
                }
            }
        }
        next.time = self.time + dt;
        Ok(next)
    }

    /// The real symmetric `2N x 2N` matrix `[[A, -B], [B, A]]` for `H = A + iB`.
    pub fn real_embedding(&self) -> Matrix<f64> {
        let n = self.n;
        Matrix::from_fn(2 * n, 2 * n, |r, c| {
            let (re, im) = self.get(r % n, c % n);
            match (r < n, c < n) {
                (true, true) | (false, false) => re,
                (true, false) => -im,
                (false, true) => im,
            }
        })
    }

    /// Eigenvalues, largest first.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        // every eigenvalue of the embedding appears twice
        let doubled = jacobi_eigenvalues(&self.real_embedding())?;
        Ok(doubled.into_iter().step_by(2).collect())
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, largest first.
pub fn jacobi_eigenvalues(a: &Matrix<f64>) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("Jacobi needs a square matrix".into()));
    }
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let off = |m: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i][j] * m[i][j];
                }
            }
        }
        s.sqrt()
    };
    let scale = a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let mut sweeps = 0;
    while off(&m) > JACOBI_TOLERANCE * scale {
        if sweeps == JACOBI_SWEEPS {
            return Err(Error::NoConvergence(sweeps));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    if m.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence(sweeps));
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    Ok(ev)
}

/// Sample mean and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Self {
            mean,
            stderr: (var / n).sqrt(),
            samples: values.len(),
        }
    }

    /// `(mean - reference) / stderr`, or 0 when both vanish.
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.mean - reference;
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

/// Runs one trajectory through `times` and returns the eigenvalues at each time.
pub fn trajectory<R: Rng + ?Sized>(n: usize, times: &[f64], rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let mut state = sample_stationary(n, rng)?;
    let mut out = Vec::with_capacity(times.len());
    for (k, w) in times.iter().enumerate() {
        if k > 0 {
            state = state.evolve(w - times[k - 1], rng)?;
        }
        out.push(state.eigenvalues()?);
    }
    Ok(out)
}

/// Monte-Carlo estimate of `E prod_i prod_j (1 - q_i(lambda_j(t_i)))`.
pub fn mc_functional_estimate(
    n: usize,
    times: &[f64],
    q: &[Profile],
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples < 100 {
        return Err(Error::InvalidArgument("need at least 100 samples".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("matrix size must be positive".into()));
    }
    if times.is_empty() || times.len() != q.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} times but {} functionals",
            times.len(),
            q.len()
        )));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("times must be strictly increasing".into()));
    }
    for p in q {
        p.validate()?;
    }
    let streams = SeededRng::new(seed);
    let values = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let path = trajectory(n, times, &mut streams.stream(i))?;
            Ok(path
                .iter()
                .zip(q)
                .map(|(ev, p)| ev.iter().map(|&x| p.complement(x)).product::<f64>())
                .product::<f64>())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(McEstimate::from_values(&values))
}
