//! Kernels of stationary GUE Dyson Brownian motion: harmonic oscillator
//! functions, the Hermite kernel, the Mehler propagator `exp(-tD)`, the
//! extended Hermite kernel, the multi-time identity between extended and
//! path-integral determinants, edge rescaling, and the Feynman-Kac product
//! `Gamma^{h,n}`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fredholm::{block_nystrom_determinant, Multiplier};
use crate::kernel::{Decay, Kernel};
use crate::linalg::{lu_determinant, Matrix};
use crate::operator::TimeGrid;
use crate::profile::Profile;
use crate::quadrature::QuadratureGrid;

/// `phi_0(x), ..., phi_{n-1}(x)` by the normalized three-term recurrence.
pub fn oscillator_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(PI.powf(-0.25) * (-x * x / 2.0).exp());
    if n > 1 {
        out.push(2f64.sqrt() * x * out[0]);
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        let next = (x * out[k] - (kf / 2.0).sqrt() * out[k - 1]) / ((kf + 1.0) / 2.0).sqrt();
        out.push(next);
    }
    out
}

/// The normalized oscillator function `phi_k(x)`.
pub fn oscillator_fn(k: usize, x: f64) -> f64 {
    oscillator_all(k + 1, x)[k]
}

/// `K_N(x, y) = sum_{k<N} phi_k(x) phi_k(y)`.
pub fn hermite_kernel(n: usize, x: f64, y: f64) -> f64 {
    forward_hermite(0.0, n, x, y)
}

/// The Christoffel-Darboux form of [`hermite_kernel`], for `x != y`.
pub fn christoffel_darboux(n: usize, x: f64, y: f64) -> f64 {
    let px = oscillator_all(n + 1, x);
    let py = oscillator_all(n + 1, y);
    (n as f64 / 2.0).sqrt() * (px[n] * py[n - 1] - px[n - 1] * py[n]) / (x - y)
}

/// `exp(tD) K_N (x, y) = sum_{k<N} exp(tk) phi_k(x) phi_k(y)`.
pub fn forward_hermite(t: f64, n: usize, x: f64, y: f64) -> f64 {
    let px = oscillator_all(n, x);
    let py = oscillator_all(n, y);
    px.iter()
        .zip(&py)
        .enumerate()
        .map(|(k, (a, b))| (t * k as f64).exp() * a * b)
        .sum()
}

fn mehler_unchecked(t: f64, x: f64, y: f64) -> f64 {
    let rho = (-t).exp();
    let one_minus = -(-2.0 * t).exp_m1();
    let expo = -((1.0 + rho * rho) * (x * x + y * y) - 4.0 * rho * x * y) / (2.0 * one_minus);
    expo.exp() / (PI * one_minus).sqrt()
}

/// `exp(-tD)(x, y)` in closed form with `rho = exp(-t)`.
pub fn mehler_propagator(t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "propagator time must be positive, got {t}"
        )));
    }
    Ok(mehler_unchecked(t, x, y))
}

/// The truncated spectral sum `sum_{k<terms} exp(-tk) phi_k(x) phi_k(y)`.
pub fn mehler_spectral(t: f64, terms: usize, x: f64, y: f64) -> f64 {
    forward_hermite(-t, terms, x, y)
}

/// The extended Hermite kernel `K^ext(s, x; t, y)`.
pub fn extended_hermite_kernel(n: usize, s: f64, x: f64, t: f64, y: f64) -> f64 {
    if s >= t {
        forward_hermite(s - t, n, x, y)
    } else {
        -(mehler_unchecked(t - s, x, y) - forward_hermite(s - t, n, x, y))
    }
}

/// The rescaled kernel `K_N` around the spectral edge `sqrt(2N)`.
pub fn rescaled_kernel(n: usize, x: f64, y: f64) -> f64 {
    let c = 2f64.sqrt() * (n as f64).powf(1.0 / 6.0);
    let e = (2.0 * n as f64).sqrt();
    hermite_kernel(n, x / c + e, y / c + e) / c
}

/// The potential `x + x^2 / (2 N^{2/3})` of the rescaled generator.
pub fn rescaled_generator_potential(n: usize, x: f64) -> f64 {
    x + x * x / (2.0 * (n as f64).powf(2.0 / 3.0))
}

/// `K_N` as a [`Kernel`].
#[derive(Clone, Copy, Debug)]
pub struct HermiteKernel {
    pub n: usize,
}

impl Kernel for HermiteKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        hermite_kernel(self.n, x, y)
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn decay(&self) -> Decay {
        Decay::Gaussian
    }
}

/// `exp(-tD)` as a [`Kernel`], `t > 0`.
#[derive(Clone, Copy, Debug)]
pub struct MehlerKernel {
    t: f64,
}

impl MehlerKernel {
    pub fn new(t: f64) -> Result<Self> {
        mehler_propagator(t, 0.0, 0.0)?;
        Ok(Self { t })
    }
}

impl Kernel for MehlerKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        mehler_unchecked(self.t, x, y)
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn decay(&self) -> Decay {
        Decay::Gaussian
    }
}

/// `exp(tD) K_N` as a [`Kernel`].
#[derive(Clone, Copy, Debug)]
pub struct ForwardHermiteKernel {
    pub n: usize,
    pub t: f64,
}

impl Kernel for ForwardHermiteKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        forward_hermite(self.t, self.n, x, y)
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn decay(&self) -> Decay {
        Decay::Gaussian
    }
}

/// `K^ext(s, .; t, .)` as a [`Kernel`].
#[derive(Clone, Copy, Debug)]
pub struct ExtendedHermiteKernel {
    pub n: usize,
    pub s: f64,
    pub t: f64,
}

impl Kernel for ExtendedHermiteKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        extended_hermite_kernel(self.n, self.s, x, self.t, y)
    }
    fn is_symmetric(&self) -> bool {
        self.s == self.t
    }
    fn decay(&self) -> Decay {
        Decay::Gaussian
    }
}

/// Inputs of [`gue_identity_check`]; `q[i]` acts at `times[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GueConfig {
    pub matrix_size: usize,
    pub times: Vec<f64>,
    pub q: Vec<Profile>,
    /// Gauss-Legendre nodes per unit-length panel.
    pub nodes: usize,
    /// Truncation window `[-domain, domain]`.
    pub domain: f64,
    pub tolerance: f64,
}

impl GueConfig {
    /// Indicator functionals `q_i = 1_{x > s_i}` with default grid settings.
    pub fn thresholds(matrix_size: usize, times: Vec<f64>, thresholds: &[f64]) -> Self {
        let d = crate::defaults::GUE;
        Self {
            matrix_size,
            times,
            q: thresholds.iter().map(|&s| Profile::indicator(s)).collect(),
            nodes: d.nodes,
            domain: d.domain,
            tolerance: d.tolerance,
        }
    }

    fn validate(&self) -> Result<TimeGrid> {
        if self.matrix_size == 0 {
            return Err(Error::InvalidArgument("matrix size must be positive".into()));
        }
        if self.q.len() != self.times.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} functionals",
                self.times.len(),
                self.q.len()
            )));
        }
        let tg = TimeGrid::new(self.times.clone())?;
        if tg.min_gap() < 0.1 {
            return Err(Error::InvalidArgument("time gaps must be at least 0.1".into()));
        }
        if self.nodes < 4 || !(self.domain > 0.0) {
            return Err(Error::InvalidArgument("need nodes >= 4 and domain > 0".into()));
        }
        for q in &self.q {
            q.validate()?;
        }
        Ok(tg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GueReport {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Largest change of either side between the base and refined grids.
    pub refinement: f64,
    pub nodes: usize,
    pub domain: f64,
}

/// The extended determinant `det(I - Q K^ext)` on per-time grids.
pub fn gue_extended_side(cfg: &GueConfig, nodes: usize) -> Result<f64> {
    let n = cfg.times.len();
    let l = cfg.domain;
    let grids = cfg
        .q
        .iter()
        .map(|q| {
            let a = q.support_start().filter(|a| *a > -l && *a < l).unwrap_or(-l);
            QuadratureGrid::panels(a, l, &q.breakpoints(), 1.0, nodes)
        })
        .collect::<Result<Vec<_>>>()?;
    let kernels: Vec<Vec<ExtendedHermiteKernel>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| ExtendedHermiteKernel {
                    n: cfg.matrix_size,
                    s: cfg.times[i],
                    t: cfg.times[j],
                })
                .collect()
        })
        .collect();
    let blocks: Vec<Vec<&dyn Kernel>> = kernels
        .iter()
        .map(|r| r.iter().map(|k| k as &dyn Kernel).collect())
        .collect();
    let fns: Vec<Box<dyn Fn(f64) -> f64 + Sync>> = cfg
        .q
        .iter()
        .map(|q| {
            let q = *q;
            Box::new(move |x| q.eval(x)) as Box<dyn Fn(f64) -> f64 + Sync>
        })
        .collect();
    let q: Vec<Multiplier<'_>> = fns.iter().map(|f| f.as_ref() as Multiplier<'_>).collect();
    block_nystrom_determinant(&blocks, &grids, &q)
}

fn weighted(grid: &QuadratureGrid, f: impl Fn(f64, f64) -> f64 + Sync) -> Matrix<f64> {
    let (x, sw) = (grid.nodes(), grid.sqrt_weights());
    let rows: Vec<Vec<f64>> = (0..x.len())
        .into_par_iter()
        .map(|a| (0..x.len()).map(|b| sw[a] * f(x[a], x[b]) * sw[b]).collect())
        .collect();
    Matrix::from_rows(rows).expect("square")
}

/// The path-integral determinant
/// `det(I - K + Qbar_1 e^{-(t_2-t_1)D} Qbar_2 ... Qbar_n e^{(t_n-t_1)D} K)`.
pub fn gue_path_integral_side(cfg: &GueConfig, nodes: usize) -> Result<f64> {
    let l = cfg.domain;
    let n = cfg.matrix_size;
    let breaks: Vec<f64> = cfg.q.iter().flat_map(|q| q.breakpoints()).collect();
    let grid = QuadratureGrid::panels(-l, l, &breaks, 1.0, nodes)?;
    let t = &cfg.times;
    let span = t[t.len() - 1] - t[0];
    let qbar = |i: usize| -> Vec<f64> { grid.nodes().iter().map(|&x| cfg.q[i].complement(x)).collect() };
    let ones = vec![1.0; grid.len()];
    let last = t.len() - 1;
    let mut chain = weighted(&grid, |x, y| forward_hermite(span, n, x, y)).scale_rows_cols(&qbar(last), &ones);
    for i in (0..last).rev() {
        let e = weighted(&grid, |x, y| mehler_unchecked(t[i + 1] - t[i], x, y));
        chain = (&e * &chain).scale_rows_cols(&qbar(i), &ones);
    }
    let k = weighted(&grid, |x, y| hermite_kernel(n, x, y));
    let m = &(&Matrix::identity(grid.len()) - &k) + &chain;
    Ok(lu_determinant(&m))
}

/// Evaluates both determinants on a base grid and a refined one; errors if
/// the refinement moves either side by more than the tolerance.
pub fn gue_identity_check(cfg: &GueConfig) -> Result<GueReport> {
    cfg.validate()?;
    let fine = cfg.nodes + cfg.nodes.div_ceil(2);
    let (lhs0, rhs0) = (gue_extended_side(cfg, cfg.nodes)?, gue_path_integral_side(cfg, cfg.nodes)?);
    let (lhs, rhs) = (gue_extended_side(cfg, fine)?, gue_path_integral_side(cfg, fine)?);
    let refinement = (lhs - lhs0).abs().max((rhs - rhs0).abs());
    if refinement > cfg.tolerance {
        return Err(Error::Tolerance(format!(
            "grid refinement changed the determinants by {refinement:e}; increase nodes or domain"
        )));
    }
    let diff = (lhs - rhs).abs();
    Ok(GueReport {
        lhs,
        rhs,
        diff,
        tolerance: cfg.tolerance,
        pass: diff <= cfg.tolerance,
        refinement,
        nodes: fine,
        domain: cfg.domain,
    })
}

/// Maximum residuals of the semigroup, right-invertibility and reversibility
/// laws for `exp(-tD)` and `K_N`, by quadrature on `grid`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructuralResiduals {
    pub semigroup: f64,
    pub right_inverse: f64,
    pub reversibility: f64,
}

impl StructuralResiduals {
    pub fn max(&self) -> f64 {
        self.semigroup.max(self.right_inverse).max(self.reversibility)
    }
}

/// Compares compositions on `grid` at the probe points `probe`.
pub fn hermite_structural_residuals(
    n: usize,
    s: f64,
    t: f64,
    grid: &QuadratureGrid,
    probe: &[f64],
) -> Result<StructuralResiduals> {
    let compose = |f: &dyn Fn(f64, f64) -> f64, g: &dyn Fn(f64, f64) -> f64, x: f64, y: f64| {
        grid.integrate(|z| f(x, z) * g(z, y))
    };
    let es = MehlerKernel::new(s)?;
    let et = MehlerKernel::new(t)?;
    let est = MehlerKernel::new(s + t)?;
    let k = HermiteKernel { n };
    let fwd = ForwardHermiteKernel { n, t };
    let mut r = StructuralResiduals {
        semigroup: 0.0,
        right_inverse: 0.0,
        reversibility: 0.0,
    };
    for &x in probe {
        for &y in probe {
            let a = compose(&|u, v| es.eval(u, v), &|u, v| et.eval(u, v), x, y);
            r.semigroup = r.semigroup.max((a - est.eval(x, y)).abs());
            let b = compose(&|u, v| et.eval(u, v), &|u, v| fwd.eval(u, v), x, y);
            r.right_inverse = r.right_inverse.max((b - k.eval(x, y)).abs());
            let c = compose(&|u, v| et.eval(u, v), &|u, v| k.eval(u, v), x, y);
            let d = compose(&|u, v| k.eval(u, v), &|u, v| et.eval(u, v), x, y);
            r.reversibility = r.reversibility.max((c - d).abs());
        }
    }
    Ok(r)
}

/// The edge probe lattice `{-2, -1, 0, 1, 2}^2`.
pub const EDGE_PROBES: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

/// `max |K~_N - K_Ai|` over the probe lattice.
pub fn edge_deviation(n: usize) -> f64 {
    let mut m = 0.0f64;
    for &x in &EDGE_PROBES {
        for &y in &EDGE_PROBES {
            m = m.max((rescaled_kernel(n, x, y) - crate::airy2::airy2_kernel(x, y)).abs());
        }
    }
    m
}

/// The product `Gamma^{h,n} = Q_1 e^{-delta D} Q_2 ... e^{-delta D} Q_n` with
/// `q = 1 - delta h`, represented in the first `modes` oscillator functions.
#[derive(Clone, Debug)]
pub struct ContinuumGamma {
    /// `Gamma_{ab} = <phi_a, Gamma phi_b>`.
    pub coefficients: Matrix<f64>,
    pub span: f64,
    pub steps: usize,
}

/// Galerkin resolution of [`continuum_gamma`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinSettings {
    pub modes: usize,
    pub per_panel: usize,
}

impl Default for GalerkinSettings {
    fn default() -> Self {
        Self {
            modes: 128,
            per_panel: 24,
        }
    }
}

fn power(m: &Matrix<f64>, mut e: usize) -> Matrix<f64> {
    let mut base = m.clone();
    let mut acc = Matrix::identity(m.rows());
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// Assembles `Gamma^{h,n}` on `[l, r]` with `steps` equally spaced times
/// including both endpoints.
pub fn continuum_gamma(l: f64, r: f64, h: &Profile, steps: usize, settings: GalerkinSettings) -> Result<ContinuumGamma> {
    if steps < 2 {
        return Err(Error::InvalidArgument("need at least two steps".into()));
    }
    if !(r > l) {
        return Err(Error::InvalidArgument(format!("need l < r, got [{l}, {r}]")));
    }
    h.validate()?;
    let delta = (r - l) / (steps - 1) as f64;
    let coarse = delta * h.sup_abs();
    if coarse >= 1.0 {
        return Err(Error::StepTooCoarse(coarse));
    }
    let m = settings.modes;
    let reach = (2.0 * m as f64 + 1.0).sqrt() + 8.0;
    let grid = QuadratureGrid::panels(-reach, reach, &h.breakpoints(), 0.5, settings.per_panel)?;
    let basis: Vec<Vec<f64>> = grid.nodes().par_iter().map(|&x| oscillator_all(m, x)).collect();
    let wq: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .map(|(&x, w)| w * (1.0 - delta * h.eval(x)))
        .collect();
    let q = Matrix::from_fn(m, m, |a, b| {
        basis.iter().zip(&wq).map(|(p, w)| w * p[a] * p[b]).sum()
    });
    let decay: Vec<f64> = (0..m).map(|k| (-delta * k as f64).exp()).collect();
    let ones = vec![1.0; m];
    let eq = q.scale_rows_cols(&decay, &ones);
    let coefficients = &q * &power(&eq, steps - 1);
    Ok(ContinuumGamma {
        coefficients,
        span: r - l,
        steps,
    })
}

impl ContinuumGamma {
    /// `det(I - K_N + Gamma e^{(r-l)D} K_N)`.
    pub fn statistic(&self, n: usize) -> f64 {
        let g = &self.coefficients;
        let m = Matrix::from_fn(n, n, |i, j| g[(i, j)] * (self.span * j as f64).exp());
        lu_determinant(&m)
    }

    /// The kernel `Gamma(x, y)` at the nodes of `grid`.
    pub fn on_grid(&self, grid: &QuadratureGrid) -> Matrix<f64> {
        let m = self.coefficients.rows();
        let basis: Vec<Vec<f64>> = grid.nodes().iter().map(|&x| oscillator_all(m, x)).collect();
        let left: Vec<Vec<f64>> = basis
            .iter()
            .map(|p| (0..m).map(|b| (0..m).map(|a| p[a] * self.coefficients[(a, b)]).sum()).collect())
            .collect();
        Matrix::from_fn(grid.len(), grid.len(), |i, j| {
            left[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum()
        })
    }
}
