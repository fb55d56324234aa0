//! The Airy2 kernel, the Airy propagators `exp(-tH)` and `exp(tH) K_Ai` for
//! `H = -d^2/dx^2 + x`, the extended Airy kernel, the multi-time identity
//! between extended and path-integral determinants, Tracy-Widom marginals
//! and the continuum (Feynman-Kac) statistic.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::{airy_pair, taylor_coefficients};
use crate::error::{Error, Result};
use crate::fredholm::ConjugationPair;
use crate::hermite::StructuralResiduals;
use crate::kernel::{Decay, Kernel};
use crate::linalg::{lu_determinant, Matrix};
use crate::operator::TimeGrid;
use crate::profile::Profile;
use crate::quadrature::{gauss_legendre, QuadratureGrid};

/// Relative size below which integrand tails are dropped (`exp(-37)`).
const TAIL_LOG: f64 = -37.0;
/// Most negative spectral parameter accepted by [`extended_airy_kernel`].
const LAMBDA_FLOOR: f64 = -1000.0;
const LAMBDA_PANEL: f64 = 0.5;
const LAMBDA_NODES: usize = 16;

/// `K_Ai(x, y)` from the closed form, with a Taylor expansion near the diagonal.
pub fn airy2_kernel(x: f64, y: f64) -> f64 {
    let h = y - x;
    if h.abs() < 0.5 {
        let (a0, a1) = airy_pair(x);
        let a = taylor_coefficients(x, a0, a1, 40);
        let mut sum = 0.0;
        for m in (1..a.len() - 1).rev() {
            sum = sum * h + (a0 * (m + 1) as f64 * a[m + 1] - a1 * a[m]);
        }
        -sum
    } else {
        let (ax, dx) = airy_pair(x);
        let (ay, dy) = airy_pair(y);
        (ax * dy - dx * ay) / (x - y)
    }
}

/// Log of an upper envelope of `|Ai(u)|`.
fn log_envelope(u: f64) -> f64 {
    if u > 0.0 {
        -(2.0 / 3.0) * u * u.sqrt()
    } else {
        0.0
    }
}

/// Smallest `L >= 0` beyond which `exp(growth * l) |Ai(x + l) Ai(y + l)|` stays
/// below `exp(TAIL_LOG)`, for all `x >= xmin`, `y >= ymin`.
fn lambda_cutoff(xmin: f64, ymin: f64, growth: f64) -> f64 {
    let f = |l: f64| growth * l + log_envelope(xmin + l) + log_envelope(ymin + l);
    let mut l = 0.0;
    loop {
        // f is concave beyond the turning points, so once below and falling it stays below
        if f(l) <= TAIL_LOG && f(l + 0.25) <= f(l) {
            return l;
        }
        l += 0.25;
    }
}

fn lambda_rule(lo: f64, hi: f64) -> QuadratureGrid {
    QuadratureGrid::panels(lo, hi, &[], LAMBDA_PANEL, LAMBDA_NODES).expect("valid interval")
}

/// `int_lo^hi weight(l) Ai(x + l) Ai(y + l) dl` by composite quadrature.
fn airy_integral(x: f64, y: f64, lo: f64, hi: f64, weight: impl Fn(f64) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    lambda_rule(lo, hi).integrate(|l| weight(l) * airy_pair(x + l).0 * airy_pair(y + l).0)
}

/// `K_Ai(x, y) = int_0^inf Ai(x + l) Ai(y + l) dl` by quadrature.
pub fn airy2_kernel_spectral(x: f64, y: f64) -> f64 {
    let hi = lambda_cutoff(x, y, 0.0);
    airy_integral(x, y, 0.0, hi, |_| 1.0)
}

fn propagator_unchecked(t: f64, x: f64, y: f64) -> f64 {
    let d = x - y;
    (-d * d / (4.0 * t) - t * (x + y) / 2.0 + t * t * t / 12.0).exp() / (4.0 * PI * t).sqrt()
}

/// `exp(-tH)(x, y)` in closed form, `t > 0`.
pub fn airy_propagator(t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "propagator time must be positive, got {t}"
        )));
    }
    Ok(propagator_unchecked(t, x, y))
}

/// `exp(-tH)(x, y) = int_R exp(l t) Ai(x + l) Ai(y + l) dl` by quadrature.
pub fn airy_propagator_spectral(t: f64, x: f64, y: f64) -> Result<f64> {
    airy_propagator(t, x, y)?;
    let lo = (TAIL_LOG / t).max(LAMBDA_FLOOR);
    let hi = lambda_cutoff(x, y, t);
    Ok(airy_integral(x, y, lo, hi, |l| (l * t).exp()))
}

/// `exp(tH) K_Ai (x, y) = int_0^inf exp(-l t) Ai(x + l) Ai(y + l) dl`; for
/// `t < 0` this is `exp(-|t| H) K_Ai`.
pub fn forward_on_range(t: f64, x: f64, y: f64) -> f64 {
    if t == 0.0 {
        return airy2_kernel(x, y);
    }
    let hi = lambda_cutoff(x, y, -t);
    airy_integral(x, y, 0.0, hi, |l| (-l * t).exp())
}

/// The extended Airy kernel `K^ext(s, x; t, y)` by direct quadrature of the
/// spectral integrals; errors if the `s < t` tail cannot be truncated.
pub fn extended_airy_kernel(s: f64, x: f64, t: f64, y: f64) -> Result<f64> {
    if s >= t {
        return Ok(forward_on_range(s - t, x, y));
    }
    let tau = t - s;
    let lo = TAIL_LOG / tau;
    if lo < LAMBDA_FLOOR {
        return Err(Error::Tolerance(format!(
            "time gap {tau} needs spectral cutoff {lo} below {LAMBDA_FLOOR}"
        )));
    }
    Ok(-airy_integral(x, y, lo, 0.0, |l| (l * tau).exp()))
}

/// `K_Ai` as a [`Kernel`].
#[derive(Clone, Copy, Debug, Default)]
pub struct AiryKernel;

impl Kernel for AiryKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        airy2_kernel(x, y)
    }
    fn is_symmetric(&self) -> bool {
        true
    }
    fn decay(&self) -> Decay {
        Decay::SuperExponential
    }
}

/// `Ai(x_a + l_k)` for the nodes `x_a` of a grid and the nodes `l_k` of a
/// spectral rule on `[0, L]`.
struct AiryTable {
    values: Matrix<f64>,
}

impl AiryTable {
    fn new(xs: &[f64], lambda: &QuadratureGrid) -> Self {
        let ls = lambda.nodes();
        let rows: Vec<Vec<f64>> = xs
            .par_iter()
            .map(|&x| ls.iter().map(|&l| airy_pair(x + l).0).collect())
            .collect();
        Self {
            values: Matrix::from_rows(rows).expect("rectangular"),
        }
    }

    /// `sum_k w_k weight(l_k) Ai(x_a + l_k) Ai(y_b + l_k)`.
    fn gram(&self, other: &Self, lambda: &QuadratureGrid, weight: impl Fn(f64) -> f64) -> Matrix<f64> {
        let w: Vec<f64> = lambda
            .nodes()
            .iter()
            .zip(lambda.weights())
            .map(|(&l, w)| w * weight(l))
            .collect();
        let ones = vec![1.0; self.values.rows()];
        &self.values.scale_rows_cols(&ones, &w) * &other.values.transpose()
    }
}

/// `sqrt(w_a) k(x_a, y_b) sqrt(w_b)`.
fn weighted(rows: &QuadratureGrid, cols: &QuadratureGrid, k: impl Fn(f64, f64) -> f64 + Sync) -> Matrix<f64> {
    let (x, y) = (rows.nodes(), cols.nodes());
    let (sr, sc) = (rows.sqrt_weights(), cols.sqrt_weights());
    let data: Vec<Vec<f64>> = (0..x.len())
        .into_par_iter()
        .map(|a| (0..y.len()).map(|b| sr[a] * k(x[a], y[b]) * sc[b]).collect())
        .collect();
    Matrix::from_rows(data).expect("rectangular")
}

fn scale_weighted(m: &Matrix<f64>, rows: &QuadratureGrid, cols: &QuadratureGrid) -> Matrix<f64> {
    m.scale_rows_cols(&rows.sqrt_weights(), &cols.sqrt_weights())
}

/// Truncation window and panel resolution for Airy determinants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AiryWindow {
    pub left: f64,
    pub right: f64,
    pub panel: f64,
    pub per_panel: usize,
}

impl AiryWindow {
    fn validate(&self) -> Result<()> {
        if !(self.left < self.right) || !(self.panel > 0.0) || self.per_panel < 2 {
            return Err(Error::InvalidArgument(format!("bad Airy window {self:?}")));
        }
        Ok(())
    }

    fn refined(&self) -> Self {
        Self {
            per_panel: self.per_panel + self.per_panel.div_ceil(2),
            ..*self
        }
    }

    fn grid(&self, a: f64, breaks: &[f64]) -> Result<QuadratureGrid> {
        QuadratureGrid::panels(a, self.right, breaks, self.panel, self.per_panel)
    }
}

/// Extra room left of the window for intermediate variables propagated over `tau`.
fn left_margin(tau: f64) -> f64 {
    let b = -TAIL_LOG * 4.0;
    tau * tau + (tau.powi(4) + b * tau).sqrt()
}

/// Inputs of [`airy2_identity_check`]; `q[i]` acts at `times[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Airy2Config {
    pub times: Vec<f64>,
    pub q: Vec<Profile>,
    pub window: AiryWindow,
    pub tolerance: f64,
}

impl Airy2Config {
    /// Indicator functionals `q_i = 1_{x > s_i}` with default grid settings.
    pub fn thresholds(times: Vec<f64>, thresholds: &[f64]) -> Self {
        let d = crate::defaults::AIRY2;
        Self {
            times,
            q: thresholds.iter().map(|&s| Profile::indicator(s)).collect(),
            window: d.window,
            tolerance: d.tolerance,
        }
    }

    fn validate(&self) -> Result<TimeGrid> {
        if self.q.len() != self.times.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} times but {} functionals",
                self.times.len(),
                self.q.len()
            )));
        }
        let tg = TimeGrid::new(self.times.clone())?;
        if tg.min_gap() < 0.3 {
            return Err(Error::InvalidArgument("time gaps must be at least 0.3".into()));
        }
        self.window.validate()?;
        for q in &self.q {
            q.validate()?;
            if matches!(q, Profile::Constant { .. }) && !q.is_zero() {
                return Err(Error::InvalidArgument(
                    "constant multipliers are outside the Airy growth class".into(),
                ));
            }
        }
        Ok(tg)
    }

    /// The conjugation `psi(x) = exp(-r x / 2)` for `x >= 0`,
    /// `(1 + x^2)^{1/2}` for `x < 0`, with `r` half the smallest gap.
    pub fn conjugation(&self) -> ConjugationPair<'static> {
        let gap = TimeGrid::new(self.times.clone()).map(|t| t.min_gap()).unwrap_or(0.0);
        let r = if gap.is_finite() { gap / 2.0 } else { 0.0 };
        ConjugationPair::reciprocal(move |x: f64| {
            if x >= 0.0 {
                (-r * x / 2.0).exp()
            } else {
                (1.0 + x * x).sqrt()
            }
        })
    }

    fn breaks(&self) -> Vec<f64> {
        self.q.iter().flat_map(|q| q.breakpoints()).collect()
    }
}

/// `psi(x_a) m_ab / psi(y_b)`.
fn conjugate(m: &Matrix<f64>, rows: &[f64], cols: &[f64], pair: &ConjugationPair<'_>) -> Matrix<f64> {
    let l: Vec<f64> = rows.iter().map(|&x| (pair.u)(x)).collect();
    let r: Vec<f64> = cols.iter().map(|&y| (pair.u_prime)(y)).collect();
    m.scale_rows_cols(&l, &r)
}

/// The extended determinant `det(I - Q K^ext)` on per-time grids over each
/// functional's support.
pub fn airy2_extended_side(cfg: &Airy2Config, window: &AiryWindow) -> Result<f64> {
    let n = cfg.times.len();
    let t = &cfg.times;
    let grids = cfg
        .q
        .iter()
        .map(|q| {
            let a = q
                .support_start()
                .filter(|a| *a > window.left && *a < window.right)
                .unwrap_or(window.left);
            window.grid(a, &q.breakpoints())
        })
        .collect::<Result<Vec<_>>>()?;
    let xmin = grids.iter().map(|g| g.nodes()[0]).fold(f64::INFINITY, f64::min);
    let span = t[n - 1] - t[0];
    let lambda = lambda_rule(0.0, lambda_cutoff(xmin, xmin, span).max(LAMBDA_PANEL));
    let tables: Vec<AiryTable> = grids.iter().map(|g| AiryTable::new(g.nodes(), &lambda)).collect();
    let pair = cfg.conjugation();
    let mut blocks = Vec::with_capacity(n);
    for i in 0..n {
        let qi: Vec<f64> = grids[i].nodes().iter().map(|&x| cfg.q[i].eval(x)).collect();
        let mut row = Vec::with_capacity(n);
        for j in 0..n {
            let (gi, gj) = (&grids[i], &grids[j]);
            let b = if i == j {
                weighted(gi, gj, airy2_kernel)
            } else if i > j {
                let d = t[i] - t[j];
                scale_weighted(&tables[i].gram(&tables[j], &lambda, |l| (-l * d).exp()), gi, gj)
            } else {
                let tau = t[j] - t[i];
                let back = scale_weighted(&tables[i].gram(&tables[j], &lambda, |l| (l * tau).exp()), gi, gj);
                &back - &weighted(gi, gj, |x, y| propagator_unchecked(tau, x, y))
            };
            let b = conjugate(&b, gi.nodes(), gj.nodes(), &pair);
            let qb = b.scale_rows_cols(&qi, &vec![1.0; b.cols()]);
            row.push(if i == j {
                &Matrix::identity(qb.rows()) - &qb
            } else {
                qb.scale(&-1.0)
            });
        }
        blocks.push(row);
    }
    Ok(lu_determinant(&Matrix::from_blocks(&blocks)?))
}

/// The path-integral determinant
/// `det(I - K_Ai + Qbar_1 e^{-(t_2-t_1)H} Qbar_2 ... Qbar_n e^{(t_n-t_1)H} K_Ai)`.
pub fn airy2_path_integral_side(cfg: &Airy2Config, window: &AiryWindow) -> Result<f64> {
    path_integral_with(cfg, window, &cfg.conjugation())
}

fn path_integral_with(cfg: &Airy2Config, window: &AiryWindow, pair: &ConjugationPair<'_>) -> Result<f64> {
    let t = &cfg.times;
    let n = t.len();
    let span = t[n - 1] - t[0];
    let reach = (1..n)
        .filter(|&i| !cfg.q[i].is_zero())
        .map(|i| cfg.q[i].support_start().unwrap_or(window.left).max(window.left))
        .fold(f64::INFINITY, f64::min);
    let outer_left = if reach.is_finite() {
        window.left.min(reach - left_margin(span))
    } else {
        window.left
    };
    let outer = window.grid(outer_left, &cfg.breaks())?;
    // time 0 acts on the outer variable; later times on their supports
    let grids = (0..n)
        .map(|i| {
            if i == 0 {
                return Ok(Some(outer.clone()));
            }
            let q = &cfg.q[i];
            match q.support_start() {
                _ if q.is_zero() => Ok(None),
                Some(a) if a >= window.right => Ok(None),
                Some(a) => window.grid(a.max(window.left), &q.breakpoints()).map(Some),
                None => window.grid(window.left, &q.breakpoints()).map(Some),
            }
        })
        .collect::<Result<Vec<Option<QuadratureGrid>>>>()?;
    let active: Vec<usize> = (0..n)
        .filter(|&i| grids[i].is_some() && !cfg.q[i].is_zero())
        .collect();
    let xmin = grids.iter().flatten().map(|g| g.nodes()[0]).fold(f64::INFINITY, f64::min);
    let lambda = lambda_rule(0.0, lambda_cutoff(xmin, outer.nodes()[0], 0.0).max(LAMBDA_PANEL));
    let tables: Vec<Option<AiryTable>> = grids
        .iter()
        .map(|g| g.as_ref().map(|g| AiryTable::new(g.nodes(), &lambda)))
        .collect();
    let q_on = |i: usize| -> Vec<f64> {
        let g = grids[i].as_ref().expect("active");
        g.nodes().iter().map(|&x| cfg.q[i].eval(x)).collect()
    };
    let ones = vec![1.0; outer.len()];
    // K - Qbar_1 W Qbar_2 ... Qbar_n W K = sum over nonempty S of (-1)^{|S|+1} T_S
    let mut m = Matrix::zeros(outer.len(), outer.len());
    for mask in 1u32..(1u32 << active.len()) {
        let s: Vec<usize> = active
            .iter()
            .enumerate()
            .filter(|(b, _)| mask & (1 << b) != 0)
            .map(|(_, &i)| i)
            .collect();
        let last = s[s.len() - 1];
        let gl = grids[last].as_ref().expect("active");
        let mut cur = if last == 0 {
            weighted(&outer, &outer, airy2_kernel)
        } else {
            let tau = t[last] - t[0];
            let tl = tables[last].as_ref().expect("active");
            scale_weighted(&tl.gram(tables[0].as_ref().expect("outer"), &lambda, |l| (-l * tau).exp()), gl, &outer)
        }
        .scale_rows_cols(&q_on(last), &ones);
        for w in s.windows(2).rev() {
            let (a, b) = (w[0], w[1]);
            let (ga, gb) = (grids[a].as_ref().expect("active"), grids[b].as_ref().expect("active"));
            let e = weighted(ga, gb, |x, y| propagator_unchecked(t[b] - t[a], x, y));
            cur = (&e * &cur).scale_rows_cols(&q_on(a), &ones);
        }
        if s[0] != 0 {
            let g0 = grids[s[0]].as_ref().expect("active");
            let e = weighted(&outer, g0, |x, y| propagator_unchecked(t[s[0]] - t[0], x, y));
            cur = &e * &cur;
        }
        m = if s.len() % 2 == 1 { &m + &cur } else { &m - &cur };
    }
    let m = conjugate(&m, outer.nodes(), outer.nodes(), pair);
    Ok(lu_determinant(&(&Matrix::identity(outer.len()) - &m)))
}

/// The path-integral determinant with the product `Qbar_1 W Qbar_2 ... W K`
/// formed directly on one grid extended to the left of the window.
pub fn airy2_path_integral_direct(cfg: &Airy2Config, window: &AiryWindow) -> Result<f64> {
    let t = &cfg.times;
    let n = t.len();
    let breaks = cfg.breaks();
    let outer = window.grid(window.left, &breaks)?;
    let kmat = weighted(&outer, &outer, airy2_kernel);
    let qbar = |i: usize, g: &QuadratureGrid| -> Vec<f64> {
        g.nodes().iter().map(|&x| cfg.q[i].complement(x)).collect()
    };
    let ones = vec![1.0; outer.len()];
    let chain = if n == 1 {
        kmat.scale_rows_cols(&qbar(0, &outer), &ones)
    } else {
        let span = t[n - 1] - t[0];
        let widest = t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let mut cuts = breaks.clone();
        cuts.push(window.left);
        let inter = window.grid(window.left - left_margin(widest), &cuts)?;
        let lambda = lambda_rule(0.0, lambda_cutoff(inter.nodes()[0], outer.nodes()[0], -span).max(LAMBDA_PANEL));
        let (ti, to) = (AiryTable::new(inter.nodes(), &lambda), AiryTable::new(outer.nodes(), &lambda));
        let fk = scale_weighted(&ti.gram(&to, &lambda, |l| (-l * span).exp()), &inter, &outer);
        let mut cur = fk.scale_rows_cols(&qbar(n - 1, &inter), &ones);
        for k in (1..n - 1).rev() {
            let tau = t[k + 1] - t[k];
            let e = weighted(&inter, &inter, |x, y| propagator_unchecked(tau, x, y));
            cur = (&e * &cur).scale_rows_cols(&qbar(k, &inter), &ones);
        }
        let e = weighted(&outer, &inter, |x, y| propagator_unchecked(t[1] - t[0], x, y));
        (&e * &cur).scale_rows_cols(&qbar(0, &outer), &ones)
    };
    let m = conjugate(&(&kmat - &chain), outer.nodes(), outer.nodes(), &cfg.conjugation());
    Ok(lu_determinant(&(&Matrix::identity(outer.len()) - &m)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Airy2Report {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Largest change of either side between the base and refined grids.
    pub refinement: f64,
    pub window: AiryWindow,
}

/// Evaluates both determinants on a base and a refined grid; errors if the
/// refinement moves either side by more than the tolerance.
pub fn airy2_identity_check(cfg: &Airy2Config) -> Result<Airy2Report> {
    cfg.validate()?;
    let fine = cfg.window.refined();
    let lhs0 = airy2_extended_side(cfg, &cfg.window)?;
    let rhs0 = airy2_path_integral_side(cfg, &cfg.window)?;
    let lhs = airy2_extended_side(cfg, &fine)?;
    let rhs = airy2_path_integral_side(cfg, &fine)?;
    let refinement = (lhs - lhs0).abs().max((rhs - rhs0).abs());
    if refinement > cfg.tolerance {
        return Err(Error::Tolerance(format!(
            "grid refinement changed the determinants by {refinement:e}; widen or refine the window"
        )));
    }
    let diff = (lhs - rhs).abs();
    Ok(Airy2Report {
        lhs,
        rhs,
        diff,
        tolerance: cfg.tolerance,
        pass: diff <= cfg.tolerance,
        refinement,
        window: fine,
    })
}

/// Right end of the truncated interval used for Tracy-Widom marginals.
pub fn tracy_widom_right(s: f64) -> f64 {
    s.max(0.0) + 10.0
}

/// `F_2(s) = det(I - K_Ai)` on `L^2(s, inf)`, by an `m`-point Gauss-Legendre
/// rule on `[s, s_+ + 10]`.
pub fn tracy_widom_marginal(s: f64, m: usize) -> Result<f64> {
    if !(-8.0..=6.0).contains(&s) {
        return Err(Error::OutOfWindow {
            value: s,
            lo: -8.0,
            hi: 6.0,
        });
    }
    let g = gauss_legendre(m, s, tracy_widom_right(s))?;
    let k = weighted(&g, &g, airy2_kernel);
    Ok(lu_determinant(&(&Matrix::identity(g.len()) - &k)))
}

/// Residuals of the semigroup, right-invertibility and reversibility laws for
/// `exp(-tH)` and `K_Ai` at `probe` points, with the conjugation `psi`
/// applied to both arguments.
pub fn airy_structural_residuals(s: f64, t: f64, probe: &[f64], pair: &ConjugationPair<'_>) -> Result<StructuralResiduals> {
    airy_propagator(s, 0.0, 0.0)?;
    airy_propagator(t, 0.0, 0.0)?;
    let lo = probe.iter().copied().fold(f64::INFINITY, f64::min) - left_margin(s + t);
    let hi = probe.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 12.0;
    let z = QuadratureGrid::panels(lo, hi, &[], 0.5, 24)?;
    let lambda = lambda_rule(0.0, lambda_cutoff(lo, lo, t).max(LAMBDA_PANEL));
    let tz = AiryTable::new(z.nodes(), &lambda);
    let tp = AiryTable::new(probe, &lambda);
    let fwd = tz.gram(&tp, &lambda, |l| (-l * t).exp()); // exp(tH)K(z, y)
    let conj = |x: f64, y: f64, v: f64| (pair.u)(x) * v * (pair.u_prime)(y);
    let mut r = StructuralResiduals {
        semigroup: 0.0,
        right_inverse: 0.0,
        reversibility: 0.0,
    };
    let zn = z.nodes();
    let zw = z.weights();
    for (a, &x) in probe.iter().enumerate() {
        let _ = a;
        for (b, &y) in probe.iter().enumerate() {
            let mut semi = 0.0;
            let mut inv = 0.0;
            let mut left = 0.0;
            let mut right = 0.0;
            for c in 0..zn.len() {
                let zc = zn[c];
                let ex = propagator_unchecked(t, x, zc);
                semi += zw[c] * propagator_unchecked(s, x, zc) * propagator_unchecked(t, zc, y);
                inv += zw[c] * ex * fwd[(c, b)];
                left += zw[c] * ex * airy2_kernel(zc, y);
                right += zw[c] * airy2_kernel(x, zc) * propagator_unchecked(t, zc, y);
            }
            let semi_ref = propagator_unchecked(s + t, x, y);
            r.semigroup = r.semigroup.max(conj(x, y, semi - semi_ref).abs());
            r.right_inverse = r.right_inverse.max(conj(x, y, inv - airy2_kernel(x, y)).abs());
            r.reversibility = r.reversibility.max(conj(x, y, left - right).abs());
        }
    }
    Ok(r)
}

fn power(m: &Matrix<f64>, mut e: usize) -> Matrix<f64> {
    let mut base = m.clone();
    let mut acc: Option<Matrix<f64>> = None;
    while e > 0 {
        if e & 1 == 1 {
            acc = Some(match acc {
                Some(a) => &a * &base,
                None => base.clone(),
            });
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    acc.unwrap_or_else(|| Matrix::identity(m.rows()))
}

/// `det(I - K_Ai + Gamma^{h,n} e^{(r-l)H} K_Ai)` where
/// `Gamma^{h,n} = Q_1 e^{-delta H} Q_2 ... Q_n`, `q = 1 - delta h`, on `steps`
/// equally spaced times in `[l, r]`.
pub fn continuum_airy_statistics(l: f64, r: f64, h: &Profile, steps: usize, window: &AiryWindow) -> Result<f64> {
    if steps < 2 {
        return Err(Error::InvalidArgument("need at least two steps".into()));
    }
    if !(r > l) {
        return Err(Error::InvalidArgument(format!("need l < r, got [{l}, {r}]")));
    }
    h.validate()?;
    window.validate()?;
    if matches!(h, Profile::Constant { .. }) && !h.is_zero() {
        return Err(Error::InvalidArgument(
            "h must vanish to the left of some level".into(),
        ));
    }
    let span = r - l;
    let delta = span / (steps - 1) as f64;
    let coarse = delta * h.sup_abs();
    if coarse >= 1.0 {
        return Err(Error::StepTooCoarse(coarse));
    }
    let mut cuts = h.breakpoints();
    cuts.push(window.left);
    let z = window.grid(window.left - left_margin(span), &cuts)?;
    let first = z.nodes().iter().position(|&x| x >= window.left).unwrap_or(0);
    let outer = window.grid(window.left, &h.breakpoints())?;
    debug_assert_eq!(outer.len(), z.len() - first);
    let q: Vec<f64> = z.nodes().iter().map(|&x| 1.0 - delta * h.eval(x)).collect();
    let ones = vec![1.0; z.len()];
    let e = weighted(&z, &z, |x, y| propagator_unchecked(delta, x, y));
    let step = e.scale_rows_cols(&ones, &q);
    let gamma = power(&step, steps - 1).scale_rows_cols(&q, &ones);
    let lambda = lambda_rule(0.0, lambda_cutoff(z.nodes()[0], outer.nodes()[0], -span).max(LAMBDA_PANEL));
    let (tz, to) = (AiryTable::new(z.nodes(), &lambda), AiryTable::new(outer.nodes(), &lambda));
    let fk = scale_weighted(&tz.gram(&to, &lambda, |x| (-x * span).exp()), &z, &outer);
    let rows = Matrix::from_fn(outer.len(), z.len(), |a, b| gamma[(first + a, b)]);
    let gfk = &rows * &fk;
    let kmat = weighted(&outer, &outer, airy2_kernel);
    let m = &(&Matrix::identity(outer.len()) - &kmat) + &gfk;
    Ok(lu_determinant(&m))
}

/// Values of the continuum statistic along a doubling sequence of steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub steps: Vec<usize>,
    pub values: Vec<f64>,
    /// `|v_{k+1} - v_k| / |v_{k+1}|`.
    pub relative_changes: Vec<f64>,
}

impl RefinementStudy {
    pub fn from_values(steps: Vec<usize>, values: Vec<f64>) -> Self {
        let relative_changes = values.windows(2).map(|w| ((w[1] - w[0]) / w[1]).abs()).collect();
        Self {
            steps,
            values,
            relative_changes,
        }
    }

    /// Whether the last two values agree to `digits` significant digits,
    /// i.e. their relative difference is at most `5 * 10^-digits`.
    pub fn stable_to(&self, digits: i32) -> bool {
        self.relative_changes
            .last()
            .is_some_and(|&c| c <= 5.0 * 10f64.powi(-digits))
    }
}

pub fn continuum_airy_study(l: f64, r: f64, h: &Profile, steps: &[usize], window: &AiryWindow) -> Result<RefinementStudy> {
    let values = steps
        .iter()
        .map(|&n| continuum_airy_statistics(l, r, h, n, window))
        .collect::<Result<Vec<_>>>()?;
    Ok(RefinementStudy::from_values(steps.to_vec(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy::airy_all;

    const PROBE: f64 = 0.054_316_750_484_867_373;
    const K01: f64 = 0.021_485_503_837_037_955;

    fn window() -> AiryWindow {
        crate::defaults::AIRY2.window
    }

    #[test]
    fn kernel_routes_agree() {
        assert!((airy2_kernel_spectral(0.0, 1.0) - K01).abs() < 1e-11);
        assert!((airy2_kernel(0.0, 1.0) - K01).abs() < 1e-12);
        let mut x = -6.0;
        while x <= 4.0 {
            let mut y = -6.0;
            while y <= 4.0 {
                let c = airy2_kernel(x, y);
                assert_eq!(c, airy2_kernel(x, y));
                assert!((c - airy2_kernel(y, x)).abs() < 1e-13);
                assert!((c - airy2_kernel_spectral(x, y)).abs() < 1e-9, "({x}, {y})");
                y += 1.25;
            }
            x += 1.25;
        }
    }

    #[test]
    fn kernel_diagonal() {
        for x in [-5.0, -1.0, 0.0, 2.5] {
            let (a, d, _) = airy_all(x);
            assert!((airy2_kernel(x, x) - (d * d - x * a * a)).abs() < 1e-12);
            let near = airy2_kernel(x, x + 0.6);
            let far = {
                let (ax, dx) = airy_pair(x);
                let (ay, dy) = airy_pair(x + 0.6);
                (ax * dy - dx * ay) / (-0.6)
            };
            assert!((near - far).abs() < 1e-14);
            assert!((airy2_kernel(x, x + 0.49) - airy2_kernel(x, x + 0.51)).abs() < 0.05);
        }
    }

    #[test]
    fn propagator_matches_spectral_integral() {
        for t in [0.3, 0.5, 1.0, 2.0] {
            for (x, y) in [(0.0, 0.0), (-4.0, 4.0), (2.0, -1.0), (-3.0, -3.5)] {
                let c = airy_propagator(t, x, y).unwrap();
                let s = airy_propagator_spectral(t, x, y).unwrap();
                assert!((c - s).abs() < 1e-8, "t={t} ({x},{y}): {c} vs {s}");
                assert!((c - airy_propagator(t, y, x).unwrap()).abs() <= 1e-15 * c.abs());
            }
        }
        assert!(airy_propagator(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn extended_kernel_branches() {
        assert_eq!(extended_airy_kernel(0.4, 0.3, 0.4, -1.0).unwrap(), airy2_kernel(0.3, -1.0));
        assert!((extended_airy_kernel(0.5, 0.0, 0.0, 0.0).unwrap() - PROBE).abs() < 1e-12);
        for (x, y) in [(0.0, 0.0), (1.0, -0.5), (-2.0, 0.7)] {
            let tau = 0.6;
            let direct = extended_airy_kernel(0.0, x, tau, y).unwrap();
            let split = -airy_propagator(tau, x, y).unwrap() + forward_on_range(-tau, x, y);
            assert!((direct - split).abs() < 1e-8);
        }
        assert!(matches!(extended_airy_kernel(0.0, 0.0, 0.01, 0.0), Err(Error::Tolerance(_))));
    }

    #[test]
    fn semigroup_by_quadrature() {
        let z = QuadratureGrid::panels(-30.0, 12.0, &[], 0.5, 16).unwrap();
        for (x, y) in [(0.0, 0.0), (-2.0, 1.0)] {
            let v = z.integrate(|u| propagator_unchecked(0.4, x, u) * propagator_unchecked(0.7, u, y));
            assert!((v - propagator_unchecked(1.1, x, y)).abs() < 1e-7);
        }
    }

    #[test]
    fn structural_residuals_small() {
        let pair = Airy2Config::thresholds(vec![0.0, 0.5], &[0.0, 0.0]).conjugation();
        let r = airy_structural_residuals(0.3, 0.5, &[-3.0, -1.0, 0.0, 1.5], &pair).unwrap();
        assert!(r.max() <= 1e-7, "{r:?}");
    }

    #[test]
    fn single_time_sides_agree() {
        let cfg = Airy2Config::thresholds(vec![0.0], &[-1.0]);
        let l = airy2_extended_side(&cfg, &window()).unwrap();
        let r = airy2_path_integral_side(&cfg, &window()).unwrap();
        assert!((l - r).abs() <= 1e-12, "{l} vs {r}");
        assert!((l - tracy_widom_marginal(-1.0, 60).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn two_time_identity_and_stationarity() {
        let a = airy2_identity_check(&Airy2Config::thresholds(vec![0.0, 1.0], &[0.0, 0.0])).unwrap();
        assert!(a.pass, "{a:?}");
        let b = airy2_identity_check(&Airy2Config::thresholds(vec![5.0, 6.0], &[0.0, 0.0])).unwrap();
        assert!((a.lhs - b.lhs).abs() <= 1e-8 && (a.rhs - b.rhs).abs() <= 1e-8);
    }

    #[test]
    fn conjugation_leaves_determinant() {
        let cfg = Airy2Config::thresholds(vec![0.0, 0.5], &[0.5, -0.5]);
        let pair = cfg.conjugation();
        assert!(pair.product_defect(&[-5.0, 0.0, 3.0]) < 1e-15);
        let with = airy2_path_integral_side(&cfg, &window()).unwrap();
        let without = path_integral_with(&cfg, &window(), &ConjugationPair::identity()).unwrap();
        assert!((with - without).abs() < 1e-10);
    }

    #[test]
    fn expanded_and_direct_products_agree() {
        let cfg = Airy2Config::thresholds(vec![0.0, 0.3, 0.6], &[-1.0, 1.0, 0.0]);
        let a = airy2_path_integral_side(&cfg, &window()).unwrap();
        let b = airy2_path_integral_direct(&cfg, &window()).unwrap();
        assert!((a - b).abs() < 1e-8, "{a} {b}");
    }

    #[test]
    fn tracy_widom_shape() {
        let lo = tracy_widom_marginal(-6.0, 60).unwrap();
        let mid = tracy_widom_marginal(0.0, 60).unwrap();
        let hi = tracy_widom_marginal(4.0, 60).unwrap();
        assert!(0.0 < lo && lo < mid && mid < hi && hi < 1.0);
        assert!(hi >= 1.0 - 1e-4);
        assert!(tracy_widom_marginal(7.0, 40).is_err());
    }

    #[test]
    fn continuum_trivial_and_monotone() {
        let w = window();
        let one = continuum_airy_statistics(0.0, 1.0, &Profile::Zero, 16, &w).unwrap();
        assert!((one - 1.0).abs() < 1e-8, "{one}");
        let small = continuum_airy_statistics(0.0, 1.0, &Profile::Indicator { above: 0.0, value: 0.5 }, 16, &w).unwrap();
        let large = continuum_airy_statistics(0.0, 1.0, &Profile::Indicator { above: 0.0, value: 1.0 }, 16, &w).unwrap();
        assert!(large < small && small < 1.0);
        assert!(matches!(
            continuum_airy_statistics(0.0, 1.0, &Profile::Indicator { above: 0.0, value: 4.0 }, 4, &w),
            Err(Error::StepTooCoarse(_))
        ));
    }
}
