//! Gauss-Legendre rules and composite grids on truncated intervals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes and positive weights of a quadrature rule on `[a, b]`, nodes increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Legendre `P_m(x)` and `P_m'(x)` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// The `m`-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre(m: usize, a: f64, b: f64) -> Result<QuadratureGrid> {
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one node".into()));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
    }
    let mut ref_nodes = vec![0.0; m];
    let mut ref_weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        // Chebyshev-type initial guess for the i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ref_nodes[m - 1 - i] = x;
        ref_nodes[i] = -x;
        ref_weights[m - 1 - i] = w;
        ref_weights[i] = w;
    }
    if m % 2 == 1 {
        ref_nodes[m / 2] = 0.0;
    }
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    Ok(QuadratureGrid {
        a,
        b,
        nodes: ref_nodes.iter().map(|x| c + h * x).collect(),
        weights: ref_weights.iter().map(|w| h * w).collect(),
    })
}

impl QuadratureGrid {
    /// Concatenates rules on the panels between consecutive `breaks`, with
    /// `nodes[k]` points on panel `k`.
    pub fn composite(breaks: &[f64], nodes: &[usize]) -> Result<Self> {
        if breaks.len() < 2 || nodes.len() != breaks.len() - 1 {
            return Err(Error::InvalidArgument(
                "need one node count per panel".into(),
            ));
        }
        let mut grid = Self {
            a: breaks[0],
            b: breaks[breaks.len() - 1],
            nodes: Vec::new(),
            weights: Vec::new(),
        };
        for (w, &m) in breaks.windows(2).zip(nodes) {
            let g = gauss_legendre(m, w[0], w[1])?;
            grid.nodes.extend(g.nodes);
            grid.weights.extend(g.weights);
        }
        Ok(grid)
    }

    /// Composite rule on `[a, b]` split at the interior `breaks`, giving each
    /// panel a share of `total` nodes proportional to its length (at least `min_per_panel`).
    pub fn split(a: f64, b: f64, breaks: &[f64], total: usize, min_per_panel: usize) -> Result<Self> {
        let mut cuts = vec![a];
        let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        cuts.extend(inner);
        cuts.push(b);
        let len = b - a;
        let counts: Vec<usize> = cuts
            .windows(2)
            .map(|w| ((total as f64 * (w[1] - w[0]) / len).round() as usize).max(min_per_panel))
            .collect();
        Self::composite(&cuts, &counts)
    }

    /// Composite rule on `[a, b]` cut at the interior `breaks` and further into
    /// panels of length at most `panel`, with `per_panel` nodes on each.
    pub fn panels(a: f64, b: f64, breaks: &[f64], panel: f64, per_panel: usize) -> Result<Self> {
        if !(a < b) || !(panel > 0.0) {
            return Err(Error::InvalidArgument(format!("bad interval [{a}, {b}]")));
        }
        let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        let mut fine = vec![cuts[0]];
        for w in cuts.windows(2) {
            let pieces = ((w[1] - w[0]) / panel - 1e-9).ceil().max(1.0) as usize;
            for p in 1..=pieces {
                fine.push(w[0] + (w[1] - w[0]) * p as f64 / pieces as f64);
            }
        }
        let counts = vec![per_panel; fine.len() - 1];
        Self::composite(&fine, &counts)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sqrt_weights(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.sqrt()).collect()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, w)| w * f(x)).sum()
    }
}
