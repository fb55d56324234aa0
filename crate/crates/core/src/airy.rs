//! The Airy function `Ai` and its derivative.
//!
//! For `|x| >= 8` the classical asymptotic expansions are used. Inside
//! `(-8, 8)` values come from Taylor re-expansion around anchors spaced `0.5`
//! apart, whose coefficients follow from `Ai'' = x Ai`. Anchors on the right
//! are propagated leftward from the asymptotic value at `x = 8`; anchors on
//! the left are propagated from the Maclaurin data at `0`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Documented accuracy window for [`airy_ai`] and [`airy_ai_prime`].
pub const WINDOW: (f64, f64) = (-50.0, 50.0);

const AI0: f64 = 0.355_028_053_887_817_239_260;
const AIP0: f64 = -0.258_819_403_792_806_798_405;
const SWITCH: f64 = 8.0;
const SPACING: f64 = 0.5;
const ANCHORS: usize = 33; // -8, -7.5, ..., 8
const TAYLOR_TERMS: usize = 60;
const ASYMPTOTIC_TERMS: usize = 40;

/// Taylor coefficients `a_n` of `Ai(c + h) = sum a_n h^n` from `Ai(c)`, `Ai'(c)`.
pub(crate) fn taylor_coefficients(c: f64, a0: f64, a1: f64, terms: usize) -> Vec<f64> {
    let mut a = vec![0.0; terms.max(2)];
    a[0] = a0;
    a[1] = a1;
    for n in 0..terms.saturating_sub(2) {
        let prev = if n == 0 { 0.0 } else { a[n - 1] };
        a[n + 2] = (c * a[n] + prev) / ((n + 2) as f64 * (n + 1) as f64);
    }
    a
}

/// `(f, f', f'')` of the power series `sum a_n h^n`.
fn eval_series(a: &[f64], h: f64) -> (f64, f64, f64) {
    let (mut f, mut d, mut d2) = (0.0, 0.0, 0.0);
    for n in (0..a.len()).rev() {
        f = f * h + a[n];
        if n >= 1 {
            d = d * h + n as f64 * a[n];
        }
        if n >= 2 {
            d2 = d2 * h + (n * (n - 1)) as f64 * a[n];
        }
    }
    (f, d, d2)
}

fn asymptotic_coefficients() -> &'static ([f64; ASYMPTOTIC_TERMS], [f64; ASYMPTOTIC_TERMS]) {
    static C: OnceLock<([f64; ASYMPTOTIC_TERMS], [f64; ASYMPTOTIC_TERMS])> = OnceLock::new();
    C.get_or_init(|| {
        let mut u = [0.0; ASYMPTOTIC_TERMS];
        let mut v = [0.0; ASYMPTOTIC_TERMS];
        u[0] = 1.0;
        v[0] = 1.0;
        for k in 1..ASYMPTOTIC_TERMS {
            let kf = k as f64;
            u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
                / ((2.0 * kf - 1.0) * 216.0 * kf);
            v[k] = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u[k];
        }
        (u, v)
    })
}

/// Sums `sum_k sign^k c_k / zeta^k` over the indices `k = first, first + 2, ...`
/// (or all `k` when `step == 1`), stopping at the smallest term.
fn asymptotic_sum(c: &[f64], zeta: f64, first: usize, step: usize, alternate: bool) -> f64 {
    let mut total = 0.0;
    let mut last = f64::INFINITY;
    let mut j = 0;
    let mut k = first;
    while k < c.len() {
        let term = c[k] / zeta.powi(k as i32);
        if term.abs() > last {
            break;
        }
        let sign = if alternate && j % 2 == 1 { -1.0 } else { 1.0 };
        total += sign * term;
        last = term.abs();
        j += 1;
        k += step;
    }
    total
}

/// `(Ai(x), Ai'(x))` from the large-`|x|` expansions.
fn asymptotic(x: f64) -> (f64, f64) {
    let (u, v) = asymptotic_coefficients();
    let sqrt_pi = PI.sqrt();
    if x > 0.0 {
        let zeta = 2.0 / 3.0 * x * x.sqrt();
        let q = x.powf(0.25);
        let e = (-zeta).exp();
        let su = asymptotic_sum(u, zeta, 0, 1, true);
        let sv = asymptotic_sum(v, zeta, 0, 1, true);
        (e / (2.0 * sqrt_pi * q) * su, -q * e / (2.0 * sqrt_pi) * sv)
    } else {
        let z = -x;
        let zeta = 2.0 / 3.0 * z * z.sqrt();
        let q = z.powf(0.25);
        let (s, c) = (zeta - PI / 4.0).sin_cos();
        let ue = asymptotic_sum(u, zeta, 0, 2, true);
        let uo = asymptotic_sum(u, zeta, 1, 2, true);
        let ve = asymptotic_sum(v, zeta, 0, 2, true);
        let vo = asymptotic_sum(v, zeta, 1, 2, true);
        (
            (c * ue + s * uo) / (sqrt_pi * q),
            q / sqrt_pi * (s * ve - c * vo),
        )
    }
}

/// `(Ai, Ai')` at the anchors `-8 + 0.5 k`.
fn anchors() -> &'static [(f64, f64); ANCHORS] {
    static A: OnceLock<[(f64, f64); ANCHORS]> = OnceLock::new();
    A.get_or_init(|| {
        let mut table = [(0.0, 0.0); ANCHORS];
        let mid = ANCHORS / 2;
        table[mid] = (AI0, AIP0);
        table[ANCHORS - 1] = asymptotic(SWITCH);
        for k in (mid + 1..ANCHORS - 1).rev() {
            let c = anchor_point(k + 1);
            let a = taylor_coefficients(c, table[k + 1].0, table[k + 1].1, TAYLOR_TERMS);
            let (f, d, _) = eval_series(&a, -SPACING);
            table[k] = (f, d);
        }
        for k in (0..mid).rev() {
            let c = anchor_point(k + 1);
            let a = taylor_coefficients(c, table[k + 1].0, table[k + 1].1, TAYLOR_TERMS);
            let (f, d, _) = eval_series(&a, -SPACING);
            table[k] = (f, d);
        }
        table
    })
}

fn anchor_point(k: usize) -> f64 {
    -SWITCH + SPACING * k as f64
}

/// `(Ai(x), Ai'(x), Ai''(x))`, with `Ai''` from the same expansion. Valid for
/// all finite `x`; the accuracy window is documented in [`WINDOW`].
pub fn airy_all(x: f64) -> (f64, f64, f64) {
    if x.abs() >= SWITCH {
        let (f, d) = asymptotic(x);
        let (_, _, d2) = eval_series(&taylor_coefficients(x, f, d, 3), 0.0);
        return (f, d, d2);
    }
    let k = ((x + SWITCH) / SPACING).round() as usize;
    let c = anchor_point(k);
    let (f, d) = anchors()[k];
    eval_series(&taylor_coefficients(c, f, d, TAYLOR_TERMS / 2), x - c)
}

/// `(Ai(x), Ai'(x))` without a window check.
pub fn airy_pair(x: f64) -> (f64, f64) {
    let (f, d, _) = airy_all(x);
    (f, d)
}

pub fn ai(x: f64) -> f64 {
    airy_pair(x).0
}

fn check_window(x: f64) -> Result<()> {
    if (WINDOW.0..=WINDOW.1).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfWindow {
            value: x,
            lo: WINDOW.0,
            hi: WINDOW.1,
        })
    }
}

pub fn airy_ai(x: f64) -> Result<f64> {
    check_window(x)?;
    Ok(airy_pair(x).0)
}

pub fn airy_ai_prime(x: f64) -> Result<f64> {
    check_window(x)?;
    Ok(airy_pair(x).1)
}
