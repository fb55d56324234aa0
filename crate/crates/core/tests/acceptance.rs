//! Acceptance suite: one PASS/FAIL line per criterion, each with its time budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use detpath_core::airy2::{
    airy2_extended_side, airy2_identity_check, airy2_kernel, airy2_kernel_spectral, airy2_path_integral_side,
    airy_propagator, airy_propagator_spectral, airy_structural_residuals, continuum_airy_statistics,
    continuum_airy_study, tracy_widom_marginal, tracy_widom_right, Airy2Config, RefinementStudy,
};
use detpath_core::defaults::{CONTINUUM, MONTE_CARLO};
use detpath_core::dyson::{mc_functional_estimate, sample_stationary, McEstimate, SeededRng};
use detpath_core::graph::lgv_check;
use detpath_core::graph::random::{random_instance, RandomGraphParams};
use detpath_core::hermite::{
    continuum_gamma, edge_deviation, gue_extended_side, gue_identity_check, hermite_structural_residuals,
    mehler_propagator, mehler_spectral, GalerkinSettings, GueConfig,
};
use detpath_core::operator::{alt_expansion_side, commuting_family, identity_check, telescoped_side, CommutingFamilySpec};
use detpath_core::profile::Profile;
use detpath_core::quadrature::{gauss_legendre, QuadratureGrid};
use detpath_core::Matrix;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let o = f();
    let took = start.elapsed();
    let pass = o.pass && took <= budget;
    println!(
        "[{}] {id:>2} {name}: {} ({:.1} s of {} s)",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        took.as_secs_f64(),
        budget.as_secs()
    );
    pass
}

fn lgv_exactness() -> Outcome {
    let p = RandomGraphParams::default();
    let mut equal = 0;
    for seed in 0..100 {
        let inst = random_instance(1_000 + seed, &p);
        let e = &inst.ensemble;
        let g = e.graph();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = e.particles();
        let xs = sample(&mut rng, g.layer_len(0), n).into_vec();
        let ys = sample(&mut rng, g.layer_len(g.layer_count()), n).into_vec();
        if lgv_check(g, e.weights(), &xs, &ys).is_ok_and(|r| r.equal) {
            equal += 1;
        }
    }
    outcome(equal == 100, format!("{equal}/100 determinants equal the path-system sums"))
}

fn path_functional_exactness() -> Outcome {
    let p = RandomGraphParams::default();
    let mut equal = 0;
    for seed in 0..100 {
        let inst = random_instance(2_000 + seed, &p);
        let e = &inst.ensemble;
        let brute = e.functional_expectation_bruteforce(&inst.functional);
        let det = e.path_integral_determinant(&inst.functional);
        if matches!((brute, det), (Ok(a), Ok(b)) if a == b) {
            equal += 1;
        }
    }
    outcome(equal == 100, format!("{equal}/100 ratios equal the determinants"))
}

fn multiplier_exactness() -> Outcome {
    let p = RandomGraphParams::default();
    let mut equal = 0;
    for seed in 0..50 {
        let inst = random_instance(3_000 + seed, &p);
        if inst.ensemble.eynard_mehta_check(&inst.multipliers).is_ok_and(|r| r.equal) {
            equal += 1;
        }
    }
    outcome(equal == 50, format!("{equal}/50 instances equal"))
}

fn operator_identity() -> Outcome {
    let (mut ok, mut worst, mut worst_exp) = (0, 0.0f64, 0.0f64);
    for seed in 0..200u64 {
        let spec = CommutingFamilySpec {
            seed: 4_000 + seed,
            n: 1 + (seed % 5) as usize,
            d: 1 + (seed / 5 % 8) as usize,
            rank: None,
            spectrum: None,
        };
        let Ok(inst) = commuting_family(&spec) else { continue };
        let Ok(rep) = identity_check(&inst.family, &inst.multipliers, 1e-10) else { continue };
        worst = worst.max(rep.diff / rep.lhs.abs().max(1.0));
        let mut exp_ok = true;
        for i in 0..spec.n {
            match (
                alt_expansion_side(&inst.family, &inst.multipliers, i),
                telescoped_side(&inst.family, &inst.multipliers, i),
            ) {
                (Ok(a), Ok(b)) => {
                    let d = a.max_abs_diff(&b);
                    worst_exp = worst_exp.max(d);
                    exp_ok &= d <= 1e-12;
                }
                _ => exp_ok = false,
            }
        }
        if rep.pass && exp_ok {
            ok += 1;
        }
    }
    outcome(
        ok == 200,
        format!("{ok}/200 families; worst relative gap {worst:.1e}, worst expansion gap {worst_exp:.1e}"),
    )
}

const GUE_TIMES: [f64; 3] = [0.0, 0.5, 1.2];
const GUE_OFFSETS: [f64; 3] = [-1.0, -0.5, 0.0];

fn hermite_identity() -> Outcome {
    let (mut cases, mut ok, mut worst) = (0, 0, 0.0f64);
    for n_particles in [1usize, 2, 5, 10] {
        let edge = (2.0 * n_particles as f64).sqrt();
        for n in 1..=3 {
            let th: Vec<f64> = GUE_OFFSETS[..n].iter().map(|o| edge + o).collect();
            let mut cfg = GueConfig::thresholds(n_particles, GUE_TIMES[..n].to_vec(), &th);
            cfg.tolerance = 1e-8;
            cases += 1;
            if let Ok(r) = gue_identity_check(&cfg) {
                worst = worst.max(r.diff);
                ok += usize::from(r.diff <= 1e-8);
            }
        }
    }
    let half = gue_identity_check(&GueConfig::thresholds(1, vec![0.0], &[0.0]));
    let sym = half.as_ref().map_or(f64::INFINITY, |r| (r.lhs - 0.5).abs().max((r.rhs - 0.5).abs()));
    outcome(
        ok == cases && sym <= 1e-9,
        format!("{ok}/{cases} cases, worst |lhs - rhs| {worst:.1e}; N=1, s=0 off 0.5 by {sym:.1e}"),
    )
}

fn airy_presets() -> Vec<(Vec<f64>, Vec<f64>)> {
    vec![
        (vec![0.0], vec![-2.0]),
        (vec![0.0], vec![0.0]),
        (vec![0.0], vec![2.0]),
        (vec![0.0, 0.3], vec![-2.0, 2.0]),
        (vec![0.0, 1.0], vec![0.0, 0.0]),
        (vec![0.0, 0.5], vec![1.0, -1.0]),
        (vec![0.0, 0.3, 0.6], vec![-2.0, 2.0, 0.0]),
        (vec![0.0, 0.5, 1.5], vec![1.0, -1.0, 0.5]),
        (vec![0.0, 0.5, 1.5], vec![-2.0, -2.0, -2.0]),
        (vec![0.0, 0.4, 0.8], vec![2.0, 1.0, -1.5]),
    ]
}

fn airy_identity() -> Outcome {
    let presets = airy_presets();
    let (mut ok, mut worst, mut drift) = (0, 0.0f64, 0.0f64);
    for (times, th) in &presets {
        let cfg = Airy2Config::thresholds(times.clone(), th);
        let Ok(r) = airy2_identity_check(&cfg) else { continue };
        worst = worst.max(r.diff);
        let shifted = Airy2Config::thresholds(times.iter().map(|t| t + 3.7).collect(), th);
        let w = &r.window;
        let d = match (airy2_extended_side(&shifted, w), airy2_path_integral_side(&shifted, w)) {
            (Ok(l), Ok(rr)) => (l - r.lhs).abs().max((rr - r.rhs).abs()),
            _ => f64::INFINITY,
        };
        drift = drift.max(d);
        ok += usize::from(r.diff <= 1e-6 && d <= 1e-8);
    }
    outcome(
        ok == presets.len(),
        format!("{ok}/{} presets, worst |lhs - rhs| {worst:.1e}, time-shift drift {drift:.1e}", presets.len()),
    )
}

fn kernel_oracles() -> Outcome {
    let mut mehler = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        for x in [-4.0, -1.5, 0.0, 0.7, 3.0] {
            for y in [-3.0, -0.2, 0.0, 1.1, 4.0] {
                let m = mehler_propagator(t, x, y).unwrap_or(f64::NAN);
                mehler = mehler.max((m - mehler_spectral(t, 80, x, y)).abs());
            }
        }
    }
    let mut prop = 0.0f64;
    for t in [0.3, 0.5, 1.0, 2.0] {
        for (x, y) in [(0.0, 0.0), (-4.0, 4.0), (2.0, -1.0), (-3.0, -3.5)] {
            let c = airy_propagator(t, x, y).unwrap_or(f64::NAN);
            let s = airy_propagator_spectral(t, x, y).unwrap_or(f64::NAN);
            prop = prop.max((c - s).abs());
        }
    }
    let mut routes = 0.0f64;
    for i in 0..=8 {
        for j in 0..=8 {
            let (x, y) = (-6.0 + 1.25 * i as f64, -6.0 + 1.25 * j as f64);
            routes = routes.max((airy2_kernel(x, y) - airy2_kernel_spectral(x, y)).abs());
        }
    }
    let grid = QuadratureGrid::panels(-12.0, 12.0, &[], 1.0, 24);
    let herm = grid
        .and_then(|g| hermite_structural_residuals(4, 0.3, 0.5, &g, &[-2.0, 0.0, 1.5]))
        .map_or(f64::INFINITY, |r| r.max());
    let pair = Airy2Config::thresholds(vec![0.0, 0.5], &[0.0, 0.0]).conjugation();
    let airy = airy_structural_residuals(0.3, 0.5, &[-3.0, -1.0, 0.0, 1.5], &pair).map_or(f64::INFINITY, |r| r.max());
    let pass = mehler <= 1e-10 && prop <= 1e-8 && routes <= 1e-9 && herm <= 1e-7 && airy <= 1e-7;
    outcome(
        pass,
        format!(
            "Mehler {mehler:.1e}, Airy propagator {prop:.1e}, kernel routes {routes:.1e}, residuals Hermite {herm:.1e} Airy {airy:.1e}"
        ),
    )
}

/// `det(I - A)` from the traces of powers of `A` (Plemelj-Smithies).
fn series_determinant(a: &Matrix<f64>, order: usize) -> f64 {
    let mut traces = Vec::with_capacity(order);
    let mut p = a.clone();
    for _ in 0..order {
        traces.push(p.trace());
        p = &p * a;
    }
    // c_k are the coefficients of det(I - zA) = sum c_k z^k
    let mut c = vec![1.0];
    for k in 1..=order {
        let s: f64 = (1..=k).map(|j| c[k - j] * traces[j - 1]).sum();
        c.push(-s / k as f64);
    }
    c.iter().sum()
}

fn tracy_widom_oracle(s: f64) -> f64 {
    let g = gauss_legendre(32, s, tracy_widom_right(s)).expect("valid rule");
    let w = g.sqrt_weights();
    let x = g.nodes();
    let a = Matrix::from_fn(x.len(), x.len(), |i, j| w[i] * airy2_kernel(x[i], x[j]) * w[j]);
    series_determinant(&a, 14)
}

fn tracy_widom() -> Outcome {
    let lattice: Vec<f64> = (0..50).map(|k| -7.0 + 12.0 * k as f64 / 49.0).collect();
    let values: Vec<f64> = lattice.iter().map(|&s| tracy_widom_marginal(s, 60).unwrap_or(f64::NAN)).collect();
    let monotone = values.windows(2).all(|w| w[0] < w[1]);
    let mut oracle = 0.0f64;
    let mut shift = 0.0f64;
    for s in [-2.0, 0.0, 1.0] {
        let v = tracy_widom_marginal(s, 60).unwrap_or(f64::NAN);
        oracle = oracle.max((v - tracy_widom_oracle(s)).abs());
        let (a, b) = (tracy_widom_marginal(s, 40), tracy_widom_marginal(s, 80));
        shift = shift.max(match (a, b) {
            (Ok(a), Ok(b)) => (a - b).abs(),
            _ => f64::INFINITY,
        });
    }
    outcome(
        monotone && oracle <= 1e-6 && shift <= 1e-8,
        format!("monotone on 50 points: {monotone}; series oracle gap {oracle:.1e}; 40 -> 80 shift {shift:.1e}"),
    )
}

fn continuum() -> Outcome {
    let [coarse, fine] = CONTINUUM.steps;
    let w = CONTINUUM.window;
    let mut lines = Vec::new();
    let mut pass = true;
    let mut record = |label: String, s: Result<RefinementStudy, detpath_core::Error>| {
        let (ok, change) = match s {
            Ok(s) => (s.stable_to(4), s.relative_changes.last().copied().unwrap_or(f64::NAN)),
            Err(_) => (false, f64::NAN),
        };
        pass &= ok;
        lines.push(format!("{label} {change:.1e}"));
    };
    for h in [
        Profile::Indicator { above: 0.0, value: 1.0 },
        Profile::Logistic { above: 0.0, width: 0.2, value: 0.5 },
    ] {
        record(format!("Airy {h}"), continuum_airy_study(0.0, 1.0, &h, &[coarse, fine], &w));
    }
    let h = Profile::Logistic { above: 0.0, width: 0.2, value: 0.5 };
    let hermite = [coarse, fine].map(|n| continuum_gamma(0.0, 1.0, &h, n, GalerkinSettings::default()).map(|g| g.statistic(1)));
    let study = match hermite {
        [Ok(a), Ok(b)] => Ok(RefinementStudy::from_values(vec![coarse, fine], vec![a, b])),
        [Err(e), _] | [_, Err(e)] => Err(e),
    };
    record(format!("Hermite N=1 {h}"), study);

    let airy_zero = continuum_airy_statistics(0.0, 1.0, &Profile::Zero, coarse, &w).map_or(f64::INFINITY, |v| (v - 1.0).abs());
    let herm_zero = continuum_gamma(0.0, 1.0, &Profile::Zero, coarse, GalerkinSettings::default())
        .map_or(f64::INFINITY, |g| (g.statistic(3) - 1.0).abs());
    let c = 0.5;
    let constant = continuum_gamma(0.0, 1.0, &Profile::Constant { value: c }, 4096, GalerkinSettings::default())
        .map_or(f64::INFINITY, |g| (g.statistic(1) - (-c).exp()).abs());
    pass &= airy_zero <= 1e-8 && herm_zero <= 1e-8 && constant <= 1e-4;
    outcome(
        pass,
        format!(
            "{coarse} -> {fine} relative changes: {}; h = 0 off 1 by {:.1e}; constant h off e^(-c) by {constant:.1e}",
            lines.join(", "),
            airy_zero.max(herm_zero)
        ),
    )
}

fn normal_cdf(s: f64) -> f64 {
    gauss_legendre(400, -12.0, s)
        .expect("valid rule")
        .integrate(|x| (-x * x).exp() / std::f64::consts::PI.sqrt())
}

fn monte_carlo() -> Outcome {
    let samples = MONTE_CARLO.samples;
    let seed = |k: u64| MONTE_CARLO.seed + k;
    let mut cases: Vec<(Result<McEstimate, detpath_core::Error>, f64)> = Vec::new();
    for n in [1usize, 2, 3] {
        let edge = (2.0 * n as f64).sqrt();
        let single = GueConfig::thresholds(n, vec![0.0], &[edge - 1.0]);
        let double = GueConfig::thresholds(n, vec![0.0, 0.7], &[edge - 1.0, edge - 0.5]);
        for cfg in [single, double] {
            let reference = gue_extended_side(&cfg, cfg.nodes).unwrap_or(f64::NAN);
            let k = cases.len() as u64;
            cases.push((mc_functional_estimate(n, &cfg.times, &cfg.q, samples, seed(k)), reference));
        }
    }
    for s in [-0.7, 0.0, 0.9] {
        let k = cases.len() as u64;
        cases.push((mc_functional_estimate(1, &[0.0], &[Profile::indicator(s)], samples, seed(k)), normal_cdf(s)));
    }
    let lag = 0.6;
    let streams = SeededRng::new(seed(cases.len() as u64));
    let (diag, off): (Vec<f64>, Vec<f64>) = (0..samples as u64)
        .map(|i| {
            let mut rng = streams.stream(i);
            let a = sample_stationary(2, &mut rng).expect("size 2");
            let b = a.evolve(lag, &mut rng).expect("positive lag");
            (a.get(0, 0).0 * b.get(0, 0).0, a.get(0, 1).1 * b.get(0, 1).1)
        })
        .unzip();
    cases.push((Ok(McEstimate::from_values(&diag)), 0.5 * (-lag).exp()));
    cases.push((Ok(McEstimate::from_values(&off)), 0.25 * (-lag).exp()));
    let worst = cases
        .iter()
        .map(|(e, r)| e.as_ref().map_or(f64::INFINITY, |e| e.z_score(*r).abs()))
        .fold(0.0, f64::max);
    outcome(
        worst <= MONTE_CARLO.z_limit,
        format!("{} comparisons at {samples} samples, worst |z| {worst:.2}", cases.len()),
    )
}

fn edge_trend() -> Outcome {
    let d: Vec<f64> = [20, 50, 100].iter().map(|&n| edge_deviation(n)).collect();
    outcome(
        d[0] > d[1] && d[1] > d[2],
        format!("N = 20, 50, 100: {:.2e}, {:.2e}, {:.2e}", d[0], d[1], d[2]),
    )
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let results = [
        run(1, "LGV exactness", s(30), lgv_exactness),
        run(2, "path functionals, exact", s(60), path_functional_exactness),
        run(3, "multiplicative functionals, exact", s(60), multiplier_exactness),
        run(4, "finite-dimensional identity", s(30), operator_identity),
        run(5, "Hermite identity", s(120), hermite_identity),
        run(6, "Airy2 identity", s(300), airy_identity),
        run(7, "kernel-construction oracles", s(120), kernel_oracles),
        run(8, "Tracy-Widom marginal", s(60), tracy_widom),
        run(9, "continuum discretizations", s(180), continuum),
        run(10, "Monte-Carlo concordance", s(300), monte_carlo),
        run(11, "edge-scaling trend", s(60), edge_trend),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
