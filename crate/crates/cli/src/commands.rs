//! The subcommands, each producing an [`Outcome`].

use std::path::Path;

use detpath_core::airy2::{
    airy2_identity_check, continuum_airy_study, tracy_widom_marginal, Airy2Config, Airy2Report, AiryWindow,
    RefinementStudy,
};
use detpath_core::defaults::{AIRY2, CONTINUUM, GUE, MONTE_CARLO, OPERATOR};
use detpath_core::dyson::mc_functional_estimate;
use detpath_core::graph::random::{random_instance, RandomGraphParams};
use detpath_core::graph::schema::{format_rational, GraphDocument};
use detpath_core::graph::{lgv_check, Ensemble, EynardMehtaReport, LgvReport};
use detpath_core::hermite::{
    continuum_gamma, edge_deviation, extended_hermite_kernel, gue_identity_check, hermite_kernel, GalerkinSettings,
    GueConfig, GueReport,
};
use detpath_core::operator::{
    alt_expansion_side, commuting_family, identity_check, telescoped_side, verify_structural_assumptions,
    CommutingFamilySpec, FamilyDocument, MultiplierFamily, OperatorFamily,
};
use detpath_core::profile::Profile;
use detpath_core::{Error, Rational};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::args::{Airy2Args, Command, GueArgs, IdentityArgs, LgvArgs, McArgs, SuiteArgs};
use crate::emit::{Plot, Table};
use crate::error::CliError;
use crate::report::{to_value, Outcome, Sink};

/// Points of a kernel slice.
const SLICE_POINTS: usize = 201;
/// Largest state dimension for which the alternating expansion is enumerated.
const EXPANSION_MAX_TIMES: usize = 12;

pub fn dispatch(cmd: &Command, sink: &Sink) -> Result<Outcome, CliError> {
    match cmd {
        Command::LgvVerify(a) => lgv_verify(a),
        Command::IdentityCheck(a) => identity(a),
        Command::Gue(a) => gue(a, sink),
        Command::Airy2(a) => airy2(a, sink),
        Command::McGue(a) => mc_gue(a),
        Command::Suite(a) => suite(a),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn required<T: Clone>(v: &Option<T>, flag: &str, cmd: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::usage(format!("{cmd} needs --{flag}")))
}

fn parse_profile(s: &str) -> Result<Profile, CliError> {
    s.parse().map_err(CliError::from)
}

fn interval(v: &Option<Vec<f64>>) -> Result<(f64, f64), CliError> {
    match v.as_deref() {
        None => Ok((0.0, 1.0)),
        Some(&[l, r]) => Ok((l, r)),
        Some(other) => Err(CliError::usage(format!("--interval needs two values, got {}", other.len()))),
    }
}

/// `lo:hi:count` or a comma-separated list.
pub fn parse_points(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("cannot parse point list '{spec}'"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [lo, hi, count] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let count: usize = count.trim().parse().map_err(|_| bad())?;
            match count {
                0 => Ok(Vec::new()),
                1 => Ok(vec![lo]),
                _ => Ok((0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()),
            }
        }
        [list] => list.split(',').filter(|t| !t.trim().is_empty()).map(num).collect(),
        _ => Err(bad()),
    }
}

// ---------------------------------------------------------------- lgv-verify

#[derive(Serialize)]
struct FunctionalCheck {
    ratio: String,
    determinant: String,
    equal: bool,
}

#[derive(Serialize)]
struct LgvResults {
    #[serde(skip_serializing_if = "Option::is_none")]
    lgv: Option<LgvReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path_functional: Option<FunctionalCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    multipliers: Option<EynardMehtaReport>,
}

impl LgvResults {
    fn pass(&self) -> bool {
        self.lgv.as_ref().is_none_or(|r| r.equal)
            && self.path_functional.as_ref().is_none_or(|r| r.equal)
            && self.multipliers.as_ref().is_none_or(|r| r.equal)
    }
}

fn functional_check(ens: &Ensemble, f: &detpath_core::graph::PathFunctional) -> Result<FunctionalCheck, CliError> {
    let ratio: Rational = ens.functional_expectation_bruteforce(f)?;
    let det = ens.path_integral_determinant(f)?;
    Ok(FunctionalCheck {
        ratio: format_rational(&ratio),
        determinant: format_rational(&det),
        equal: ratio == det,
    })
}

fn lgv_verify(a: &LgvArgs) -> Result<Outcome, CliError> {
    let (results, seed) = match (&a.graph, a.seed) {
        (Some(path), _) => {
            let doc: GraphDocument = read_json(path)?;
            let g = doc.graph()?;
            let w = doc.weighting(&g)?;
            let (xs, ys) = (doc.source_set(&g), doc.sink_set(&g));
            let lgv = (xs.len() == ys.len()).then(|| lgv_check(&g, &w, &xs, &ys)).transpose()?;
            let f = doc.path_functional(&g)?;
            let q = doc.multipliers()?;
            let (path_functional, multipliers) = match doc.boundary(&g)? {
                Some(bd) => {
                    let ens = Ensemble::new(g.clone(), w, bd)?;
                    (
                        f.map(|f| functional_check(&ens, &f)).transpose()?,
                        q.map(|q| ens.eynard_mehta_check(&q)).transpose()?,
                    )
                }
                None if f.is_some() || q.is_some() => {
                    return Err(CliError::usage("functional and q need boundary data (psi and phi)"));
                }
                None => (None, None),
            };
            if lgv.is_none() && path_functional.is_none() && multipliers.is_none() {
                return Err(CliError::usage(
                    "nothing to verify: sources and sinks differ in size and no boundary data is given",
                ));
            }
            let r = LgvResults {
                lgv,
                path_functional,
                multipliers,
            };
            (r, doc.seed)
        }
        (None, Some(seed)) => {
            let inst = random_instance(seed, &RandomGraphParams::default());
            let e = &inst.ensemble;
            let g = e.graph();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = e.particles();
            let xs = sample(&mut rng, g.layer_len(0), n).into_vec();
            let ys = sample(&mut rng, g.layer_len(g.layer_count()), n).into_vec();
            let r = LgvResults {
                lgv: Some(lgv_check(g, e.weights(), &xs, &ys)?),
                path_functional: Some(functional_check(e, &inst.functional)?),
                multipliers: Some(e.eynard_mehta_check(&inst.multipliers)?),
            };
            (r, Some(seed))
        }
        (None, None) => return Err(CliError::usage("lgv-verify needs --graph or --seed")),
    };
    let pass = results.pass();
    Ok(Outcome::new(a, results, pass)
        .seed(seed)
        .tolerances(json!({ "comparison": "exact" })))
}

// ------------------------------------------------------------ identity-check

#[derive(Serialize)]
struct ExpansionCheck {
    max_gap: f64,
    tolerance: f64,
    pass: bool,
}

fn expansion_check(fam: &OperatorFamily<f64>, q: &MultiplierFamily<f64>) -> Result<Option<ExpansionCheck>, CliError> {
    if fam.len() > EXPANSION_MAX_TIMES {
        return Ok(None);
    }
    let mut gap = 0.0f64;
    for i in 0..fam.len() {
        let a = alt_expansion_side(fam, q, i)?;
        let b = telescoped_side(fam, q, i)?;
        gap = gap.max(a.max_abs_diff(&b));
    }
    let tol = OPERATOR.expansion_tolerance;
    Ok(Some(ExpansionCheck {
        max_gap: gap,
        tolerance: tol,
        pass: gap <= tol,
    }))
}

fn identity(a: &IdentityArgs) -> Result<Outcome, CliError> {
    let tol = a.tolerance.unwrap_or(OPERATOR.tolerance);
    let (fam, q, seed) = match &a.family {
        Some(path) => {
            let doc: FamilyDocument = read_json(path)?;
            (doc.family()?, doc.multipliers(), None)
        }
        None => {
            let cmd = "identity-check without --family";
            let spec = CommutingFamilySpec {
                seed: required(&a.seed, "seed", cmd)?,
                n: required(&a.n, "n", cmd)?,
                d: required(&a.d, "d", cmd)?,
                rank: a.rank,
                spectrum: a.spectrum.clone(),
            };
            let inst = commuting_family(&spec)?;
            (inst.family, inst.multipliers, Some(spec.seed))
        }
    };
    let rep = identity_check(&fam, &q, tol)?;
    let residuals = verify_structural_assumptions(&fam, OPERATOR.tolerance);
    let expansion = expansion_check(&fam, &q)?;
    let pass = rep.pass && residuals.pass && expansion.as_ref().is_none_or(|e| e.pass);
    let results = json!({
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "diff": rep.diff,
        "tolerance": rep.tolerance,
        "identity_pass": rep.pass,
        "residuals": residuals,
        "expansion": expansion,
        "pass": pass,
    });
    Ok(Outcome::new(a, results, pass)
        .seed(seed)
        .grid(json!({ "n": fam.len(), "d": fam.dim() }))
        .tolerances(json!({
            "identity_relative": tol,
            "structural": OPERATOR.tolerance,
            "expansion": OPERATOR.expansion_tolerance,
        })))
}

// ----------------------------------------------------------------------- gue

/// A failed grid refinement is reported as a failed check rather than an error.
fn tolerance_failure<T: Serialize>(r: detpath_core::Result<T>) -> Result<(serde_json::Value, bool), CliError> {
    match r {
        Ok(v) => {
            let v = to_value(v);
            let pass = v.get("pass").and_then(serde_json::Value::as_bool).unwrap_or(false);
            Ok((v, pass))
        }
        Err(Error::Tolerance(msg)) => Ok((json!({ "error": msg, "pass": false }), false)),
        Err(e) => Err(e.into()),
    }
}

fn study_table(study: &RefinementStudy) -> Table {
    let mut t = Table::new(["steps", "statistic"]);
    for (&n, &v) in study.steps.iter().zip(&study.values) {
        t.push(vec![n as f64, v]);
    }
    t
}

fn study_results(study: &RefinementStudy, h: &str, l: f64, r: f64) -> serde_json::Value {
    json!({
        "h": h,
        "interval": [l, r],
        "steps": study.steps,
        "values": study.values,
        "relative_changes": study.relative_changes,
        "relative_tolerance": 5e-4,
        "stable_to_4_digits": study.stable_to(4),
    })
}

fn plot(title: &str, x: &str, y: &str, t: &Table) -> Plot {
    Plot {
        title: title.into(),
        x_label: x.into(),
        y_label: y.into(),
        series: (1..t.header.len()).map(|j| t.series(j)).collect(),
    }
}

fn gue_config(a: &GueArgs, n: usize, times: Vec<f64>, thresholds: &[f64]) -> GueConfig {
    let mut cfg = GueConfig::thresholds(n, times, thresholds);
    cfg.nodes = a.nodes.unwrap_or(GUE.nodes);
    cfg.domain = a.domain.unwrap_or(GUE.domain);
    cfg.tolerance = a.tolerance.unwrap_or(GUE.tolerance);
    cfg
}

fn gue(a: &GueArgs, sink: &Sink) -> Result<Outcome, CliError> {
    let mut results = serde_json::Map::new();
    let mut artifacts = Vec::new();
    let mut pass = true;
    let cfg = match (&a.times, &a.thresholds) {
        (Some(times), Some(th)) => {
            let n = required(&a.matrix_size, "matrix-size", "gue")?;
            let cfg = gue_config(a, n, times.clone(), th);
            let (v, ok) = tolerance_failure::<GueReport>(gue_identity_check(&cfg))?;
            results.insert("identity".into(), v);
            pass &= ok;
            Some(cfg)
        }
        (None, None) => None,
        _ => return Err(CliError::usage("gue needs both --times and --thresholds")),
    };
    if a.slices {
        let n = required(&a.matrix_size, "matrix-size", "gue --slices")?;
        let times = a.times.clone().unwrap_or_else(|| vec![0.0]);
        let (s, t) = (times[0], *times.last().expect("nonempty"));
        let reach = (2.0 * n as f64).sqrt() + 3.0;
        let mut table = Table::new(["x", "K_N(x,x)", "K_N(x,0)", "K_ext(s,x;t,x)"]);
        for k in 0..SLICE_POINTS {
            let x = -reach + 2.0 * reach * k as f64 / (SLICE_POINTS - 1) as f64;
            table.push(vec![
                x,
                hermite_kernel(n, x, x),
                hermite_kernel(n, x, 0.0),
                extended_hermite_kernel(n, s, x, t, x),
            ]);
        }
        artifacts.extend(sink.table(
            "gue_kernel_slices",
            &table,
            Some(&plot(&format!("Hermite kernel slices, N = {n}"), "x", "kernel", &table)),
        )?);
        results.insert("slices".into(), json!({ "points": SLICE_POINTS, "times": [s, t] }));
    }
    if let Some(sizes) = &a.edge_study {
        let mut table = Table::new(["N", "max_deviation"]);
        for &n in sizes {
            table.push(vec![n as f64, edge_deviation(n)]);
        }
        let devs: Vec<f64> = table.rows.iter().map(|r| r[1]).collect();
        artifacts.extend(sink.table(
            "gue_edge_study",
            &table,
            Some(&plot("Edge-rescaled kernel vs Airy kernel", "N", "max deviation", &table)),
        )?);
        results.insert(
            "edge_study".into(),
            json!({
                "sizes": sizes,
                "max_deviation": devs,
                "decreasing": devs.windows(2).all(|w| w[1] < w[0]),
            }),
        );
    }
    if let Some(h) = &a.continuum {
        let n = required(&a.matrix_size, "matrix-size", "gue --continuum")?;
        let profile = parse_profile(h)?;
        let (l, r) = interval(&a.interval)?;
        let steps = a.steps.clone().unwrap_or_else(|| CONTINUUM.steps.to_vec());
        let values = steps
            .iter()
            .map(|&m| continuum_gamma(l, r, &profile, m, GalerkinSettings::default()).map(|g| g.statistic(n)))
            .collect::<detpath_core::Result<Vec<_>>>()?;
        let study = RefinementStudy::from_values(steps, values);
        let table = study_table(&study);
        artifacts.extend(sink.table(
            "gue_continuum",
            &table,
            Some(&plot(&format!("Hermite continuum statistic, h = {h}"), "steps", "statistic", &table)),
        )?);
        results.insert("continuum".into(), study_results(&study, h, l, r));
    }
    if results.is_empty() {
        return Err(CliError::usage(
            "gue needs --times and --thresholds, --slices, --edge-study or --continuum",
        ));
    }
    let mut out = Outcome::new(a, results, pass)
        .grid(json!({
            "nodes_per_panel": a.nodes.unwrap_or(GUE.nodes),
            "domain": a.domain.unwrap_or(GUE.domain),
            "galerkin": GalerkinSettings::default(),
        }))
        .tolerances(json!({
            "identity": cfg.as_ref().map_or(GUE.tolerance, |c| c.tolerance),
            "continuum_relative": 5e-4,
        }));
    out.artifacts = artifacts;
    Ok(out)
}

// --------------------------------------------------------------------- airy2

fn airy_window(base: AiryWindow, a: &Airy2Args) -> AiryWindow {
    AiryWindow {
        left: a.domain.map_or(base.left, |d| -d),
        per_panel: a.nodes.unwrap_or(base.per_panel),
        ..base
    }
}

fn airy2(a: &Airy2Args, sink: &Sink) -> Result<Outcome, CliError> {
    let mut results = serde_json::Map::new();
    let mut artifacts = Vec::new();
    let mut pass = true;
    let window = airy_window(AIRY2.window, a);
    let tol = a.tolerance.unwrap_or(AIRY2.tolerance);
    match (&a.times, &a.thresholds) {
        (Some(times), Some(th)) => {
            let mut cfg = Airy2Config::thresholds(times.clone(), th);
            cfg.window = window;
            cfg.tolerance = tol;
            let (v, ok) = tolerance_failure::<Airy2Report>(airy2_identity_check(&cfg))?;
            results.insert("identity".into(), v);
            pass &= ok;
        }
        (None, None) => {}
        _ => return Err(CliError::usage("airy2 needs both --times and --thresholds")),
    }
    if let Some(spec) = &a.tw {
        let points = parse_points(spec)?;
        let mut table = Table::new(["s", "F2"]);
        for &s in &points {
            table.push(vec![s, tracy_widom_marginal(s, AIRY2.tw_nodes)?]);
        }
        let values: Vec<f64> = table.rows.iter().map(|r| r[1]).collect();
        artifacts.extend(sink.table(
            "airy2_tracy_widom",
            &table,
            Some(&plot("Tracy-Widom GUE distribution", "s", "F2(s)", &table)),
        )?);
        results.insert(
            "tracy_widom".into(),
            json!({
                "s": points,
                "F2": values,
                "nodes": AIRY2.tw_nodes,
                "nondecreasing": values.windows(2).all(|w| w[1] >= w[0]),
            }),
        );
    }
    let cwindow = airy_window(CONTINUUM.window, a);
    if let Some(h) = &a.continuum {
        let profile = parse_profile(h)?;
        let (l, r) = interval(&a.interval)?;
        let steps = a.steps.clone().unwrap_or_else(|| CONTINUUM.steps.to_vec());
        let study = continuum_airy_study(l, r, &profile, &steps, &cwindow)?;
        let table = study_table(&study);
        artifacts.extend(sink.table(
            "airy2_continuum",
            &table,
            Some(&plot(&format!("Airy continuum statistic, h = {h}"), "steps", "statistic", &table)),
        )?);
        results.insert("continuum".into(), study_results(&study, h, l, r));
    }
    if results.is_empty() {
        return Err(CliError::usage("airy2 needs --times and --thresholds, --tw or --continuum"));
    }
    let mut out = Outcome::new(a, results, pass)
        .grid(json!({ "identity_window": window, "continuum_window": cwindow, "tw_nodes": AIRY2.tw_nodes }))
        .tolerances(json!({ "identity": tol, "continuum_relative": 5e-4 }));
    out.artifacts = artifacts;
    Ok(out)
}

// -------------------------------------------------------------------- mc-gue

#[derive(Serialize)]
struct McResults {
    mean: f64,
    stderr: f64,
    samples: usize,
    determinant_reference: f64,
    z_score: f64,
    z_limit: f64,
    pass: bool,
}

fn mc_results(n: usize, times: &[f64], thresholds: &[f64], samples: usize, seed: u64) -> Result<McResults, CliError> {
    let cfg = GueConfig::thresholds(n, times.to_vec(), thresholds);
    let reference = gue_identity_check(&cfg)?.lhs;
    let est = mc_functional_estimate(n, times, &cfg.q, samples, seed)?;
    let z = est.z_score(reference);
    Ok(McResults {
        mean: est.mean,
        stderr: est.stderr,
        samples: est.samples,
        determinant_reference: reference,
        z_score: z,
        z_limit: MONTE_CARLO.z_limit,
        pass: z.abs() <= MONTE_CARLO.z_limit,
    })
}

fn mc_gue(a: &McArgs) -> Result<Outcome, CliError> {
    let n = required(&a.matrix_size, "matrix-size", "mc-gue")?;
    let times = required(&a.times, "times", "mc-gue")?;
    let thresholds = required(&a.thresholds, "thresholds", "mc-gue")?;
    let samples = a.samples.unwrap_or(MONTE_CARLO.samples);
    let seed = a.seed.unwrap_or(MONTE_CARLO.seed);
    let r = mc_results(n, &times, &thresholds, samples, seed)?;
    let pass = r.pass;
    Ok(Outcome::new(a, r, pass)
        .seed(Some(seed))
        .grid(json!({ "nodes_per_panel": GUE.nodes, "domain": GUE.domain, "samples": samples }))
        .tolerances(json!({ "z_limit": MONTE_CARLO.z_limit, "determinant": GUE.tolerance })))
}

// --------------------------------------------------------------------- suite

#[derive(Serialize)]
struct SuiteCheck {
    name: String,
    value: f64,
    tolerance: f64,
    pass: bool,
}

struct Checks(Vec<SuiteCheck>);

impl Checks {
    fn le(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.0.push(SuiteCheck {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        });
    }

    /// Records a count of failures, which must be zero.
    fn count(&mut self, name: impl Into<String>, failures: usize) {
        self.le(name, failures as f64, 0.0);
    }
}

fn suite(a: &SuiteArgs) -> Result<Outcome, CliError> {
    let mut c = Checks(Vec::new());
    let p = RandomGraphParams::default();
    let (graphs, families) = if a.quick { (10, 20) } else { (50, 100) };

    let mut lgv_fail = 0;
    let mut func_fail = 0;
    let mut mult_fail = 0;
    for seed in 0..graphs {
        let inst = random_instance(seed, &p);
        let e = &inst.ensemble;
        let g = e.graph();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = e.particles();
        let xs = sample(&mut rng, g.layer_len(0), n).into_vec();
        let ys = sample(&mut rng, g.layer_len(g.layer_count()), n).into_vec();
        lgv_fail += usize::from(!lgv_check(g, e.weights(), &xs, &ys).is_ok_and(|r| r.equal));
        func_fail += usize::from(!functional_check(e, &inst.functional).is_ok_and(|r| r.equal));
        mult_fail += usize::from(!e.eynard_mehta_check(&inst.multipliers).is_ok_and(|r| r.equal));
    }
    c.count(format!("lgv: unequal determinants in {graphs} graphs"), lgv_fail);
    c.count(format!("path functional: unequal in {graphs} graphs"), func_fail);
    c.count(format!("multipliers: unequal in {graphs} graphs"), mult_fail);

    let mut worst = 0.0f64;
    for seed in 0..families {
        let spec = CommutingFamilySpec {
            seed,
            n: 1 + (seed % 4) as usize,
            d: 1 + (seed / 4 % 6) as usize,
            rank: None,
            spectrum: None,
        };
        let inst = commuting_family(&spec)?;
        let rep = identity_check(&inst.family, &inst.multipliers, OPERATOR.tolerance)?;
        worst = worst.max(rep.diff / rep.lhs.abs().max(1.0));
    }
    c.le(format!("operator identity: worst relative gap over {families} families"), worst, OPERATOR.tolerance);

    let half = gue_identity_check(&GueConfig::thresholds(1, vec![0.0], &[0.0]))?;
    c.le("gue N=1 s=0: |lhs - 1/2|", (half.lhs - 0.5).abs(), 1e-9);
    c.le("gue N=1 s=0: |lhs - rhs|", half.diff, GUE.tolerance);
    let gue_cases: &[(usize, &[f64], &[f64])] = if a.quick {
        &[(2, &[0.0, 0.5], &[1.0, 1.5])]
    } else {
        &[(2, &[0.0, 0.5], &[1.0, 1.5]), (5, &[0.0, 0.5, 1.2], &[2.2, 2.7, 3.2])]
    };
    for &(n, t, s) in gue_cases {
        let rep = gue_identity_check(&GueConfig::thresholds(n, t.to_vec(), s))?;
        c.le(format!("gue N={n} at {} times: |lhs - rhs|", t.len()), rep.diff, rep.tolerance);
    }

    let airy_cases: &[(&[f64], &[f64])] = if a.quick {
        &[(&[0.0], &[-1.0])]
    } else {
        &[(&[0.0], &[-1.0]), (&[0.0, 0.5], &[-1.0, 0.0])]
    };
    for &(t, s) in airy_cases {
        let rep = airy2_identity_check(&Airy2Config::thresholds(t.to_vec(), s))?;
        c.le(format!("airy2 at {} times: |lhs - rhs|", t.len()), rep.diff, rep.tolerance);
    }

    let tw: Vec<f64> = parse_points("-6:4:11")?
        .iter()
        .map(|&s| tracy_widom_marginal(s, AIRY2.tw_nodes))
        .collect::<detpath_core::Result<_>>()?;
    let drops = tw.windows(2).filter(|w| w[1] < w[0]).count();
    c.count("tracy-widom: decreasing steps on [-6, 4]", drops);

    let flat = continuum_airy_study(0.0, 1.0, &Profile::Zero, &[16], &CONTINUUM.window)?;
    c.le("airy continuum with h = 0: |statistic - 1|", (flat.values[0] - 1.0).abs(), 1e-8);
    let flat = continuum_gamma(0.0, 1.0, &Profile::Zero, 16, GalerkinSettings::default())?;
    c.le("hermite continuum with h = 0: |statistic - 1|", (flat.statistic(3) - 1.0).abs(), 1e-8);

    let trivial = mc_functional_estimate(2, &[0.0], &[Profile::Zero], 100, MONTE_CARLO.seed)?;
    c.le("monte carlo with q = 0: |mean - 1|", (trivial.mean - 1.0).abs(), 0.0);
    if !a.quick {
        let r = mc_results(2, &[0.0], &[2f64.sqrt() - 1.0], MONTE_CARLO.samples, MONTE_CARLO.seed)?;
        c.le("monte carlo N=2 single time: |z|", r.z_score.abs(), MONTE_CARLO.z_limit);
        let d: Vec<f64> = [20, 50, 100].iter().map(|&n| edge_deviation(n)).collect();
        let rises = d.windows(2).filter(|w| w[1] >= w[0]).count();
        c.count("edge deviation: non-decreasing steps over N = 20, 50, 100", rises);
    }

    let failed = c.0.iter().filter(|k| !k.pass).count();
    let total = c.0.len();
    let pass = failed == 0;
    Ok(Outcome::new(
        a,
        json!({ "checks": c.0, "passed": total - failed, "total": total }),
        pass,
    )
    .seed(Some(MONTE_CARLO.seed))
    .grid(json!({
        "gue": { "nodes_per_panel": GUE.nodes, "domain": GUE.domain },
        "airy2": AIRY2.window,
        "continuum": CONTINUUM.window,
    }))
    .tolerances(json!({
        "operator": OPERATOR.tolerance,
        "gue": GUE.tolerance,
        "airy2": AIRY2.tolerance,
        "z_limit": MONTE_CARLO.z_limit,
    })))
}
