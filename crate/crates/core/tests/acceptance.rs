//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines always reach stdout. Exits non-zero only when a
//! criterion outside `KNOWN_RED` fails.

#![allow(clippy::needless_range_loop)]

use std::path::Path;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erf;
use wnlpb_core::bracket::random_test_function;
use wnlpb_core::geometry::examples::printed_christoffel;
use wnlpb_core::geometry::{gpc_check, sample_points, PointGeometry};
use wnlpb_core::report::{run, CheckReport, Command, Overrides, Poisson, RunConfig};
use wnlpb_core::schwartz::{GaussTerm, Grid, TestFunction};
use wnlpb_core::variational::{
    boundedness_check, el_gateaux_gap, variational_derivative, Functional, LocalDensity, WnlChain,
};

/// Sub-checks expected to stay red; see the decisions ledger.
const KNOWN_RED: [&str; 1] = ["printed Gamma^1_22"];

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check { name: name.into(), pass, detail }
}

struct Outcome {
    unexpected: usize,
}

impl Outcome {
    fn report(&mut self, n: usize, title: &str, checks: Vec<Check>) {
        let pass = checks.iter().all(|c| c.pass);
        println!("criterion {n} {}: {title}", if pass { "PASS" } else { "FAIL" });
        for c in &checks {
            let known = !c.pass && KNOWN_RED.contains(&c.name.as_str());
            let tag = match (c.pass, known) {
                (true, _) => "ok",
                (false, true) => "FAIL (known)",
                (false, false) => "FAIL",
            };
            println!("    {tag:<12} {}: {}", c.name, c.detail);
            if !c.pass && !known {
                self.unexpected += 1;
            }
        }
    }
}

fn corpus(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    std::fs::read_to_string(p).expect("corpus file")
}

fn classify(name: &str) -> CheckReport {
    run(&corpus(name), &Command::Classify, &Overrides::default())
}

fn sample(g: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    g.nodes().iter().map(|&x| f(x)).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn dinv_suite() -> Vec<Check> {
    let g = Grid::default();
    let f = sample(&g, |x| (1.0 + x - 0.3 * x * x) * (-0.8 * (x - 0.5).powi(2)).exp());
    let anti = max_abs_diff(&g.differentiate(&g.dinv(&f)), &f);
    let total = g.integrate(&f).value;
    let d = g.dinv(&f);
    let edge = (d[0] + 0.5 * total).abs().max((d[g.len() - 1] - 0.5 * total).abs());
    let a = sample(&g, |x| (-(x - 0.7).powi(2)).exp());
    let b = sample(&g, |x| x * (-0.5 * x * x).exp() + 0.3 * (-2.0 * (x + 1.0).powi(2)).exp());
    let (da, db) = (g.dinv(&a), g.dinv(&b));
    let prod: Vec<f64> = da.iter().zip(&db).map(|(p, q)| p * q).collect();
    let rhs: Vec<f64> = (0..g.len()).map(|k| da[k] * b[k] + a[k] * db[k]).collect();
    let product = max_abs_diff(&g.differentiate(&prod), &rhs);
    let gauss = g.dinv(&sample(&g, |x| (-x * x).exp()));
    let oracle = sample(&g, |x| 0.5 * std::f64::consts::PI.sqrt() * erf(x));
    let erf_gap = max_abs_diff(&gauss, &oracle);
    vec![
        check("antiderivative", anti <= 1e-6, format!("sup |D d^-1 f - f| = {anti:.3e} <= 1e-6")),
        check("edge limits", edge <= 1e-8, format!("|d^-1 f(+-L) -+ I/2| = {edge:.3e} <= 1e-8")),
        check("product identity", product <= 1e-8, format!("sup residual {product:.3e} <= 1e-8")),
        check("error function", erf_gap <= 1e-9, format!("sup |d^-1 exp(-x^2) - sqrt(pi)/2 erf| = {erf_gap:.3e} <= 1e-9")),
    ]
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (TestFunction, TestFunction) {
    let mut tf = |s: f64| {
        let comps = (0..n)
            .map(|_| {
                (0..2)
                    .map(|_| GaussTerm::new(vec![rng.gen_range(-s..s), rng.gen_range(-s..s) * 0.5], rng.gen_range(0.5..1.5), rng.gen_range(-1.5..1.5)))
                    .collect()
            })
            .collect();
        TestFunction::new(vec![0.0; n], comps).unwrap()
    };
    (tf(0.8), tf(0.5))
}

/// Largest `|d_G F − ∫ δF/δu k| / (1 + |d_G F|)` over `pairs` random `(u, k)`.
fn duality(f: &Functional, pairs: usize, seed: u64) -> f64 {
    let g = Grid::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omega = wnlpb_core::schwartz::Omega::whole(1);
    (0..pairs)
        .map(|_| {
            let (u, k) = random_pair(&mut rng, 1);
            let (pairing, oracle) = el_gateaux_gap(f, &u, &k, &omega, &g).unwrap();
            (pairing - oracle.value).abs() / (1.0 + oracle.value.abs())
        })
        .fold(0.0, f64::max)
}

fn euler_lagrange() -> Vec<Check> {
    let kdv = Functional::local("kdv", LocalDensity::parse("u^3 - 0.5*u*u_xx", 1).unwrap());
    let gap = duality(&kdv, 20, 2);
    let g = Grid::default();
    let u = TestFunction::new(vec![0.0], vec![vec![GaussTerm::gaussian(1.0, 1.0, 0.0)]]).unwrap();
    let vd = variational_derivative(&kdv, &u, &g).unwrap();
    let want = sample(&g, |x| {
        let e = (-x * x).exp();
        3.0 * e * e - (4.0 * x * x - 2.0) * e
    });
    let pointwise = max_abs_diff(&vd.values[0], &want);
    vec![
        check("KdV duality", gap <= 1e-5, format!("20 pairs, max gap {gap:.3e} <= 1e-5 (1 + |d_G F|)")),
        check("KdV gradient", pointwise <= 1e-10, format!("sup |dH/du - (3u^2 - u_xx)| = {pointwise:.3e} <= 1e-10")),
    ]
}

fn wnl_variational() -> Vec<Check> {
    let d = |s: &str| LocalDensity::parse(s, 1).unwrap();
    let depth1 = Functional::new("depth1", WnlChain::new(d("u*u_x + exp(-x^2)"), vec![vec![d("u^2")]]).unwrap());
    let depth2 =
        Functional::new("depth2", WnlChain::new(d("exp(-x^2)*u"), vec![vec![d("u_x*u"), d("exp(-x^2)*u^2")]]).unwrap());
    let (g1, g2) = (duality(&depth1, 20, 3), duality(&depth2, 20, 4));
    let g = Grid::default();
    let u = TestFunction::new(vec![0.0], vec![vec![GaussTerm::new(vec![0.7, 0.2], 1.1, 0.3)]]).unwrap();
    let zero = Functional::new("u d^-1 u", WnlChain::new(d("u"), vec![vec![d("u")]]).unwrap());
    let degenerate = variational_derivative(&zero, &u, &g).unwrap().sup_norm();
    let mut unbounded = Vec::new();
    let mut count = 0;
    for name in ["gardner.cfg", "flat2d.cfg", "example_constant_curvature.cfg", "broken_gauss.cfg", "broken_gamma.cfg"] {
        let cfg = RunConfig::from_toml(&corpus(name)).unwrap();
        let spec = cfg.spec().unwrap();
        let setup = cfg.trial_setup(cfg.seed.unwrap()).unwrap();
        let u = random_test_function(&spec, &setup, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        for f in cfg.functionals.keys() {
            let b = boundedness_check(&cfg.functional(f).unwrap(), &u, &setup.grid).unwrap();
            count += 1;
            if !b.bounded {
                unbounded.push(format!("{name}:{f}"));
            }
        }
    }
    vec![
        check("depth-1 duality", g1 <= 2e-5, format!("20 pairs, max gap {g1:.3e} <= 2e-5")),
        check("depth-2 duality", g2 <= 2e-5, format!("20 pairs, max gap {g2:.3e} <= 2e-5")),
        check("u d^-1 u", degenerate <= 1e-8, format!("sup |dF/du| = {degenerate:.3e} <= 1e-8")),
        check("boundedness", unbounded.is_empty(), format!("{count} corpus functionals, unbounded: {unbounded:?}")),
    ]
}

fn geometry_example() -> Vec<Check> {
    let cfg = RunConfig::from_toml(&corpus("example_constant_curvature.cfg")).unwrap();
    let spec = cfg.spec().unwrap();
    let (k, c1, c2, c3) = (cfg.constants["k"], cfg.constants["c1"], cfg.constants["c2"], cfg.constants["c3"]);
    let s = &cfg.chart.subchart;
    let zs = sample_points(&s.lo, &s.hi, &spec.omega, cfg.chart.margin, 50);
    let labels = ["1_11", "1_12", "1_21", "1_22", "2_11", "2_12", "2_21", "2_22"];
    let mut worst = [0.0f64; 8];
    let mut riemann: f64 = 0.0;
    for z in &zs {
        let p = PointGeometry::new(&spec, z).unwrap();
        let t = printed_christoffel(k, c1, c2, c3, z[0], z[1]);
        for idx in 0..8 {
            let (j, a, b) = (idx / 4, (idx / 2) % 2, idx % 2);
            let want = t[j][a][b];
            worst[idx] = worst[idx].max((p.gamma[[j, a, b]] - want).abs() / (1.0 + want.abs()));
        }
        for i in 0..2 {
            for j in 0..2 {
                for q in 0..2 {
                    for l in 0..2 {
                        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                        riemann = riemann.max((p.riemann[[i, j, q, l]] - k * (d(i, q) * d(j, l) - d(i, l) * d(j, q))).abs());
                    }
                }
            }
        }
    }
    let mut checks: Vec<Check> = labels
        .iter()
        .zip(worst)
        .map(|(l, w)| check(&format!("printed Gamma^{l}"), w <= 1e-9, format!("50 points, max deviation {w:.3e} <= 1e-9")))
        .collect();
    checks.push(check("Riemann", riemann <= 1e-8, format!("|R - k(dd - dd)| = {riemann:.3e} <= 1e-8")));
    let r = gpc_check(&spec, &zs, 1e-8, 17).unwrap();
    for name in ["gpc1", "gpc2", "gpc3", "gpc4", "a", "b", "c", "d", "e", "m"] {
        let c = r.condition(name).unwrap();
        checks.push(check(name, c.pass, format!("max {:.3e} <= 1e-8", c.value)));
    }
    checks
}

fn forward(example: &CheckReport) -> Vec<Check> {
    let s = &example.suites;
    let (skew, jac) = (s.skew.as_ref().unwrap(), s.jacobi.as_ref().unwrap());
    vec![
        check("verdict", example.verdict.as_ref().unwrap().poisson == Poisson::Yes, format!("{:?}", example.verdict.as_ref().unwrap().poisson)),
        check("skew", skew.value <= 1e-7, format!("{} trials, max {:.3e} <= 1e-7", skew.per_trial.len(), skew.value)),
        check("Jacobi", jac.value <= 1e-6, format!("{} trials, max {:.3e} <= 1e-6", jac.per_trial.len(), jac.value)),
    ]
}

fn contrapositive(gauss: &CheckReport) -> Vec<Check> {
    let geo = gauss.suites.geometry.as_ref().unwrap();
    let gpc2 = geo.condition("gpc2").unwrap().value;
    let jac = gauss.suites.jacobi.as_ref().unwrap();
    let jmax = jac.per_trial.iter().cloned().fold(0.0, f64::max);
    let gamma_at = |eps: f64| {
        let mut cfg = RunConfig::from_toml(&corpus("broken_gamma.cfg")).unwrap();
        cfg.constants.insert("eps".into(), eps);
        let s = &cfg.chart.subchart;
        let spec = cfg.spec().unwrap();
        let zs = sample_points(&s.lo, &s.hi, &spec.omega, cfg.chart.margin, 50);
        let r = gpc_check(&spec, &zs, 1e-8, 0).unwrap();
        (r.condition("gpc1").unwrap().clone(), r.condition("d").unwrap().clone())
    };
    let (g2, d2) = gamma_at(1e-2);
    let (g3, d3) = gamma_at(1e-3);
    let (r1, rd) = (g2.value / g3.value, d2.value / d3.value);
    vec![
        check("Gauss defect", (gpc2 - 2.0).abs() <= 1e-10, format!("broken_gauss gpc2 = {gpc2:.16e}")),
        check("Jacobi detects", jmax >= 1e-2, format!("broken_gauss max Jacobi residual {jmax:.3e} >= 1e-2")),
        check("Gamma symmetry fails", !g2.pass && !d2.pass, format!("broken_gamma gpc1 = {:.3e}, d = {:.3e}", g2.value, d2.value)),
        check(
            "proportional to eps",
            (r1 / 10.0 - 1.0).abs() <= 0.05 && (rd / 10.0 - 1.0).abs() <= 0.05,
            format!("ratios eps 1e-2 / 1e-3: gpc1 {r1:.6}, d {rd:.6} (10 +- 5%)"),
        ),
    ]
}

fn oracle(reports: &[(&str, CheckReport)]) -> Vec<Check> {
    reports
        .iter()
        .map(|(name, r)| {
            let o = r.suites.oracle.as_ref().unwrap();
            check(name, o.max_relative <= 5e-5, format!("{} trials, max relative gap {:.3e} <= 5e-5", o.trials, o.max_relative))
        })
        .collect()
}

fn equivalence(reports: &[(&str, CheckReport)]) -> Vec<Check> {
    reports
        .iter()
        .map(|(name, r)| {
            let e = r.suites.equivalence.as_ref().unwrap();
            check(
                name,
                e.mismatches.is_empty() && e.samples == 50,
                format!("{} points: {} both pass, {} both fail, {} mismatches", e.samples, e.both_pass, e.both_fail, e.mismatches.len()),
            )
        })
        .collect()
}

fn determinism(first: &CheckReport) -> Vec<Check> {
    let second = classify("example_constant_curvature.cfg");
    let cut = |s: String| s[..s.find("\"timing\"").unwrap()].to_string();
    let (a, b) = (cut(first.to_json()), cut(second.to_json()));
    vec![check("classify twice", a == b, format!("{} bytes before the timing field, identical: {}", a.len(), a == b))]
}

fn main() -> ExitCode {
    let mut out = Outcome { unexpected: 0 };
    out.report(1, "d^-1 numerics", dinv_suite());
    out.report(2, "Euler-Lagrange vs Gateaux", euler_lagrange());
    out.report(3, "weakly nonlocal variational derivative", wnl_variational());
    out.report(4, "geometry of the constant-curvature example", geometry_example());
    let names = ["gardner.cfg", "flat2d.cfg", "example_constant_curvature.cfg", "broken_gauss.cfg", "broken_gamma.cfg"];
    let reports: Vec<(&str, CheckReport)> = names.iter().map(|n| (*n, classify(n))).collect();
    out.report(5, "classify the example: Poisson yes", forward(&reports[2].1));
    out.report(6, "broken specs are rejected", contrapositive(&reports[3].1));
    out.report(7, "bracket derivative vs its oracle", oracle(&reports));
    out.report(8, "coefficient/geometric equivalence audit", equivalence(&reports));
    out.report(9, "deterministic reports", determinism(&reports[2].1));
    if out.unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} unexpected failing checks", out.unexpected);
        ExitCode::FAILURE
    }
}
