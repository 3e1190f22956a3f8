use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{bracket, linear_bracket, linear_covector, Along};
use crate::error::{Error, Result};
use crate::expr::JetExpr;
use crate::geometry::{BracketSpec, GammaSource};
use crate::par;
use crate::schwartz::{GaussTerm, Grid, TestFunction};
use crate::variational::{central_difference, euler_lagrange, Derivative, Functional, LinearFunctional, LocalDensity, WnlChain};

/// Where random test functions live: around `base`, with image at depth
/// greater than `margin` inside the spec's chart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSetup {
    #[serde(skip)]
    pub grid: Grid,
    pub base: Vec<f64>,
    pub margin: f64,
    pub amplitude: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Deterministic per-trial generator: stream `trial + 1` of the seeded ChaCha.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

/// Two polynomial-Gaussian terms per component around `base`, redrawn until
/// the image fits the chart.
pub fn random_test_function<R: Rng + ?Sized>(spec: &BracketSpec, setup: &TrialSetup, rng: &mut R) -> Result<TestFunction> {
    let amp = setup.amplitude;
    let mut last = None;
    for _ in 0..64 {
        let comps = (0..spec.n())
            .map(|_| {
                (0..2)
                    .map(|_| {
                        GaussTerm::new(
                            vec![rng.gen_range(-amp..=amp), rng.gen_range(-amp..=amp) * 0.5],
                            rng.gen_range(0.5..1.5),
                            rng.gen_range(-2.0..2.0),
                        )
                    })
                    .collect()
            })
            .collect();
        let u = TestFunction::new(setup.base.clone(), comps)?;
        match u.check_image(&spec.omega, setup.margin) {
            Ok(()) => return Ok(u),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Invalid("no admissible test function".into())))
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub trial: usize,
    pub functionals: Vec<LinearFunctional>,
    pub u: TestFunction,
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    /// Largest normalized residual over the trials.
    pub value: f64,
    pub per_trial: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
    pub witness: Witness,
}

fn finish(per_trial: Vec<(f64, Witness)>, tolerance: f64, seed: u64) -> Residual {
    let (worst, _) = per_trial.iter().enumerate().fold((0, f64::NEG_INFINITY), |(bi, bv), (i, (v, _))| {
        if *v > bv || v.is_nan() {
            (i, *v)
        } else {
            (bi, bv)
        }
    });
    let value = per_trial[worst].0;
    let witness = per_trial[worst].1.clone();
    Residual {
        value,
        per_trial: per_trial.into_iter().map(|(v, _)| v).collect(),
        tolerance,
        pass: value <= tolerance,
        seed,
        witness,
    }
}

/// `max |{F,G} + {G,F}| / max(1, |{F,G}|)` over random linear `F`, `G`.
pub fn skew_residual(spec: &BracketSpec, setup: &TrialSetup, tolerance: f64) -> Result<Residual> {
    let grid = &setup.grid;
    let per = par::try_map_indices(setup.trials, |t| -> Result<(f64, Witness)> {
        let mut rng = trial_rng(setup.seed, t);
        let f = LinearFunctional::random(spec.n(), grid.half_width(), &mut rng);
        let g = LinearFunctional::random(spec.n(), grid.half_width(), &mut rng);
        let u = random_test_function(spec, setup, &mut rng)?;
        let along = Along::new(spec, &u, grid)?;
        let (cf, cg) = (linear_covector(&f, grid), linear_covector(&g, grid));
        let fg = linear_bracket(&along, &cf, &cg, grid)?;
        let gf = linear_bracket(&along, &cg, &cf, grid)?;
        Ok(((fg + gf).abs() / fg.abs().max(1.0), Witness { trial: t, functionals: vec![f, g], u }))
    })?;
    Ok(finish(per, tolerance, setup.seed))
}

/// `max |Σ_cyc {{F,G},H}| / max(1, |{F,G}|, |{G,H}|, |{H,F}|)` over random
/// linear `F`, `G`, `H`, using the closed-form variational derivative of
/// the inner bracket.
pub fn jacobi_residual(spec: &BracketSpec, setup: &TrialSetup, tolerance: f64) -> Result<Residual> {
    let grid = &setup.grid;
    let per = par::try_map_indices(setup.trials, |t| -> Result<(f64, Witness)> {
        let mut rng = trial_rng(setup.seed, t);
        let fs: Vec<LinearFunctional> = (0..3).map(|_| LinearFunctional::random(spec.n(), grid.half_width(), &mut rng)).collect();
        let u = random_test_function(spec, setup, &mut rng)?;
        let along = Along::new(spec, &u, grid)?;
        let cs: Vec<_> = fs.iter().map(|f| linear_covector(f, grid)).collect();
        let mut scale: f64 = 1.0;
        let mut total = 0.0;
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            scale = scale.max(linear_bracket(&along, &cs[a], &cs[b], grid)?.abs());
            let vd = along.vd_of_bracket(&cs[a], &cs[b], grid)?;
            let ph = along.apply_p(&cs[c], grid)?;
            let prod: Vec<f64> = (0..grid.len()).map(|x| (0..spec.n()).map(|p| vd[p][x] * ph[p][x]).sum()).collect();
            total += grid.integrate(&prod).value;
        }
        Ok((total.abs() / scale, Witness { trial: t, functionals: fs, u }))
    })?;
    Ok(finish(per, tolerance, setup.seed))
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleGap {
    pub closed_form: f64,
    pub oracle: Derivative,
    pub relative: f64,
}

/// `∫ δ{F,G}/δu · k` against the Gateaux differential of `u ↦ {F,G}(u)`.
pub fn bracket_oracle_gap(
    spec: &BracketSpec,
    f: &LinearFunctional,
    g: &LinearFunctional,
    u: &TestFunction,
    k: &TestFunction,
    grid: &Grid,
) -> Result<OracleGap> {
    let (cf, cg) = (linear_covector(f, grid), linear_covector(g, grid));
    let along = Along::new(spec, u, grid)?;
    let vd = along.vd_of_bracket(&cf, &cg, grid)?;
    let ks = k.sample(grid, 0)?;
    let dir: Vec<Vec<f64>> = ks.iter().zip(k.base()).map(|(c, b)| c.iter().map(|v| v - b).collect()).collect();
    let prod: Vec<f64> = (0..grid.len()).map(|x| (0..spec.n()).map(|p| vd[p][x] * dir[p][x]).sum()).collect();
    let closed_form = grid.integrate(&prod).value;
    let oracle = central_difference(|t| {
        let v = u.perturbed(k, t)?;
        let along = Along::new(spec, &v, grid)?;
        linear_bracket(&along, &cf, &cg, grid)
    })?;
    let relative = (closed_form - oracle.value).abs() / oracle.value.abs().max(1.0);
    Ok(OracleGap { closed_form, oracle, relative })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpotCheck {
    pub ran: bool,
    pub reason: String,
    pub value: Option<f64>,
}

/// `{A,B}` for local `A`, `B` as a WNL functional: a local part plus one
/// depth-one chain. Needs Γ as expressions.
fn bracket_functional(spec: &BracketSpec, a: &LocalDensity, b: &LocalDensity) -> Result<Functional> {
    let n = spec.n();
    let gamma = spec.gamma().ok_or_else(|| Error::Invalid("symbolic Gamma required".into()))?;
    let (ea, eb) = (euler_lagrange(a), euler_lagrange(b));
    let ux = |k: usize| JetExpr::var(k, 1);
    let mut local = Vec::new();
    let mut outer = Vec::new();
    let mut inner = Vec::new();
    for i in 0..n {
        for j in 0..n {
            local.push(ea[i].clone() * spec.g()[i][j].clone() * eb[j].d_total());
            for s in 0..n {
                for k in 0..n {
                    local.push(-(ea[i].clone() * spec.g()[i][s].clone() * gamma[j][s][k].clone() * ux(k) * eb[j].clone()));
                }
            }
        }
        for k in 0..n {
            outer.push(ea[i].clone() * spec.w()[i][k].clone() * ux(k));
            inner.push(spec.w()[i][k].clone() * ux(k) * eb[i].clone());
        }
    }
    let density = |v: Vec<JetExpr>| LocalDensity::new(JetExpr::Sum(v).simplify(), n);
    let chain = WnlChain::new(density(outer)?, vec![vec![density(inner)?]])?;
    Ok(Functional::combination("bracket", vec![(1.0, WnlChain::local(density(local)?)), (1.0, chain)]))
}

/// Jacobi identity on three non-linear local functionals, recorded in
/// reports but never part of a verdict.
pub fn nonlinear_jacobi_spot(spec: &BracketSpec, setup: &TrialSetup) -> Result<SpotCheck> {
    if spec.source() == GammaSource::LeviCivita {
        return Ok(SpotCheck {
            ran: false,
            reason: "Gamma is derived pointwise; the nested bracket needs it as an expression".into(),
            value: None,
        });
    }
    let n = spec.n();
    let shifted = |j: usize| JetExpr::var(j, 0) - JetExpr::Const(setup.base[j]);
    let sq: Vec<JetExpr> = (0..n).map(|j| shifted(j).powi(2)).collect();
    let a = LocalDensity::new((JetExpr::Const(0.5) * JetExpr::Sum(sq)).simplify(), n)?;
    let s: JetExpr = JetExpr::Sum((0..n).map(shifted).collect());
    let b = LocalDensity::new((s.clone().powi(3) * JetExpr::Const(1.0 / 6.0)).simplify(), n)?;
    let c = LocalDensity::new((JetExpr::X * s + JetExpr::Const(0.5) * JetExpr::var(0, 1).powi(2)).simplify(), n)?;
    let mut rng = trial_rng(setup.seed, usize::MAX - 1);
    let u = random_test_function(spec, setup, &mut rng)?;
    let grid = &setup.grid;
    let ds = [a, b, c];
    let mut total = 0.0;
    let mut scale: f64 = 1.0;
    for (x, y, z) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let xy = bracket_functional(spec, &ds[x], &ds[y])?;
        scale = scale.max(bracket(spec, &Functional::local("x", ds[x].clone()), &Functional::local("y", ds[y].clone()), &u, grid)?.abs());
        total += bracket(spec, &xy, &Functional::local("z", ds[z].clone()), &u, grid)?;
    }
    Ok(SpotCheck { ran: true, reason: "three local functionals, one trial".into(), value: Some(total.abs() / scale) })
}
