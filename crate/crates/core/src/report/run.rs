use std::collections::BTreeMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use super::validate::{validate, Diagnostic};
use crate::bracket::{
    bracket, bracket_oracle_gap, jacobi_residual, nonlinear_jacobi_spot, random_test_function, skew_residual, trial_rng, OracleGap,
    Residual, SpotCheck, TrialSetup,
};
use crate::error::{Error, Result};
use crate::geometry::{equivalence_audit, gpc_check, sample_points, BracketSpec, EquivalenceAudit, GeometryReport};
use crate::schwartz::{Grid, TestFunction};
use crate::variational::{boundedness_check, el_gateaux_gap, variational_derivative, Boundedness, Derivative, LinearFunctional};

const GATEAUX_STREAM: usize = 1 << 20;
const ORACLE_STREAM: usize = 1 << 21;

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    /// Variational derivative of a functional at a test function.
    Vd { functional: String, at: Option<String> },
    GateauxCheck { functional: Option<String> },
    Bracket { f: String, g: String, at: Option<String> },
    Skew,
    Jacobi,
    GeometryCheck,
    Classify,
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Vd { .. } => "vd",
            Command::GateauxCheck { .. } => "gateaux-check",
            Command::Bracket { .. } => "bracket",
            Command::Skew => "skew",
            Command::Jacobi => "jacobi",
            Command::GeometryCheck => "geometry-check",
            Command::Classify => "classify",
            Command::Validate => "validate",
        }
    }

    fn arguments(&self) -> Vec<String> {
        match self {
            Command::Vd { functional, at } => std::iter::once(functional.clone()).chain(at.clone()).collect(),
            Command::GateauxCheck { functional } => functional.iter().cloned().collect(),
            Command::Bracket { f, g, at } => [f.clone(), g.clone()].into_iter().chain(at.clone()).collect(),
            _ => Vec::new(),
        }
    }

    fn needs_seed(&self) -> bool {
        matches!(self, Command::GateauxCheck { .. } | Command::Skew | Command::Jacobi | Command::GeometryCheck | Command::Classify)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub grid_l: Option<f64>,
    pub grid_m: Option<usize>,
    pub tol_geometry: Option<f64>,
    pub tol_skew: Option<f64>,
    pub tol_jacobi: Option<f64>,
    pub samples: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        let set = |dst: &mut usize, v: Option<usize>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut cfg.suites.trials, self.trials);
        set(&mut cfg.suites.samples, self.samples);
        set(&mut cfg.grid.m, self.grid_m);
        let setf = |dst: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        setf(&mut cfg.grid.l, self.grid_l);
        setf(&mut cfg.tolerances.geometry, self.tol_geometry);
        setf(&mut cfg.tolerances.skew, self.tol_skew);
        setf(&mut cfg.tolerances.jacobi, self.tol_jacobi);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Poisson {
    Yes,
    No,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub poisson: Poisson,
    pub reasons: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VdDump {
    pub functional: String,
    pub at: String,
    pub nodes: Vec<f64>,
    /// `values[i][x]` = `δF/δu^i` at node `x`.
    pub values: Vec<Vec<f64>>,
    pub boundedness: Boundedness,
}

#[derive(Clone, Debug, Serialize)]
pub struct GateauxCase {
    pub trial: usize,
    pub pairing: f64,
    pub oracle: Derivative,
    /// `|pairing − oracle| / (1 + |oracle|)`.
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GateauxSuite {
    pub functional: String,
    pub trials: usize,
    pub max_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst: GateauxCase,
    pub boundedness: Boundedness,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleSuite {
    pub trials: usize,
    pub max_relative: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub cases: Vec<OracleGap>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BracketValue {
    pub f: String,
    pub g: String,
    pub at: String,
    pub value: f64,
    pub reverse: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Suites {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<EquivalenceAudit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skew: Option<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jacobi: Option<Residual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jacobi_spot: Option<SpotCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSuite>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gateaux: Option<Vec<GateauxSuite>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vd: Option<VdDump>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<BracketValue>,
}

/// Wall-clock data; the only part of a report that varies between runs.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Timing {
    pub finished_unix: f64,
    pub seconds: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub tool: String,
    pub command: String,
    pub arguments: Vec<String>,
    pub config: Option<RunConfig>,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub diagnostics: Vec<Diagnostic>,
    pub error: Option<String>,
    pub suites: Suites,
    pub verdict: Option<Verdict>,
    pub status: Status,
    pub assumptions: Vec<String>,
    pub timing: Timing,
}

impl CheckReport {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        super::json::to_string(self)
    }
}

const ASSUMPTIONS: [&str; 4] = [
    "boundedness of density derivatives is checked empirically on the grid only",
    "skew-symmetry and the Jacobi identity are tested on linear functionals; the reduction to them is taken as valid",
    "single chart: samples and test functions stay inside the configured subchart of the chart domain",
    "integrals are truncated to [-L, L]; test-function tails are certified below eps_tail outside the cut",
];

fn hash(cfg: &RunConfig) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(cfg).expect("config serializes")))
}

fn fmt_point(z: &[f64]) -> String {
    let parts: Vec<String> = z.iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn describe(name: &str) -> &str {
    match name {
        "gpc1" => "gpc1 (Gamma symmetric)",
        "gpc2" => "gpc2 (Gauss equation)",
        "gpc3" => "gpc3 (w g-symmetric)",
        "gpc4" => "gpc4 (Codazzi equation)",
        "compatibility" => "compatibility (nabla g = 0)",
        "levi_civita" => "levi_civita (supplied Gamma vs derived)",
        other => other,
    }
}

struct Context {
    cfg: RunConfig,
    spec: BracketSpec,
    grid: Grid,
    seed: u64,
    timing: BTreeMap<String, f64>,
}

impl Context {
    fn timed<T>(&mut self, name: &str, f: impl FnOnce(&Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f(self);
        self.timing.insert(name.into(), start.elapsed().as_secs_f64());
        out
    }

    fn setup(&self) -> Result<TrialSetup> {
        self.cfg.trial_setup(self.seed)
    }

    fn test_function(&self, name: Option<&String>) -> Result<(String, TestFunction)> {
        let name = match name {
            Some(n) => n.clone(),
            None => self
                .cfg
                .test_functions
                .keys()
                .next()
                .cloned()
                .ok_or_else(|| Error::Invalid("no test function configured; pass one with --at".into()))?,
        };
        let u = self.cfg.test_function(&name)?;
        Ok((name, u))
    }

    fn geometry(&self) -> Result<(GeometryReport, EquivalenceAudit)> {
        let c = &self.cfg.chart;
        let samples = sample_points(&c.subchart.lo, &c.subchart.hi, &self.spec.omega, c.margin, self.cfg.suites.samples);
        let tol = self.cfg.tolerances.geometry;
        Ok((gpc_check(&self.spec, &samples, tol, self.seed)?, equivalence_audit(&self.spec, &samples, tol, self.seed)?))
    }

    fn gateaux(&self, name: &str) -> Result<GateauxSuite> {
        let f = self.cfg.functional(name)?;
        let setup = self.setup()?;
        let probe = TrialSetup { amplitude: setup.amplitude * 2.0 / 3.0, ..setup.clone() };
        let omega = &self.spec.omega;
        let trials = self.cfg.suites.gateaux_trials.max(1);
        let cases = crate::par::try_map_indices(trials, |t| -> Result<(GateauxCase, TestFunction)> {
            let mut rng = trial_rng(self.seed, GATEAUX_STREAM + t);
            let u = random_test_function(&self.spec, &setup, &mut rng)?;
            let k = random_test_function(&self.spec, &probe, &mut rng)?;
            let (pairing, oracle) = el_gateaux_gap(&f, &u, &k, omega, &self.grid)?;
            let gap = (pairing - oracle.value).abs() / (1.0 + oracle.value.abs());
            Ok((GateauxCase { trial: t, pairing, oracle, gap }, u))
        })?;
        let boundedness = boundedness_check(&f, &cases[0].1, &self.grid)?;
        let worst = cases.iter().map(|c| &c.0).reduce(|a, b| if b.gap > a.gap { b } else { a }).unwrap().clone();
        let tolerance = self.cfg.tolerances.gateaux;
        Ok(GateauxSuite {
            functional: name.into(),
            trials,
            max_gap: worst.gap,
            tolerance,
            pass: worst.gap <= tolerance && boundedness.bounded,
            worst,
            boundedness,
        })
    }

    fn oracle(&self) -> Result<OracleSuite> {
        let setup = self.setup()?;
        let probe = TrialSetup { amplitude: setup.amplitude * 2.0 / 3.0, ..setup.clone() };
        let trials = self.cfg.suites.oracle_trials.max(1);
        let n = self.spec.n();
        let cases = crate::par::try_map_indices(trials, |t| {
            let mut rng = trial_rng(self.seed, ORACLE_STREAM + t);
            let f = LinearFunctional::random(n, self.grid.half_width(), &mut rng);
            let g = LinearFunctional::random(n, self.grid.half_width(), &mut rng);
            let u = random_test_function(&self.spec, &setup, &mut rng)?;
            let k = random_test_function(&self.spec, &probe, &mut rng)?;
            bracket_oracle_gap(&self.spec, &f, &g, &u, &k, &self.grid)
        })?;
        let max_relative = cases.iter().map(|c| c.relative).fold(0.0, f64::max);
        let tolerance = self.cfg.tolerances.oracle;
        Ok(OracleSuite { trials, max_relative, tolerance, pass: max_relative <= tolerance, cases })
    }
}

/// Runs `command` on the configuration text `source`. Never panics on bad
/// input: problems end up in `diagnostics` or `error` with status `error`.
pub fn run(source: &str, command: &Command, overrides: &Overrides) -> CheckReport {
    let mut report = CheckReport {
        tool: format!("wnlpb {}", env!("CARGO_PKG_VERSION")),
        command: command.name().into(),
        arguments: command.arguments(),
        config: None,
        config_hash: None,
        seed: None,
        diagnostics: Vec::new(),
        error: None,
        suites: Suites::default(),
        verdict: None,
        status: Status::Error,
        assumptions: ASSUMPTIONS.iter().map(|s| s.to_string()).collect(),
        timing: Timing::default(),
    };
    let mut timing = BTreeMap::new();
    match RunConfig::from_toml(source) {
        Err(e) => report.diagnostics.push(Diagnostic { location: "config".into(), message: e.to_string() }),
        Ok(mut cfg) => {
            overrides.apply(&mut cfg);
            report.config_hash = Some(hash(&cfg));
            report.seed = cfg.seed;
            let start = Instant::now();
            report.diagnostics = validate(&cfg, command.needs_seed());
            timing.insert("validate".into(), start.elapsed().as_secs_f64());
            report.config = Some(cfg.clone());
            if report.diagnostics.is_empty() {
                if *command == Command::Validate {
                    report.status = Status::Pass;
                } else {
                    match execute(cfg, command, &mut report, &mut timing) {
                        Ok(status) => report.status = status,
                        Err(e) => report.error = Some(e.to_string()),
                    }
                }
            }
        }
    }
    report.timing = Timing {
        finished_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64()),
        seconds: timing,
    };
    report
}

fn execute(cfg: RunConfig, command: &Command, report: &mut CheckReport, timing: &mut BTreeMap<String, f64>) -> Result<Status> {
    let mut ctx = Context { spec: cfg.spec()?, grid: cfg.grid()?, seed: cfg.seed.unwrap_or(0), cfg, timing: BTreeMap::new() };
    let suites = &mut report.suites;
    let status = match command {
        Command::Validate => Status::Pass,
        Command::Vd { functional, at } => {
            let f = ctx.cfg.functional(functional)?;
            let (at, u) = ctx.test_function(at.as_ref())?;
            let dump = ctx.timed("vd", |c| {
                let vd = variational_derivative(&f, &u, &c.grid)?;
                Ok(VdDump {
                    functional: functional.clone(),
                    at,
                    nodes: c.grid.nodes().to_vec(),
                    values: vd.values,
                    boundedness: boundedness_check(&f, &u, &c.grid)?,
                })
            })?;
            suites.vd = Some(dump);
            Status::Pass
        }
        Command::Bracket { f, g, at } => {
            let (ff, gg) = (ctx.cfg.functional(f)?, ctx.cfg.functional(g)?);
            let (at, u) = ctx.test_function(at.as_ref())?;
            let (value, reverse) = ctx.timed("bracket", |c| {
                Ok((bracket(&c.spec, &ff, &gg, &u, &c.grid)?, bracket(&c.spec, &gg, &ff, &u, &c.grid)?))
            })?;
            suites.bracket = Some(BracketValue { f: f.clone(), g: g.clone(), at, value, reverse });
            Status::Pass
        }
        Command::GateauxCheck { functional } => {
            let names: Vec<String> = match functional {
                Some(n) => vec![n.clone()],
                None => ctx.cfg.functionals.keys().cloned().collect(),
            };
            if names.is_empty() {
                return Err(Error::Invalid("no functionals configured".into()));
            }
            let mut out = Vec::new();
            for n in &names {
                out.push(ctx.timed(&format!("gateaux.{n}"), |c| c.gateaux(n))?);
            }
            let pass = out.iter().all(|s| s.pass);
            suites.gateaux = Some(out);
            pass_or_fail(pass)
        }
        Command::Skew => {
            let skew = ctx.timed("skew", |c| skew_residual(&c.spec, &c.setup()?, c.cfg.tolerances.skew))?;
            let pass = skew.pass;
            suites.skew = Some(skew);
            pass_or_fail(pass)
        }
        Command::Jacobi => {
            let skew = ctx.timed("skew", |c| skew_residual(&c.spec, &c.setup()?, c.cfg.tolerances.skew))?;
            let mut pass = skew.pass;
            if skew.pass {
                let jac = ctx.timed("jacobi", |c| jacobi_residual(&c.spec, &c.setup()?, c.cfg.tolerances.jacobi))?;
                pass = jac.pass;
                suites.jacobi = Some(jac);
                suites.jacobi_spot = Some(ctx.timed("jacobi_spot", |c| nonlinear_jacobi_spot(&c.spec, &c.setup()?))?);
            }
            suites.skew = Some(skew);
            pass_or_fail(pass)
        }
        Command::GeometryCheck => {
            let (geo, eq) = ctx.timed("geometry", |c| c.geometry())?;
            let pass = geo.gpc_pass() && geo.coefficients_pass() && eq.mismatches.is_empty();
            suites.geometry = Some(geo);
            suites.equivalence = Some(eq);
            pass_or_fail(pass)
        }
        Command::Classify => {
            let (geo, eq) = ctx.timed("geometry", |c| c.geometry())?;
            let skew = ctx.timed("skew", |c| skew_residual(&c.spec, &c.setup()?, c.cfg.tolerances.skew))?;
            let jac = if skew.pass {
                Some(ctx.timed("jacobi", |c| jacobi_residual(&c.spec, &c.setup()?, c.cfg.tolerances.jacobi))?)
            } else {
                None
            };
            let spot = ctx.timed("jacobi_spot", |c| nonlinear_jacobi_spot(&c.spec, &c.setup()?))?;
            let oracle = ctx.timed("oracle", |c| c.oracle())?;
            let verdict = classify(&geo, &eq, &skew, jac.as_ref(), &oracle);
            let status = if verdict.poisson == Poisson::Yes { Status::Pass } else { Status::Fail };
            report.verdict = Some(verdict);
            suites.geometry = Some(geo);
            suites.equivalence = Some(eq);
            suites.skew = Some(skew);
            suites.jacobi = jac;
            suites.jacobi_spot = Some(spot);
            suites.oracle = Some(oracle);
            status
        }
    };
    timing.extend(std::mem::take(&mut ctx.timing));
    Ok(status)
}

fn pass_or_fail(pass: bool) -> Status {
    if pass {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn residual_reason(name: &str, r: &Residual) -> String {
    format!("{name} residual {:.3e} exceeds {:.1e} (trial {}, seed {})", r.value, r.tolerance, r.witness.trial, r.seed)
}

/// Poisson iff the geometry and coefficient suites pass; the random trials
/// and the oracle must agree with that, otherwise the answer is withheld.
fn classify(geo: &GeometryReport, eq: &EquivalenceAudit, skew: &Residual, jac: Option<&Residual>, oracle: &OracleSuite) -> Verdict {
    let mut reasons: Vec<String> = geo
        .failures()
        .iter()
        .map(|c| format!("{} residual {:.16e} exceeds {:.1e} at u = {}", describe(&c.name), c.value, c.tolerance, fmt_point(&c.worst_point)))
        .collect();
    let geometry_ok = reasons.is_empty();
    let mut trials_ok = true;
    if !skew.pass {
        reasons.push(residual_reason("skew", skew));
        reasons.push("Jacobi trials skipped because skew-symmetry fails".into());
        trials_ok = false;
    }
    if let Some(j) = jac.filter(|j| !j.pass) {
        reasons.push(residual_reason("Jacobi", j));
        trials_ok = false;
    }
    if !eq.mismatches.is_empty() {
        reasons.push(format!("{} sample points where the coefficient and geometric conditions disagree", eq.mismatches.len()));
    }
    if !oracle.pass {
        reasons.push(format!("closed-form bracket derivative deviates from its oracle by {:.3e}", oracle.max_relative));
    }
    let consistent = eq.mismatches.is_empty() && oracle.pass;
    let poisson = match (geometry_ok, trials_ok) {
        (false, _) => {
            if trials_ok {
                reasons.push("the random trials did not detect the geometric defect".into());
            }
            Poisson::No
        }
        (true, true) if consistent => {
            reasons.push("all geometric conditions, coefficient tensors, skew and Jacobi residuals within tolerance".into());
            Poisson::Yes
        }
        (true, false) => {
            reasons.push("geometry passes but a random trial does not; numerical resolution is suspect".into());
            Poisson::Inconclusive
        }
        (true, true) => Poisson::Inconclusive,
    };
    Verdict { poisson, reasons }
}
