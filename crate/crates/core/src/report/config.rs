use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bracket::TrialSetup;
use crate::error::{Error, Result};
use crate::expr::{JetExpr, Parser};
use crate::geometry::BracketSpec;
use crate::schwartz::{GaussTerm, Grid, HalfSpace, Omega, TestFunction, DEFAULT_EPS_TAIL, DEFAULT_L, DEFAULT_M};
use crate::variational::{Functional, LocalDensity, WnlChain, MAX_CHAINS, MAX_CHAIN_DEPTH};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub n: usize,
    /// Open half-spaces `normal·u > offset`.
    #[serde(default)]
    pub constraints: Vec<ConstraintConfig>,
    pub subchart: BoxConfig,
    /// Constant loop the random test functions are built around.
    pub base: Option<Vec<f64>>,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_margin() -> f64 {
    0.2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L", default = "default_l")]
    pub l: f64,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_eps")]
    pub eps_tail: f64,
}

fn default_l() -> f64 {
    DEFAULT_L
}
fn default_m() -> usize {
    DEFAULT_M
}
fn default_eps() -> f64 {
    DEFAULT_EPS_TAIL
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { l: DEFAULT_L, m: DEFAULT_M, eps_tail: DEFAULT_EPS_TAIL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketConfig {
    pub g: Vec<Vec<String>>,
    /// `gamma[j][s][k] = Γ^j_{sk}`; derived from `g` when absent.
    pub gamma: Option<Vec<Vec<Vec<String>>>>,
    pub w: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalConfig {
    pub outer: String,
    /// Nested chains, innermost density last.
    #[serde(default)]
    pub chains: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub poly: Vec<f64>,
    pub a: f64,
    #[serde(default)]
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionConfig {
    pub base: Option<Vec<f64>>,
    /// One list of terms per component.
    pub components: Vec<Vec<TermConfig>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuitesConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_gateaux_trials")]
    pub gateaux_trials: usize,
    #[serde(default = "default_oracle_trials")]
    pub oracle_trials: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_samples() -> usize {
    50
}
fn default_trials() -> usize {
    32
}
fn default_gateaux_trials() -> usize {
    20
}
fn default_oracle_trials() -> usize {
    4
}
fn default_amplitude() -> f64 {
    0.3
}

impl Default for SuitesConfig {
    fn default() -> Self {
        Self { samples: 50, trials: 32, gateaux_trials: 20, oracle_trials: 4, amplitude: 0.3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "tol_geometry")]
    pub geometry: f64,
    #[serde(default = "tol_skew")]
    pub skew: f64,
    #[serde(default = "tol_jacobi")]
    pub jacobi: f64,
    #[serde(default = "tol_gateaux")]
    pub gateaux: f64,
    #[serde(default = "tol_oracle")]
    pub oracle: f64,
}

fn tol_geometry() -> f64 {
    1e-8
}
fn tol_skew() -> f64 {
    1e-7
}
fn tol_jacobi() -> f64 {
    1e-6
}
fn tol_gateaux() -> f64 {
    2e-5
}
fn tol_oracle() -> f64 {
    5e-5
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { geometry: 1e-8, skew: 1e-7, jacobi: 1e-6, gateaux: 2e-5, oracle: 5e-5 }
    }
}

/// Parsed configuration file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    pub seed: Option<u64>,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    pub chart: ChartConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub bracket: BracketConfig,
    #[serde(default)]
    pub functionals: BTreeMap<String, FunctionalConfig>,
    #[serde(default)]
    pub test_functions: BTreeMap<String, TestFunctionConfig>,
    #[serde(default)]
    pub suites: SuitesConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn from_toml(source: &str) -> Result<Self> {
        toml::from_str(source).map_err(|e| Error::Invalid(format!("config: {e}")))
    }

    pub fn parser(&self) -> Parser {
        Parser::new(self.chart.n).with_constants(self.constants.clone())
    }

    pub fn expr(&self, source: &str, location: &str) -> Result<JetExpr> {
        self.parser().parse(source).map_err(|e| Error::Parse { context: format!("{location} `{source}`"), source: e })
    }

    pub fn omega(&self) -> Omega {
        let mut o = Omega::whole(self.chart.n);
        for c in &self.chart.constraints {
            o.constraints.push(HalfSpace { normal: c.normal.clone(), offset: c.offset });
        }
        o
    }

    pub fn base(&self) -> Vec<f64> {
        self.chart.base.clone().unwrap_or_else(|| {
            self.chart.subchart.lo.iter().zip(&self.chart.subchart.hi).map(|(a, b)| 0.5 * (a + b)).collect()
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.l, self.grid.m)
    }

    pub fn spec(&self) -> Result<BracketSpec> {
        let b = &self.bracket;
        let matrix = |m: &Vec<Vec<String>>, name: &str| -> Result<Vec<Vec<JetExpr>>> {
            m.iter()
                .enumerate()
                .map(|(i, r)| r.iter().enumerate().map(|(j, s)| self.expr(s, &format!("bracket.{name}[{i}][{j}]"))).collect())
                .collect()
        };
        let gamma = match &b.gamma {
            Some(c) => Some(
                c.iter()
                    .enumerate()
                    .map(|(j, m)| {
                        m.iter()
                            .enumerate()
                            .map(|(s, r)| {
                                r.iter().enumerate().map(|(k, e)| self.expr(e, &format!("bracket.gamma[{j}][{s}][{k}]"))).collect()
                            })
                            .collect()
                    })
                    .collect::<Result<_>>()?,
            ),
            None => None,
        };
        BracketSpec::new(self.chart.n, self.omega(), matrix(&b.g, "g")?, gamma, matrix(&b.w, "w")?)
    }

    pub fn functional(&self, name: &str) -> Result<Functional> {
        let f = self.functionals.get(name).ok_or_else(|| Error::Invalid(format!("unknown functional `{name}`")))?;
        let n = self.chart.n;
        let density = |s: &str, loc: String| -> Result<LocalDensity> { LocalDensity::new(self.expr(s, &loc)?, n) };
        let outer = density(&f.outer, format!("functionals.{name}.outer"))?;
        let chains = f
            .chains
            .iter()
            .enumerate()
            .map(|(a, c)| {
                c.iter().enumerate().map(|(d, s)| density(s, format!("functionals.{name}.chains[{a}][{d}]"))).collect()
            })
            .collect::<Result<Vec<Vec<_>>>>()?;
        Ok(Functional::new(name, WnlChain::with_limits(outer, chains, MAX_CHAIN_DEPTH, MAX_CHAINS)?))
    }

    pub fn test_function(&self, name: &str) -> Result<TestFunction> {
        let t = self.test_functions.get(name).ok_or_else(|| Error::Invalid(format!("unknown test function `{name}`")))?;
        let base = t.base.clone().unwrap_or_else(|| self.base());
        let comps = t.components.iter().map(|c| c.iter().map(|k| GaussTerm::new(k.poly.clone(), k.a, k.c)).collect()).collect();
        let u = TestFunction::with_order(base, comps, crate::schwartz::DEFAULT_ORDER, self.grid.eps_tail)?;
        u.check_image(&self.omega(), 0.0)?;
        Ok(u)
    }

    pub fn trial_setup(&self, seed: u64) -> Result<TrialSetup> {
        Ok(TrialSetup {
            grid: self.grid()?,
            base: self.base(),
            margin: self.chart.margin,
            amplitude: self.suites.amplitude,
            trials: self.suites.trials,
            seed,
        })
    }
}
