//! Configuration files, suite orchestration and JSON reports.

mod config;
pub mod json;
mod run;
mod validate;

pub use config::{
    BoxConfig, BracketConfig, ChartConfig, ConstraintConfig, FunctionalConfig, GridConfig, RunConfig, SuitesConfig, TermConfig,
    TestFunctionConfig, Tolerances,
};
pub use run::{
    run, BracketValue, CheckReport, Command, GateauxCase, GateauxSuite, OracleSuite, Overrides, Poisson, Status, Suites, Timing,
    VdDump, Verdict,
};
pub use validate::{validate, Diagnostic};
