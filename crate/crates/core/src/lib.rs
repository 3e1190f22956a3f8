#![allow(clippy::needless_range_loop)]
//! Verification engine for weakly nonlocal Poisson brackets of hydrodynamic
//! type.

pub mod expr;
pub mod par;

pub use expr::{EvalError, Func, JetExpr, JetPoint, JetVar, ParseError, Parser};
pub mod error;
pub mod schwartz;
pub mod variational;
pub mod geometry;
pub mod bracket;
pub mod report;

pub use error::{Error, Result};
