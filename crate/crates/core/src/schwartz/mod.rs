//! Concrete stand-in for the Schwartz space: analytic test functions with
//! exact jets, quadrature over the line, and the operator `d⁻¹`.

mod grid;
mod omega;
mod test_function;

pub use grid::{CompensatedSum, Grid, Quadrature, DEFAULT_EPS_TAIL, DEFAULT_L, DEFAULT_M};
pub use omega::{HalfSpace, Omega};
pub use test_function::{GaussTerm, TestFunction, DEFAULT_ORDER};

/// Grid samples of an `n`-component function, tagged with where they came
/// from.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampled {
    pub components: Vec<Vec<f64>>,
    pub provenance: String,
}

impl Sampled {
    pub fn new(components: Vec<Vec<f64>>, provenance: impl Into<String>) -> Self {
        Self { components, provenance: provenance.into() }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn sup_norm(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().flatten().all(|v| v.is_finite())
    }
}
