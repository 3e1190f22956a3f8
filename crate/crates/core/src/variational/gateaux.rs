use serde::Serialize;

use crate::error::Result;
use crate::schwartz::{Grid, Omega, TestFunction};

use super::{eval_functional, variational_derivative, Functional};

/// Central-difference steps of the oracle.
pub const STEPS: [f64; 2] = [1e-3, 5e-4];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Derivative {
    pub value: f64,
    pub error: f64,
}

/// Richardson-extrapolated central difference of `t ↦ f(t)` at 0.
pub fn central_difference(mut f: impl FnMut(f64) -> Result<f64>) -> Result<Derivative> {
    let mut d = [0.0; 2];
    for (k, t) in STEPS.iter().enumerate() {
        d[k] = (f(*t)? - f(-*t)?) / (2.0 * t);
    }
    let value = (4.0 * d[1] - d[0]) / 3.0;
    Ok(Derivative { value, error: (value - d[1]).abs() })
}

/// Gateaux differential of `F` at `u` along `k`, checking that every
/// perturbed function stays inside `omega`.
pub fn gateaux_oracle(f: &Functional, u: &TestFunction, k: &TestFunction, omega: &Omega, grid: &Grid) -> Result<Derivative> {
    central_difference(|t| {
        let v = u.perturbed(k, t)?;
        v.check_image(omega, 0.0)?;
        Ok(eval_functional(f, &v, grid)?.value)
    })
}

/// `∫ δF/δu · k` and the oracle, side by side.
pub fn el_gateaux_gap(f: &Functional, u: &TestFunction, k: &TestFunction, omega: &Omega, grid: &Grid) -> Result<(f64, Derivative)> {
    let vd = variational_derivative(f, u, grid)?;
    let ks = k.sample(grid, 0)?;
    let base: Vec<Vec<f64>> = ks.iter().zip(k.base()).map(|(c, b)| c.iter().map(|v| v - b).collect()).collect();
    Ok((vd.pair(&base, grid), gateaux_oracle(f, u, k, omega, grid)?))
}

/// Empirical sup of `|δF/δu|` over the grid; reported, never proven.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Boundedness {
    pub sup: f64,
    pub edge: f64,
    pub bounded: bool,
}

pub fn boundedness_check(f: &Functional, u: &TestFunction, grid: &Grid) -> Result<Boundedness> {
    let vd = variational_derivative(f, u, grid)?;
    let sup = vd.sup_norm();
    let m = grid.len();
    let edge = vd.values.iter().map(|c| c[0].abs().max(c[m - 1].abs())).fold(0.0, f64::max);
    Ok(Boundedness { sup, edge, bounded: sup.is_finite() })
}
