//! Reference specs used by tests, benches and the bundled corpus.

use std::collections::BTreeMap;

use super::BracketSpec;
use crate::expr::{JetExpr, Parser};
use crate::schwartz::Omega;

fn parse_all(n: usize, constants: &[(&str, f64)], rows: &[&[&str]]) -> Vec<Vec<JetExpr>> {
    let p = Parser::new(n).with_constants(constants.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>());
    rows.iter().map(|r| r.iter().map(|s| p.parse(s).expect("built-in expression")).collect()).collect()
}

fn zeros(n: usize) -> Vec<Vec<Vec<JetExpr>>> {
    vec![vec![vec![JetExpr::zero(); n]; n]; n]
}

fn identity(n: usize) -> Vec<Vec<JetExpr>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { JetExpr::one() } else { JetExpr::zero() }).collect()).collect()
}

/// `g = δ`, `Γ = 0`, `w = diag(w_diag)`.
pub fn flat(w_diag: &[f64]) -> BracketSpec {
    let n = w_diag.len();
    let w = (0..n).map(|i| (0..n).map(|j| JetExpr::Const(if i == j { w_diag[i] } else { 0.0 })).collect()).collect();
    BracketSpec::new(n, Omega::whole(n), identity(n), Some(zeros(n)), w).unwrap()
}

/// Flat `g`, `w = 0`, with the compatible torsion `Γ^1_{21} = ε`, `Γ^2_{11} = −ε`.
pub fn broken_gamma(eps: f64) -> BracketSpec {
    let mut gamma = zeros(2);
    gamma[0][1][0] = JetExpr::Const(eps);
    gamma[1][0][0] = JetExpr::Const(-eps);
    let w = vec![vec![JetExpr::zero(); 2]; 2];
    BracketSpec::new(2, Omega::whole(2), identity(2), Some(gamma), w).unwrap()
}

/// Constant-curvature example on the chart `u > v`: `g^{11} = −α(u)(u−v)²`,
/// `g^{22} = β(v)(u−v)²`, Levi-Civita Γ, `w = √k δ`.
pub fn constant_curvature(k: f64, c1: f64, c2: f64, c3: f64) -> BracketSpec {
    let cs = [("k", k), ("c1", c1), ("c2", c2), ("c3", c3)];
    let g = parse_all(2, &cs, &[
        &["-(c1 + k + c2*u + c3*u^2)*(u - v)^2", "0"],
        &["0", "(c1 + c2*v + c3*v^2)*(u - v)^2"],
    ]);
    let w = parse_all(2, &cs, &[&["sqrt(k)", "0"], &["0", "sqrt(k)"]]);
    BracketSpec::new(2, Omega::whole(2).with(vec![1.0, -1.0], 0.0), g, None, w).unwrap()
}

/// The Christoffel table of the constant-curvature example exactly as
/// printed, `[j][s][k] = Γ^j_{sk}`, evaluated at `(u, v)`.
pub fn printed_christoffel(k: f64, c1: f64, c2: f64, c3: f64, u: f64, v: f64) -> [[[f64; 2]; 2]; 2] {
    let alpha = c1 + k + c2 * u + c3 * u * u;
    let beta = c1 + c2 * v + c3 * v * v;
    let (da, db) = (c2 + 2.0 * c3 * u, c2 + 2.0 * c3 * v);
    let mut t = [[[0.0; 2]; 2]; 2];
    t[0][0][0] = 1.0 / (v - u) - da / (2.0 * alpha);
    t[1][1][1] = 1.0 / (u - v) - db / (2.0 * beta);
    t[0][1][0] = 1.0 / (u - v);
    t[0][0][1] = 1.0 / (u - v);
    t[1][1][0] = 1.0 / (v - u);
    t[1][0][1] = 1.0 / (v - u);
    t[1][0][0] = beta / (alpha * (u - v));
    t[0][1][1] = alpha / (beta * (u - v));
    t
}
