use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Func, JetExpr};

pub const MAX_CHAIN_DEPTH: usize = 3;
pub const MAX_CHAINS: usize = 4;

/// A local density `φ(x, u, u', …, u^{(N)})`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalDensity {
    expr: JetExpr,
    order: usize,
    fields: usize,
}

impl LocalDensity {
    pub fn new(expr: JetExpr, fields: usize) -> Result<Self> {
        if expr.field_span() > fields {
            return Err(Error::Dimension(format!("density `{expr}` uses more than {fields} fields")));
        }
        let order = expr.max_order().unwrap_or(0);
        Ok(Self { expr, order, fields })
    }

    pub fn parse(source: &str, fields: usize) -> Result<Self> {
        let expr = JetExpr::parse(source, fields)
            .map_err(|e| Error::Parse { context: format!("density `{source}`"), source: e })?;
        Self::new(expr, fields)
    }

    pub fn expr(&self) -> &JetExpr {
        &self.expr
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn fields(&self) -> usize {
        self.fields
    }
}

/// `g · Π_α d⁻¹(h_{α,1} d⁻¹(h_{α,2} … d⁻¹(h_{α,D_α})))`.
#[derive(Clone, Debug, PartialEq)]
pub struct WnlChain {
    pub outer: LocalDensity,
    pub chains: Vec<Vec<LocalDensity>>,
}

impl WnlChain {
    pub fn local(outer: LocalDensity) -> Self {
        Self { outer, chains: Vec::new() }
    }

    pub fn new(outer: LocalDensity, chains: Vec<Vec<LocalDensity>>) -> Result<Self> {
        Self::with_limits(outer, chains, MAX_CHAIN_DEPTH, MAX_CHAINS)
    }

    pub fn with_limits(outer: LocalDensity, chains: Vec<Vec<LocalDensity>>, max_depth: usize, max_chains: usize) -> Result<Self> {
        if chains.len() > max_chains {
            return Err(Error::Invalid(format!("{} chains exceed the limit {max_chains}", chains.len())));
        }
        for c in &chains {
            if c.is_empty() || c.len() > max_depth {
                return Err(Error::Invalid(format!("chain depth {} outside 1..={max_depth}", c.len())));
            }
            if c.iter().any(|h| h.fields != outer.fields) {
                return Err(Error::Dimension("chain densities disagree on the field count".into()));
            }
        }
        Ok(Self { outer, chains })
    }

    pub fn fields(&self) -> usize {
        self.outer.fields
    }

    /// Highest jet order among all densities.
    pub fn order(&self) -> usize {
        self.chains.iter().flatten().map(LocalDensity::order).fold(self.outer.order, usize::max)
    }

    pub fn is_local(&self) -> bool {
        self.chains.is_empty()
    }
}

/// A finite linear combination of WNL chain functionals, `Σ c_t ∫ chain_t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    pub name: String,
    pub terms: Vec<(f64, WnlChain)>,
}

impl Functional {
    pub fn new(name: impl Into<String>, chain: WnlChain) -> Self {
        Self { name: name.into(), terms: vec![(1.0, chain)] }
    }

    pub fn local(name: impl Into<String>, density: LocalDensity) -> Self {
        Self::new(name, WnlChain::local(density))
    }

    pub fn combination(name: impl Into<String>, terms: Vec<(f64, WnlChain)>) -> Self {
        Self { name: name.into(), terms }
    }

    pub fn fields(&self) -> usize {
        self.terms.first().map_or(0, |t| t.1.fields())
    }

    pub fn order(&self) -> usize {
        self.terms.iter().map(|t| t.1.order()).max().unwrap_or(0)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Functional, b: f64) -> Functional {
        let terms = self
            .terms
            .iter()
            .map(|(c, t)| (a * c, t.clone()))
            .chain(other.terms.iter().map(|(c, t)| (b * c, t.clone())))
            .collect();
        Functional { name: format!("{a}*{} + {b}*{}", self.name, other.name), terms }
    }
}

/// `A · exp(-((x - c)/w)^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bump {
    pub amp: f64,
    pub center: f64,
    pub width: f64,
}

/// Physicists' Hermite polynomial `H_k(s)`.
fn hermite(k: usize, s: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * s);
    if k == 0 {
        return a;
    }
    for j in 1..k {
        let c = 2.0 * s * b - 2.0 * j as f64 * a;
        a = b;
        b = c;
    }
    b
}

impl Bump {
    /// `k`-th derivative in `x`.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        self.amp * sign * hermite(k, s) * (-s * s).exp() / self.width.powi(k as i32)
    }

    pub fn expr(&self) -> JetExpr {
        let s = JetExpr::Div(Box::new(JetExpr::X - JetExpr::Const(self.center)), Box::new(JetExpr::Const(self.width)));
        JetExpr::Const(self.amp) * (-s.powi(2)).apply(Func::Exp)
    }
}

/// `F(u) = ∫ α_i(x) u^i(x) dx` with each `α_i` a sum of Gaussian bumps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearFunctional {
    pub coefficients: Vec<Vec<Bump>>,
}

impl LinearFunctional {
    pub fn new(coefficients: Vec<Vec<Bump>>) -> Self {
        Self { coefficients }
    }

    pub fn fields(&self) -> usize {
        self.coefficients.len()
    }

    /// `α_i^{(k)}(x)`.
    pub fn coefficient(&self, i: usize, k: usize, x: f64) -> f64 {
        self.coefficients[i].iter().map(|b| b.derivative(k, x)).sum()
    }

    pub fn coefficient_expr(&self, i: usize) -> JetExpr {
        let terms: Vec<JetExpr> = self.coefficients[i].iter().map(Bump::expr).collect();
        match terms.len() {
            0 => JetExpr::zero(),
            1 => terms.into_iter().next().unwrap(),
            _ => JetExpr::Sum(terms),
        }
    }

    pub fn to_functional(&self, name: impl Into<String>) -> Functional {
        let n = self.fields();
        let density: Vec<JetExpr> =
            (0..n).map(|i| self.coefficient_expr(i) * JetExpr::var(i, 0)).collect();
        let expr = if density.len() == 1 { density.into_iter().next().unwrap() } else { JetExpr::Sum(density) };
        Functional::local(name, LocalDensity::new(expr, n).expect("fields match"))
    }

    /// Three bumps per component with centers in `[-L/4, L/4]`, widths in
    /// `[0.5, 2]` and amplitudes in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(n: usize, half_width: f64, rng: &mut R) -> Self {
        let coefficients = (0..n)
            .map(|_| {
                (0..3)
                    .map(|_| Bump {
                        amp: rng.gen_range(-1.0..=1.0),
                        center: rng.gen_range(-half_width / 4.0..=half_width / 4.0),
                        width: rng.gen_range(0.5..=2.0),
                    })
                    .collect()
            })
            .collect();
        Self { coefficients }
    }
}
