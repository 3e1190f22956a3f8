//! Expressions on the jet space of maps `R -> Omega ⊆ R^n`.
//!
//! A [`JetExpr`] is a finite tree over the independent variable `x`, the jet
//! variables `u_j^{(i)}` (field `j`, derivative order `i`), real constants,
//! the unary functions `exp, sin, cos, sqrt, ln`, and arithmetic with integer
//! powers. Trees are immutable values; all differentiation is symbolic.

mod diff;
mod display;
mod eval;
mod parse;
mod simplify;

use std::collections::BTreeSet;
use std::fmt;

pub use eval::EvalError;
pub use parse::{ParseError, Parser};

/// A jet coordinate `u_j^{(i)}`. `field` is zero-based internally; the
/// surface syntax is one-based (`u1` is field 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetVar {
    pub field: usize,
    pub order: usize,
}

impl JetVar {
    pub const fn new(field: usize, order: usize) -> Self {
        Self { field, order }
    }

    /// The same field one derivative higher.
    pub const fn raised(self) -> Self {
        Self { field: self.field, order: self.order + 1 }
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.field + 1)?;
        match self.order {
            0 => Ok(()),
            1 => f.write_str("_x"),
            2 => f.write_str("_xx"),
            k => write!(f, "_d{k}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Ln,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Ln => "ln",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "ln" => Func::Ln,
            _ => return None,
        })
    }

    /// Applies the function, returning `None` outside its admissible domain.
    pub fn apply(self, v: f64) -> Option<f64> {
        match self {
            Func::Exp => Some(v.exp()),
            Func::Sin => Some(v.sin()),
            Func::Cos => Some(v.cos()),
            Func::Sqrt => (v >= 0.0).then(|| v.sqrt()),
            Func::Ln => (v > 0.0).then(|| v.ln()),
        }
    }
}

/// Expression tree. Sums and products are n-ary; subtraction is a sum with a
/// negated term.
#[derive(Clone, Debug, PartialEq)]
pub enum JetExpr {
    Const(f64),
    X,
    Var(JetVar),
    Neg(Box<JetExpr>),
    Sum(Vec<JetExpr>),
    Product(Vec<JetExpr>),
    Div(Box<JetExpr>, Box<JetExpr>),
    Pow(Box<JetExpr>, i32),
    Func(Func, Box<JetExpr>),
}

impl JetExpr {
    pub const fn zero() -> Self {
        JetExpr::Const(0.0)
    }

    pub const fn one() -> Self {
        JetExpr::Const(1.0)
    }

    pub const fn var(field: usize, order: usize) -> Self {
        JetExpr::Var(JetVar::new(field, order))
    }

    /// Parses `source` with `fields` declared field components.
    pub fn parse(source: &str, fields: usize) -> Result<Self, ParseError> {
        Parser::new(fields).parse(source)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, JetExpr::Const(c) if *c == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, JetExpr::Const(c) if *c == 1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            JetExpr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn powi(self, k: i32) -> Self {
        JetExpr::Pow(Box::new(self), k)
    }

    pub fn apply(self, func: Func) -> Self {
        JetExpr::Func(func, Box::new(self))
    }

    pub fn exp(self) -> Self {
        self.apply(Func::Exp)
    }

    pub fn sqrt(self) -> Self {
        self.apply(Func::Sqrt)
    }

    /// Children in evaluation order.
    pub fn children(&self) -> Vec<&JetExpr> {
        match self {
            JetExpr::Const(_) | JetExpr::X | JetExpr::Var(_) => Vec::new(),
            JetExpr::Neg(a) | JetExpr::Pow(a, _) | JetExpr::Func(_, a) => vec![a],
            JetExpr::Sum(ts) | JetExpr::Product(ts) => ts.iter().collect(),
            JetExpr::Div(a, b) => vec![a, b],
        }
    }

    /// Every jet variable appearing in the tree.
    pub fn jet_vars(&self) -> BTreeSet<JetVar> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<JetVar>) {
        if let JetExpr::Var(v) = self {
            out.insert(*v);
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    /// Highest derivative order among the jet variables, `None` if the
    /// expression has none.
    pub fn max_order(&self) -> Option<usize> {
        self.jet_vars().iter().map(|v| v.order).max()
    }

    /// Number of fields needed to evaluate the expression (highest field + 1).
    pub fn field_span(&self) -> usize {
        self.jet_vars().iter().map(|v| v.field + 1).max().unwrap_or(0)
    }

    pub fn depends_on_x(&self) -> bool {
        matches!(self, JetExpr::X) || self.children().into_iter().any(JetExpr::depends_on_x)
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().into_iter().map(JetExpr::node_count).sum::<usize>()
    }

    /// Replaces every variable `u_j` (order 0) by `u_j + shift[j]`; higher
    /// jets are unchanged.
    pub fn shift_fields(&self, shift: &[f64]) -> JetExpr {
        self.map_leaves(&|leaf| match leaf {
            JetExpr::Var(v) if v.order == 0 && shift.get(v.field).is_some_and(|s| *s != 0.0) => {
                JetExpr::Sum(vec![leaf.clone(), JetExpr::Const(shift[v.field])])
            }
            other => other.clone(),
        })
    }

    pub(crate) fn map_leaves(&self, f: &dyn Fn(&JetExpr) -> JetExpr) -> JetExpr {
        match self {
            JetExpr::Const(_) | JetExpr::X | JetExpr::Var(_) => f(self),
            JetExpr::Neg(a) => JetExpr::Neg(Box::new(a.map_leaves(f))),
            JetExpr::Sum(ts) => JetExpr::Sum(ts.iter().map(|t| t.map_leaves(f)).collect()),
            JetExpr::Product(ts) => JetExpr::Product(ts.iter().map(|t| t.map_leaves(f)).collect()),
            JetExpr::Div(a, b) => JetExpr::Div(Box::new(a.map_leaves(f)), Box::new(b.map_leaves(f))),
            JetExpr::Pow(a, k) => JetExpr::Pow(Box::new(a.map_leaves(f)), *k),
            JetExpr::Func(g, a) => JetExpr::Func(*g, Box::new(a.map_leaves(f))),
        }
    }
}

impl From<f64> for JetExpr {
    fn from(c: f64) -> Self {
        JetExpr::Const(c)
    }
}

impl From<JetVar> for JetExpr {
    fn from(v: JetVar) -> Self {
        JetExpr::Var(v)
    }
}

impl std::ops::Add for JetExpr {
    type Output = JetExpr;
    fn add(self, rhs: JetExpr) -> JetExpr {
        match self {
            JetExpr::Sum(mut ts) => {
                ts.push(rhs);
                JetExpr::Sum(ts)
            }
            lhs => JetExpr::Sum(vec![lhs, rhs]),
        }
    }
}

impl std::ops::Sub for JetExpr {
    type Output = JetExpr;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: JetExpr) -> JetExpr {
        self + (-rhs)
    }
}

impl std::ops::Mul for JetExpr {
    type Output = JetExpr;
    fn mul(self, rhs: JetExpr) -> JetExpr {
        match self {
            JetExpr::Product(mut ts) => {
                ts.push(rhs);
                JetExpr::Product(ts)
            }
            lhs => JetExpr::Product(vec![lhs, rhs]),
        }
    }
}

impl std::ops::Div for JetExpr {
    type Output = JetExpr;
    fn div(self, rhs: JetExpr) -> JetExpr {
        JetExpr::Div(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Neg for JetExpr {
    type Output = JetExpr;
    fn neg(self) -> JetExpr {
        match self {
            JetExpr::Const(c) => JetExpr::Const(-c),
            JetExpr::Neg(a) => *a,
            e => JetExpr::Neg(Box::new(e)),
        }
    }
}

/// A point of the jet space: `x` and the values `u_j^{(i)}` for
/// `j < fields`, `i <= max_order`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetPoint {
    pub x: f64,
    fields: usize,
    max_order: usize,
    values: Vec<f64>,
}

impl JetPoint {
    pub fn new(x: f64, fields: usize, max_order: usize) -> Self {
        Self { x, fields, max_order, values: vec![0.0; fields * (max_order + 1)] }
    }

    /// A point carrying only order-0 values, used for geometric data `g(u)`.
    pub fn at_values(z: &[f64]) -> Self {
        Self { x: 0.0, fields: z.len(), max_order: 0, values: z.to_vec() }
    }

    pub fn fields(&self) -> usize {
        self.fields
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn get(&self, var: JetVar) -> Option<f64> {
        (var.field < self.fields && var.order <= self.max_order)
            .then(|| self.values[var.field * (self.max_order + 1) + var.order])
    }

    pub fn set(&mut self, var: JetVar, value: f64) {
        assert!(var.field < self.fields && var.order <= self.max_order, "jet variable {var} outside point");
        self.values[var.field * (self.max_order + 1) + var.order] = value;
    }

    pub fn with(mut self, var: JetVar, value: f64) -> Self {
        self.set(var, value);
        self
    }

    /// Order-0 values `u(x)`.
    pub fn values(&self) -> Vec<f64> {
        (0..self.fields).map(|j| self.values[j * (self.max_order + 1)]).collect()
    }

    /// First derivatives `u_x(x)`; zeros when the point carries order 0 only.
    pub fn first_derivatives(&self) -> Vec<f64> {
        (0..self.fields)
            .map(|j| if self.max_order >= 1 { self.values[j * (self.max_order + 1) + 1] } else { 0.0 })
            .collect()
    }
}
