use std::cmp::Ordering;

use super::{Func, JetExpr};

const MAX_PASSES: usize = 64;

impl JetExpr {
    /// Semantics-preserving normalization: constant folding, 0/1 identities,
    /// flattening, like-term and like-base merging. Runs to a fixed point, so
    /// it is idempotent.
    pub fn simplify(&self) -> JetExpr {
        let mut cur = self.clone();
        for _ in 0..MAX_PASSES {
            let next = step(&cur);
            if next == cur {
                return cur;
            }
            cur = next;
        }
        cur
    }
}

fn step(e: &JetExpr) -> JetExpr {
    match e {
        JetExpr::Const(_) | JetExpr::X | JetExpr::Var(_) => e.clone(),
        JetExpr::Neg(a) => build_product(vec![JetExpr::Const(-1.0), step(a)]),
        JetExpr::Sum(ts) => build_sum(ts.iter().map(step).collect()),
        JetExpr::Product(fs) => build_product(fs.iter().map(step).collect()),
        JetExpr::Div(a, b) => {
            let (a, b) = (step(a), step(b));
            match (a.as_const(), b.as_const()) {
                (_, Some(1.0)) => a,
                (Some(0.0), _) => a,
                (Some(n), Some(d)) if d != 0.0 => JetExpr::Const(n / d),
                _ => JetExpr::Div(Box::new(a), Box::new(b)),
            }
        }
        JetExpr::Pow(a, k) => {
            let a = step(a);
            match (a, *k) {
                (_, 0) => JetExpr::one(),
                (a, 1) => a,
                (JetExpr::Const(c), k) if !(c == 0.0 && k < 0) && c.powi(k).is_finite() => JetExpr::Const(c.powi(k)),
                (JetExpr::Pow(b, j), k) if j.checked_mul(k).is_some() => JetExpr::Pow(b, j * k),
                (JetExpr::Neg(b), k) if k % 2 == 0 => JetExpr::Pow(b, k),
                (JetExpr::Neg(b), k) => JetExpr::Neg(Box::new(JetExpr::Pow(b, k))),
                (a, k) => JetExpr::Pow(Box::new(a), k),
            }
        }
        JetExpr::Func(g, a) => {
            let a = step(a);
            if let Some(c) = a.as_const() {
                if let Some(v) = g.apply(c).filter(|v| v.is_finite()) {
                    return JetExpr::Const(v);
                }
            }
            match (g, a) {
                (Func::Ln, JetExpr::Func(Func::Exp, b)) => *b,
                (g, a) => JetExpr::Func(*g, Box::new(a)),
            }
        }
    }
}

/// Splits a term into a numeric coefficient and its remaining factors.
fn split_coefficient(t: JetExpr) -> (f64, Vec<JetExpr>) {
    match t {
        JetExpr::Const(c) => (c, Vec::new()),
        JetExpr::Neg(a) => {
            let (c, fs) = split_coefficient(*a);
            (-c, fs)
        }
        JetExpr::Product(mut fs) => match fs.first().and_then(JetExpr::as_const) {
            Some(c) => {
                fs.remove(0);
                (c, fs)
            }
            None => (1.0, fs),
        },
        other => (1.0, vec![other]),
    }
}

fn assemble(coef: f64, mut factors: Vec<JetExpr>) -> JetExpr {
    if coef == 0.0 {
        return JetExpr::zero();
    }
    if factors.is_empty() {
        return JetExpr::Const(coef);
    }
    let body = if factors.len() == 1 { factors.pop().unwrap() } else { JetExpr::Product(factors) };
    if coef == 1.0 {
        body
    } else if coef == -1.0 {
        JetExpr::Neg(Box::new(body))
    } else {
        let mut fs = vec![JetExpr::Const(coef)];
        match body {
            JetExpr::Product(rest) => fs.extend(rest),
            other => fs.push(other),
        }
        JetExpr::Product(fs)
    }
}

fn build_sum(terms: Vec<JetExpr>) -> JetExpr {
    let mut flat = Vec::new();
    let mut stack: Vec<JetExpr> = terms.into_iter().rev().collect();
    while let Some(t) = stack.pop() {
        match t {
            JetExpr::Sum(inner) => stack.extend(inner.into_iter().rev()),
            other => flat.push(other),
        }
    }
    let mut groups: Vec<(f64, Vec<JetExpr>)> = Vec::new();
    for t in flat {
        let (c, fs) = split_coefficient(t);
        match groups.iter_mut().find(|g| g.1 == fs) {
            Some(g) => g.0 += c,
            None => groups.push((c, fs)),
        }
    }
    let mut out: Vec<JetExpr> =
        groups.into_iter().filter(|g| g.0 != 0.0).map(|(c, fs)| assemble(c, fs)).collect();
    match out.len() {
        0 => JetExpr::zero(),
        1 => out.pop().unwrap(),
        _ => JetExpr::Sum(out),
    }
}

fn sort_key(e: &JetExpr) -> (u8, usize, usize, String) {
    match e {
        JetExpr::X => (0, 0, 0, String::new()),
        JetExpr::Var(v) => (1, v.field, v.order, String::new()),
        JetExpr::Pow(b, _) => sort_key(b),
        other => (2, 0, 0, other.to_string()),
    }
}

fn build_product(factors: Vec<JetExpr>) -> JetExpr {
    let mut coef = 1.0;
    let mut bases: Vec<(JetExpr, i32)> = Vec::new();
    let mut stack: Vec<JetExpr> = factors.into_iter().rev().collect();
    while let Some(f) = stack.pop() {
        match f {
            JetExpr::Const(c) => coef *= c,
            JetExpr::Neg(a) => {
                coef = -coef;
                stack.push(*a);
            }
            JetExpr::Product(inner) => stack.extend(inner.into_iter().rev()),
            other => {
                let (base, k) = match other {
                    JetExpr::Pow(b, k) => (*b, k),
                    b => (b, 1),
                };
                match bases.iter_mut().find(|(b, _)| *b == base) {
                    Some(entry) => entry.1 = entry.1.saturating_add(k),
                    None => bases.push((base, k)),
                }
            }
        }
    }
    if coef == 0.0 {
        return JetExpr::zero();
    }
    let mut fs: Vec<JetExpr> = bases
        .into_iter()
        .filter(|(_, k)| *k != 0)
        .map(|(b, k)| if k == 1 { b } else { JetExpr::Pow(Box::new(b), k) })
        .collect();
    fs.sort_by(|a, b| sort_key(a).cmp(&sort_key(b)).then(Ordering::Equal));
    assemble(coef, fs)
}
