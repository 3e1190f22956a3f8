//! Local and weakly nonlocal functionals and their variational derivatives.

mod density;
mod evaluate;
mod gateaux;
pub mod mixed;

pub use density::{Bump, Functional, LinearFunctional, LocalDensity, WnlChain, MAX_CHAINS, MAX_CHAIN_DEPTH};
pub use evaluate::{eval_functional, jets_for, sample_expr, variational_derivative, Covector, Materialized, VdPlan};
pub use gateaux::{boundedness_check, central_difference, el_gateaux_gap, gateaux_oracle, Boundedness, Derivative, STEPS};

use crate::error::Result;
use crate::expr::{JetExpr, JetVar};
use crate::schwartz::{Grid, TestFunction};

/// `Σ_i (-D)^i ∂φ/∂u_j^{(i)}` for each field `j`.
pub fn euler_lagrange(f: &LocalDensity) -> Vec<JetExpr> {
    (0..f.fields())
        .map(|j| {
            let mut terms = Vec::new();
            for i in 0..=f.order() {
                let p = f.expr().d_partial(JetVar::new(j, i));
                if p.is_zero() {
                    continue;
                }
                let t = p.d_total_n(i);
                terms.push(if i % 2 == 0 { t } else { -t });
            }
            JetExpr::Sum(terms).simplify()
        })
        .collect()
}

/// Euler–Lagrange expression of a local density sampled along `u`.
pub fn variational_derivative_local(f: &LocalDensity, u: &TestFunction, grid: &Grid) -> Result<Vec<Vec<f64>>> {
    let el = euler_lagrange(f);
    let order = el.iter().filter_map(JetExpr::max_order).max().unwrap_or(0);
    let jets = jets_for(u, grid, order)?;
    el.iter().map(|e| sample_expr(e, &jets, "Euler-Lagrange expression")).collect()
}

/// Hand-coded depth-one formula `R + Σ_α T_α` for chains with every
/// `D_α = 1`, evaluated directly from the chain densities.
pub fn depth_one_reference(chain: &WnlChain, u: &TestFunction, grid: &Grid) -> Result<Vec<Vec<f64>>> {
    assert!(chain.chains.iter().all(|c| c.len() == 1), "depth-one chains only");
    let n = chain.fields();
    let max_i = chain.order();
    let jets = jets_for(u, grid, 2 * max_i + 1)?;
    let m = grid.len();
    let hs: Vec<Vec<f64>> = chain.chains.iter().map(|c| sample_expr(c[0].expr(), &jets, "h")).collect::<Result<_>>()?;
    let big_h: Vec<Vec<f64>> = hs.iter().map(|h| grid.dinv(h)).collect();
    let g = sample_expr(chain.outer.expr(), &jets, "g")?;
    // R = Σ_i (-D)^i [∂g/∂u_l^{(i)} Π H_α], expanded with Leibniz: the H_α
    // derivatives are D^0 H = H, D^1 H = h, D^r H = D^{r-1} h.
    let h_exprs: Vec<&JetExpr> = chain.chains.iter().map(|c| c[0].expr()).collect();
    let dh = |a: usize, r: usize| -> Result<Vec<f64>> {
        if r == 0 {
            Ok(big_h[a].clone())
        } else {
            sample_expr(&h_exprs[a].d_total_n(r - 1), &jets, "D h")
        }
    };
    let mut out = vec![vec![0.0; m]; n];
    for (l, row) in out.iter_mut().enumerate() {
        for i in 0..=chain.outer.order() {
            let p = chain.outer.expr().d_partial(JetVar::new(l, i));
            if p.is_zero() {
                continue;
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            // D^i of p · Π_α H_α via multinomial expansion over A+1 factors.
            for split in compositions(i, chain.chains.len() + 1) {
                let coef = multinomial(i, &split);
                let mut s = sample_expr(&p.d_total_n(split[0]), &jets, "D p")?;
                for (a, r) in split[1..].iter().enumerate() {
                    mul_into(&mut s, &dh(a, *r)?);
                }
                row.iter_mut().zip(&s).for_each(|(o, v)| *o += sign * coef * v);
            }
        }
        // T_α = -Σ_k (-D)^k [∂h_α/∂u_l^{(k)}] · d⁻¹(g Π_{β≠α} H_β), Leibniz again.
        for (a, h) in h_exprs.iter().enumerate() {
            let mut seed = g.clone();
            for (b, hb) in big_h.iter().enumerate() {
                if b != a {
                    mul_into(&mut seed, hb);
                }
            }
            let check = grid.dinv(&seed);
            let check_derivs = |r: usize| -> Result<Vec<f64>> {
                if r == 0 {
                    return Ok(check.clone());
                }
                // D check = g Π_{β≠α} H_β; higher derivatives by Leibniz over
                // the outer density and the other chains.
                let mut acc = vec![0.0; m];
                let others: Vec<usize> = (0..big_h.len()).filter(|b| *b != a).collect();
                for split in compositions(r - 1, others.len() + 1) {
                    let coef = multinomial(r - 1, &split);
                    let mut s = sample_expr(&chain.outer.expr().d_total_n(split[0]), &jets, "D g")?;
                    for (k, b) in others.iter().enumerate() {
                        mul_into(&mut s, &dh(*b, split[k + 1])?);
                    }
                    acc.iter_mut().zip(&s).for_each(|(o, v)| *o += coef * v);
                }
                Ok(acc)
            };
            for k in 0..=h.max_order().unwrap_or(0) {
                let p = h.d_partial(JetVar::new(l, k));
                if p.is_zero() {
                    continue;
                }
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                for r in 0..=k {
                    let coef = binomial(k, r);
                    let mut s = sample_expr(&p.d_total_n(k - r), &jets, "D h partial")?;
                    mul_into(&mut s, &check_derivs(r)?);
                    row.iter_mut().zip(&s).for_each(|(o, v)| *o += sign * coef * v);
                }
            }
        }
    }
    Ok(out)
}

fn mul_into(acc: &mut [f64], f: &[f64]) {
    acc.iter_mut().zip(f).for_each(|(a, b)| *a *= b);
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn multinomial(n: usize, parts: &[usize]) -> f64 {
    let mut rest = n;
    let mut c = 1.0;
    for p in parts {
        c *= binomial(rest, *p);
        rest -= p;
    }
    c
}

/// All ways to write `n` as an ordered sum of `k` non-negative parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![n]];
    }
    (0..=n)
        .flat_map(|first| {
            compositions(n - first, k - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}
