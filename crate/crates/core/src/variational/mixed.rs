//! Variational derivatives of WNL chains as sums of mixed terms
//! `φ(x, u, …) · Π F_t`, with `φ` symbolic and every `F_t` a materialized
//! nested antiderivative. Total derivatives hit `φ` symbolically and each
//! `F_t` through its exact derivative rule, so sampled data is never
//! differenced.

use crate::expr::{JetExpr, JetVar};

use super::WnlChain;

/// A nested antiderivative of chain `alpha` (both indices 1-based).
///
/// `Hat{α,δ} = d⁻¹(h_{α,δ} · Hat{α,δ+1})`, with `Hat{α,D_α} = d⁻¹(h_{α,D_α})`.
/// `Check{α,1} = d⁻¹(g · Π_{β≠α} Hat{β,1})` and
/// `Check{α,δ} = d⁻¹(h_{α,δ-1} · Check{α,δ-1})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Factor {
    Hat { alpha: usize, delta: usize },
    Check { alpha: usize, delta: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedTerm {
    pub sym: JetExpr,
    pub factors: Vec<Factor>,
}

impl MixedTerm {
    pub fn new(sym: JetExpr, mut factors: Vec<Factor>) -> Self {
        factors.sort();
        Self { sym, factors }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MixedSum {
    pub terms: Vec<MixedTerm>,
}

impl MixedSum {
    pub fn new(terms: Vec<MixedTerm>) -> Self {
        let mut s = Self { terms };
        s.normalize();
        s
    }

    /// Merges terms with the same factor multiset and drops zero terms.
    fn normalize(&mut self) {
        let mut out: Vec<(Vec<Factor>, Vec<JetExpr>)> = Vec::new();
        for t in self.terms.drain(..) {
            if t.sym.is_zero() {
                continue;
            }
            match out.iter_mut().find(|(f, _)| *f == t.factors) {
                Some((_, syms)) => syms.push(t.sym),
                None => out.push((t.factors, vec![t.sym])),
            }
        }
        self.terms = out
            .into_iter()
            .filter_map(|(factors, syms)| {
                let sym = if syms.len() == 1 { syms.into_iter().next().unwrap() } else { JetExpr::Sum(syms).simplify() };
                (!sym.is_zero()).then_some(MixedTerm { sym, factors })
            })
            .collect();
    }

    pub fn scaled(&self, c: f64) -> MixedSum {
        if c == 0.0 {
            return MixedSum::default();
        }
        MixedSum::new(
            self.terms
                .iter()
                .map(|t| MixedTerm { sym: (JetExpr::Const(c) * t.sym.clone()).simplify(), factors: t.factors.clone() })
                .collect(),
        )
    }

    pub fn add(&self, other: &MixedSum) -> MixedSum {
        MixedSum::new(self.terms.iter().chain(&other.terms).cloned().collect())
    }

    /// Total derivative, using the chain structure for the factors.
    pub fn d_total(&self, chain: &WnlChain) -> MixedSum {
        let mut out = Vec::new();
        for t in &self.terms {
            out.push(MixedTerm { sym: t.sym.d_total(), factors: t.factors.clone() });
            for k in 0..t.factors.len() {
                let mut rest = t.factors.clone();
                let f = rest.remove(k);
                for d in derivative(f, chain).terms {
                    let sym = (t.sym.clone() * d.sym).simplify();
                    let mut factors = rest.clone();
                    factors.extend(d.factors);
                    out.push(MixedTerm::new(sym, factors));
                }
            }
        }
        MixedSum::new(out)
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().filter_map(|t| t.sym.max_order()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Exact derivative of a chain factor.
pub fn derivative(f: Factor, chain: &WnlChain) -> MixedSum {
    let term = match f {
        Factor::Hat { alpha, delta } => {
            let c = &chain.chains[alpha - 1];
            let next = if delta < c.len() { vec![Factor::Hat { alpha, delta: delta + 1 }] } else { Vec::new() };
            MixedTerm::new(c[delta - 1].expr().clone(), next)
        }
        Factor::Check { alpha, delta: 1 } => MixedTerm::new(
            chain.outer.expr().clone(),
            (1..=chain.chains.len()).filter(|b| *b != alpha).map(|b| Factor::Hat { alpha: b, delta: 1 }).collect(),
        ),
        Factor::Check { alpha, delta } => MixedTerm::new(
            chain.chains[alpha - 1][delta - 2].expr().clone(),
            vec![Factor::Check { alpha, delta: delta - 1 }],
        ),
    };
    MixedSum::new(vec![term])
}

/// `Σ_i (-1)^i D^i [seed_i]` where `seed_i` carries `∂φ/∂u_l^{(i)}`.
fn euler_operator(
    phi: &JetExpr,
    field: usize,
    order: usize,
    factors: &[Factor],
    chain: &WnlChain,
) -> MixedSum {
    let mut total = MixedSum::default();
    for i in 0..=order {
        let partial = phi.d_partial(JetVar::new(field, i));
        if partial.is_zero() {
            continue;
        }
        let mut s = MixedSum::new(vec![MixedTerm::new(partial, factors.to_vec())]);
        for _ in 0..i {
            s = s.d_total(chain);
        }
        total = total.add(&if i % 2 == 0 { s } else { s.scaled(-1.0) });
    }
    total
}

/// `δF/δu_l = R + Σ_α Σ_δ T^δ_α` for `F = ∫ chain`, as mixed sums per field.
pub fn variational_plan(chain: &WnlChain) -> Vec<MixedSum> {
    let hats: Vec<Factor> = (1..=chain.chains.len()).map(|a| Factor::Hat { alpha: a, delta: 1 }).collect();
    (0..chain.fields())
        .map(|l| {
            let mut total = euler_operator(chain.outer.expr(), l, chain.outer.order(), &hats, chain);
            for (a, c) in chain.chains.iter().enumerate() {
                let alpha = a + 1;
                for (d, h) in c.iter().enumerate() {
                    let delta = d + 1;
                    let mut factors = vec![Factor::Check { alpha, delta }];
                    if delta < c.len() {
                        factors.push(Factor::Hat { alpha, delta: delta + 1 });
                    }
                    let t = euler_operator(h.expr(), l, h.order(), &factors, chain);
                    total = total.add(&if delta % 2 == 0 { t } else { t.scaled(-1.0) });
                }
            }
            total
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variational::LocalDensity;

    fn d(s: &str) -> LocalDensity {
        LocalDensity::parse(s, 1).unwrap()
    }

    #[test]
    fn local_plan_is_euler_lagrange() {
        let plan = variational_plan(&WnlChain::local(d("u1^3 - 0.5*u1*u1_xx")));
        assert_eq!(plan[0].terms.len(), 1);
        let want = JetExpr::parse("3*u1^2 - u1_xx", 1).unwrap();
        let p = crate::expr::JetPoint::new(0.0, 1, 2).with(JetVar::new(0, 0), 0.7).with(JetVar::new(0, 2), -1.1);
        assert!((plan[0].terms[0].sym.eval(&p).unwrap() - want.eval(&p).unwrap()).abs() < 1e-14);
        assert!(variational_plan(&WnlChain::local(d("u1_x")))[0].is_zero());
    }

    #[test]
    fn u_times_dinv_u_cancels_symbolically() {
        let chain = WnlChain::new(d("u1"), vec![vec![d("u1")]]).unwrap();
        let plan = variational_plan(&chain);
        assert_eq!(plan[0].terms.len(), 2);
        assert!(plan[0].terms.iter().all(|t| t.sym.as_const().is_some()));
    }

    #[test]
    fn factor_derivatives_follow_the_chain() {
        let chain = WnlChain::new(d("u1_x"), vec![vec![d("u1"), d("u1^2")], vec![d("x*u1")]]).unwrap();
        let dh = derivative(Factor::Hat { alpha: 1, delta: 1 }, &chain);
        assert_eq!(dh.terms[0].factors, vec![Factor::Hat { alpha: 1, delta: 2 }]);
        let dc = derivative(Factor::Check { alpha: 1, delta: 1 }, &chain);
        assert_eq!(dc.terms[0].factors, vec![Factor::Hat { alpha: 2, delta: 1 }]);
        assert_eq!(dc.terms[0].sym.to_string(), "u1_x");
        let dc2 = derivative(Factor::Check { alpha: 1, delta: 2 }, &chain);
        assert_eq!(dc2.terms[0].factors, vec![Factor::Check { alpha: 1, delta: 1 }]);
    }
}
