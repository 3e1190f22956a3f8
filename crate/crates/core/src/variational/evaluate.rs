use crate::error::{Error, Result};
use crate::expr::{JetExpr, JetPoint};
use crate::par;
use crate::schwartz::{Grid, Quadrature, TestFunction};

use super::mixed::{variational_plan, Factor, MixedSum};
use super::{Functional, WnlChain};

/// Samples `e` along precomputed jets.
pub fn sample_expr(e: &JetExpr, jets: &[JetPoint], context: &str) -> Result<Vec<f64>> {
    if let Some(c) = e.as_const() {
        return Ok(vec![c; jets.len()]);
    }
    par::try_map_slice(jets, |p| e.eval(p).map_err(|s| Error::eval(context, p.x, s)))
}

/// Jets of `u` on `grid` up to `order`, regenerating derivative closures if
/// the function carries too few.
pub fn jets_for(u: &TestFunction, grid: &Grid, order: usize) -> Result<Vec<JetPoint>> {
    if order > u.order() {
        u.reordered(order)?.jets(grid, order)
    } else {
        u.jets(grid, order)
    }
}

fn mul_into(acc: &mut [f64], f: &[f64]) {
    acc.iter_mut().zip(f).for_each(|(a, b)| *a *= b);
}

/// Samples of every nested antiderivative of a chain at one `u`.
#[derive(Clone, Debug)]
pub struct Materialized {
    hats: Vec<Vec<Vec<f64>>>,
    checks: Vec<Vec<Vec<f64>>>,
    outer: Vec<f64>,
}

impl Materialized {
    pub fn new(chain: &WnlChain, jets: &[JetPoint], grid: &Grid) -> Result<Self> {
        let outer = sample_expr(chain.outer.expr(), jets, "outer density")?;
        let mut hats = Vec::with_capacity(chain.chains.len());
        let mut densities = Vec::with_capacity(chain.chains.len());
        for (a, c) in chain.chains.iter().enumerate() {
            let hs: Vec<Vec<f64>> = c
                .iter()
                .enumerate()
                .map(|(d, h)| sample_expr(h.expr(), jets, &format!("chain {} density {}", a + 1, d + 1)))
                .collect::<Result<_>>()?;
            let mut levels = vec![Vec::new(); c.len()];
            let mut inner: Option<Vec<f64>> = None;
            for d in (0..c.len()).rev() {
                let mut f = hs[d].clone();
                if let Some(prev) = &inner {
                    mul_into(&mut f, prev);
                }
                let hat = grid.dinv(&f);
                levels[d] = hat.clone();
                inner = Some(hat);
            }
            hats.push(levels);
            densities.push(hs);
        }
        let mut checks = Vec::with_capacity(chain.chains.len());
        for (a, hs) in densities.iter().enumerate() {
            let mut seed = outer.clone();
            for (b, levels) in hats.iter().enumerate() {
                if b != a {
                    mul_into(&mut seed, &levels[0]);
                }
            }
            let mut levels = vec![grid.dinv(&seed)];
            for h in hs.iter().take(hs.len() - 1) {
                let mut f = h.clone();
                mul_into(&mut f, levels.last().unwrap());
                levels.push(grid.dinv(&f));
            }
            checks.push(levels);
        }
        Ok(Self { hats, checks, outer })
    }

    pub fn factor(&self, f: Factor) -> &[f64] {
        match f {
            Factor::Hat { alpha, delta } => &self.hats[alpha - 1][delta - 1],
            Factor::Check { alpha, delta } => &self.checks[alpha - 1][delta - 1],
        }
    }

    /// `g · Π_α Ĥ^1_α`, the chain density itself.
    pub fn density(&self) -> Vec<f64> {
        let mut out = self.outer.clone();
        for levels in &self.hats {
            mul_into(&mut out, &levels[0]);
        }
        out
    }

    pub fn sample(&self, sum: &MixedSum, jets: &[JetPoint]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; jets.len()];
        for t in &sum.terms {
            let mut s = sample_expr(&t.sym, jets, "variational derivative")?;
            for f in &t.factors {
                mul_into(&mut s, self.factor(*f));
            }
            out.iter_mut().zip(&s).for_each(|(o, v)| *o += v);
        }
        Ok(out)
    }
}

/// `F[u] = ∫ Σ c_t chain_t(u)`.
pub fn eval_functional(f: &Functional, u: &TestFunction, grid: &Grid) -> Result<Quadrature> {
    let jets = jets_for(u, grid, f.order())?;
    let mut total = vec![0.0; grid.len()];
    for (c, chain) in &f.terms {
        let d = Materialized::new(chain, &jets, grid)?.density();
        total.iter_mut().zip(&d).for_each(|(t, v)| *t += c * v);
    }
    Ok(grid.integrate(&total))
}

/// A covector field along `u`: samples of `v_j` and, when available, of
/// `D_x v_j` obtained without differencing samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Covector {
    pub values: Vec<Vec<f64>>,
    pub derivative: Option<Vec<Vec<f64>>>,
}

impl Covector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self { values: vec![vec![0.0; m]; n], derivative: Some(vec![vec![0.0; m]; n]) }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ v_j k_j dx` for sampled `k`.
    pub fn pair(&self, k: &[Vec<f64>], grid: &Grid) -> f64 {
        let prod: Vec<f64> = (0..grid.len()).map(|x| self.values.iter().zip(k).map(|(v, kk)| v[x] * kk[x]).sum()).collect();
        grid.integrate(&prod).value
    }

    pub fn axpy(&mut self, a: f64, other: &Covector) {
        for (s, o) in self.values.iter_mut().zip(&other.values) {
            s.iter_mut().zip(o).for_each(|(x, y)| *x += a * y);
        }
        self.derivative = match (self.derivative.take(), &other.derivative) {
            (Some(mut d), Some(od)) => {
                for (s, o) in d.iter_mut().zip(od) {
                    s.iter_mut().zip(o).for_each(|(x, y)| *x += a * y);
                }
                Some(d)
            }
            _ => None,
        };
    }
}

/// Symbolic half of `δF/δu` for one functional: per chain, per field, the
/// mixed sum for the value and for its total derivative.
#[derive(Clone, Debug)]
pub struct VdPlan {
    fields: usize,
    terms: Vec<(f64, WnlChain, Vec<MixedSum>, Vec<MixedSum>)>,
    order: usize,
}

impl VdPlan {
    pub fn new(f: &Functional) -> Self {
        let mut order = 0;
        let terms = f
            .terms
            .iter()
            .map(|(c, chain)| {
                let value = variational_plan(chain);
                let derivative: Vec<MixedSum> = value.iter().map(|s| s.d_total(chain)).collect();
                for s in value.iter().chain(&derivative) {
                    order = order.max(s.max_order());
                }
                order = order.max(chain.order());
                (*c, chain.clone(), value, derivative)
            })
            .collect();
        Self { fields: f.fields(), terms, order }
    }

    /// Jet order needed to sample the plan.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value_sums(&self) -> impl Iterator<Item = (f64, &WnlChain, &[MixedSum])> {
        self.terms.iter().map(|(c, ch, v, _)| (*c, ch, v.as_slice()))
    }

    pub fn sample(&self, u: &TestFunction, grid: &Grid) -> Result<Covector> {
        let jets = jets_for(u, grid, self.order)?;
        self.sample_jets(&jets, grid)
    }

    pub fn sample_jets(&self, jets: &[JetPoint], grid: &Grid) -> Result<Covector> {
        let mut out = Covector::zeros(self.fields, grid.len());
        for (c, chain, value, derivative) in &self.terms {
            let mat = Materialized::new(chain, jets, grid)?;
            let values = value.iter().map(|s| mat.sample(s, jets)).collect::<Result<Vec<_>>>()?;
            let derivs = derivative.iter().map(|s| mat.sample(s, jets)).collect::<Result<Vec<_>>>()?;
            out.axpy(*c, &Covector { values, derivative: Some(derivs) });
        }
        Ok(out)
    }
}

/// `δF/δu` sampled on the grid, with its derivative channel.
pub fn variational_derivative(f: &Functional, u: &TestFunction, grid: &Grid) -> Result<Covector> {
    VdPlan::new(f).sample(u, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schwartz::GaussTerm;
    use crate::variational::LocalDensity;

    fn gauss() -> TestFunction {
        TestFunction::new(vec![0.0], vec![vec![GaussTerm::gaussian(1.0, 1.0, 0.0)]]).unwrap()
    }

    #[test]
    fn kdv_hamiltonian_value() {
        let g = Grid::default();
        let h = Functional::local("H", LocalDensity::parse("u1^3 - 0.5*u1*u1_xx", 1).unwrap());
        let v = eval_functional(&h, &gauss(), &g).unwrap().value;
        let direct: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&x| (-3.0 * x * x).exp() - 0.5 * (-x * x).exp() * (4.0 * x * x - 2.0) * (-x * x).exp())
            .collect();
        assert!((v - g.integrate(&direct).value).abs() <= 1e-10);
    }

    #[test]
    fn depth_two_chain_materializes_innermost_first() {
        let g = Grid::default();
        let d = |s: &str| LocalDensity::parse(s, 1).unwrap();
        let chain = WnlChain::new(d("u1"), vec![vec![d("u1"), d("u1^2")]]).unwrap();
        let u = gauss();
        let jets = u.jets(&g, 0).unwrap();
        let mat = Materialized::new(&chain, &jets, &g).unwrap();
        let s: Vec<f64> = g.nodes().iter().map(|&x| (-x * x).exp()).collect();
        let inner = g.dinv(&s.iter().map(|v| v * v).collect::<Vec<_>>());
        let want = g.dinv(&s.iter().zip(&inner).map(|(a, b)| a * b).collect::<Vec<_>>());
        assert_eq!(mat.factor(Factor::Hat { alpha: 1, delta: 1 }), want.as_slice());
        let c2 = g.dinv(&s.iter().zip(&g.dinv(&s)).map(|(a, b)| a * b).collect::<Vec<_>>());
        assert_eq!(mat.factor(Factor::Check { alpha: 1, delta: 2 }), c2.as_slice());
    }
}
