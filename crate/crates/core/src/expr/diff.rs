use super::{JetExpr, JetVar};

fn sum(terms: Vec<JetExpr>) -> JetExpr {
    let mut terms: Vec<JetExpr> = terms.into_iter().filter(|t| !t.is_zero()).collect();
    match terms.len() {
        0 => JetExpr::zero(),
        1 => terms.pop().unwrap(),
        _ => JetExpr::Sum(terms),
    }
}

fn product(factors: Vec<JetExpr>) -> JetExpr {
    if factors.iter().any(JetExpr::is_zero) {
        return JetExpr::zero();
    }
    let mut factors: Vec<JetExpr> = factors.into_iter().filter(|f| !f.is_one()).collect();
    match factors.len() {
        0 => JetExpr::one(),
        1 => factors.pop().unwrap(),
        _ => JetExpr::Product(factors),
    }
}

/// Chain-rule differentiation where `leaf` gives the derivative of every
/// leaf node (`Const`, `X`, `Var`).
fn derive(e: &JetExpr, leaf: &dyn Fn(&JetExpr) -> JetExpr) -> JetExpr {
    match e {
        JetExpr::Const(_) | JetExpr::X | JetExpr::Var(_) => leaf(e),
        JetExpr::Neg(a) => {
            let d = derive(a, leaf);
            if d.is_zero() {
                d
            } else {
                -d
            }
        }
        JetExpr::Sum(ts) => sum(ts.iter().map(|t| derive(t, leaf)).collect()),
        JetExpr::Product(fs) => sum(
            (0..fs.len())
                .map(|k| {
                    let d = derive(&fs[k], leaf);
                    if d.is_zero() {
                        return d;
                    }
                    let mut parts = fs.clone();
                    parts[k] = d;
                    product(parts)
                })
                .collect(),
        ),
        JetExpr::Div(a, b) => {
            let da = derive(a, leaf);
            let db = derive(b, leaf);
            let first = if da.is_zero() { da } else { JetExpr::Div(Box::new(da), b.clone()) };
            let second = if db.is_zero() {
                db
            } else {
                -JetExpr::Div(Box::new(product(vec![(**a).clone(), db])), Box::new((**b).clone().powi(2)))
            };
            sum(vec![first, second])
        }
        JetExpr::Pow(a, k) => {
            let da = derive(a, leaf);
            if da.is_zero() || *k == 0 {
                return JetExpr::zero();
            }
            let base = if *k == 2 { (**a).clone() } else { (**a).clone().powi(k - 1) };
            product(vec![JetExpr::Const(*k as f64), base, da])
        }
        JetExpr::Func(g, a) => {
            let da = derive(a, leaf);
            if da.is_zero() {
                return da;
            }
            product(vec![g.derivative(a), da])
        }
    }
}

impl JetExpr {
    /// Partial derivative with respect to the jet coordinate `var`.
    pub fn d_partial(&self, var: JetVar) -> JetExpr {
        derive(self, &|leaf| match leaf {
            JetExpr::Var(v) if *v == var => JetExpr::one(),
            _ => JetExpr::zero(),
        })
        .simplify()
    }

    /// Explicit partial derivative in `x`.
    pub fn d_x_explicit(&self) -> JetExpr {
        derive(self, &|leaf| match leaf {
            JetExpr::X => JetExpr::one(),
            _ => JetExpr::zero(),
        })
        .simplify()
    }

    /// Total derivative `D_x = ∂_x + Σ u_j^{(i+1)} ∂/∂u_j^{(i)}`.
    pub fn d_total(&self) -> JetExpr {
        derive(self, &|leaf| match leaf {
            JetExpr::X => JetExpr::one(),
            JetExpr::Var(v) => JetExpr::Var(v.raised()),
            _ => JetExpr::zero(),
        })
        .simplify()
    }

    /// `D_x^k e`.
    pub fn d_total_n(&self, k: usize) -> JetExpr {
        (0..k).fold(self.clone(), |e, _| e.d_total())
    }

    /// Gradient in the order-0 variables `u_1..u_n`.
    pub fn gradient(&self, fields: usize) -> Vec<JetExpr> {
        (0..fields).map(|j| self.d_partial(JetVar::new(j, 0))).collect()
    }
}
