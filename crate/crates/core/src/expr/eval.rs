use super::{Func, JetExpr, JetPoint, JetVar};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero in `{expr}`")]
    DivisionByZero { expr: String },
    #[error("{func} outside its domain at argument {arg} in `{expr}`")]
    Domain { func: &'static str, arg: f64, expr: String },
    #[error("point does not carry jet variable {var}")]
    MissingVariable { var: JetVar },
}

impl JetExpr {
    /// Evaluates the tree at `p`.
    pub fn eval(&self, p: &JetPoint) -> Result<f64, EvalError> {
        Ok(match self {
            JetExpr::Const(c) => *c,
            JetExpr::X => p.x,
            JetExpr::Var(v) => p.get(*v).ok_or(EvalError::MissingVariable { var: *v })?,
            JetExpr::Neg(a) => -a.eval(p)?,
            JetExpr::Sum(ts) => {
                let mut s = 0.0;
                for t in ts {
                    s += t.eval(p)?;
                }
                s
            }
            JetExpr::Product(fs) => {
                let mut s = 1.0;
                for f in fs {
                    s *= f.eval(p)?;
                }
                s
            }
            JetExpr::Div(a, b) => {
                let d = b.eval(p)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero { expr: self.to_string() });
                }
                a.eval(p)? / d
            }
            JetExpr::Pow(a, k) => {
                let b = a.eval(p)?;
                if b == 0.0 && *k < 0 {
                    return Err(EvalError::DivisionByZero { expr: self.to_string() });
                }
                b.powi(*k)
            }
            JetExpr::Func(g, a) => {
                let arg = a.eval(p)?;
                g.apply(arg).ok_or_else(|| EvalError::Domain { func: g.name(), arg, expr: self.to_string() })?
            }
        })
    }

    /// Evaluates an expression in the order-0 variables only, as used for
    /// geometric data `g(z)`.
    pub fn eval_at(&self, z: &[f64]) -> Result<f64, EvalError> {
        self.eval(&JetPoint::at_values(z))
    }
}

impl Func {
    /// Derivative of the function itself, `f'(a)`, as an expression in `a`.
    pub(crate) fn derivative(self, a: &JetExpr) -> JetExpr {
        match self {
            Func::Exp => a.clone().exp(),
            Func::Sin => a.clone().apply(Func::Cos),
            Func::Cos => -(a.clone().apply(Func::Sin)),
            Func::Sqrt => JetExpr::Div(Box::new(JetExpr::Const(0.5)), Box::new(a.clone().sqrt())),
            Func::Ln => JetExpr::Div(Box::new(JetExpr::one()), Box::new(a.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(pairs: &[((usize, usize), f64)], x: f64) -> JetPoint {
        let mut p = JetPoint::new(x, 1, 2);
        for &((j, i), v) in pairs {
            p.set(JetVar::new(j, i), v);
        }
        p
    }

    #[test]
    fn kdv_density_value() {
        let e = JetExpr::parse("u1^3 - 0.5*u1*u1_xx", 1).unwrap();
        assert_eq!(e.eval(&point(&[((0, 0), 2.0), ((0, 2), 4.0)], 0.0)).unwrap(), 4.0);
    }

    #[test]
    fn x_and_exp() {
        assert_eq!(JetExpr::parse("x", 1).unwrap().eval(&point(&[], 3.5)).unwrap(), 3.5);
        let e = JetExpr::parse("exp(u1)*u1_x", 1).unwrap();
        assert_eq!(e.eval(&point(&[((0, 1), 7.0)], 0.0)).unwrap(), 7.0);
    }

    #[test]
    fn inadmissible_points_name_the_subexpression() {
        let p = point(&[], 0.0);
        match JetExpr::parse("1 + 1/u1", 1).unwrap().eval(&p) {
            Err(EvalError::DivisionByZero { expr }) => assert_eq!(expr, "1/u1"),
            other => panic!("{other:?}"),
        }
        let p = point(&[((0, 0), -1.0)], 0.0);
        assert!(matches!(
            JetExpr::parse("sqrt(u1)", 1).unwrap().eval(&p),
            Err(EvalError::Domain { func: "sqrt", .. })
        ));
        assert!(matches!(JetExpr::parse("ln(u1 + 1)", 1).unwrap().eval(&p), Err(EvalError::Domain { .. })));
        assert!(matches!(JetExpr::parse("u1^-1", 1).unwrap().eval(&point(&[], 0.0)), Err(EvalError::DivisionByZero { .. })));
        assert!(matches!(
            JetExpr::var(0, 5).eval(&p),
            Err(EvalError::MissingVariable { var }) if var == JetVar::new(0, 5)
        ));
    }
}
