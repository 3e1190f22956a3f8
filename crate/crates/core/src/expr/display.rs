use std::fmt::{self, Display, Write};

use super::JetExpr;

// Binding strength: sum < product/div < unary minus < power < atom.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn strength(e: &JetExpr) -> u8 {
    match e {
        JetExpr::Const(c) if c.is_sign_negative() => NEG,
        JetExpr::Const(_) | JetExpr::X | JetExpr::Var(_) | JetExpr::Func(..) => ATOM,
        JetExpr::Neg(a) => match **a {
            JetExpr::Const(c) if !c.is_sign_negative() => NEG,
            JetExpr::Const(_) => ATOM,
            _ => NEG,
        },
        JetExpr::Sum(ts) if ts.len() == 1 => strength(&ts[0]),
        JetExpr::Sum(_) => SUM,
        JetExpr::Product(fs) if fs.len() == 1 => strength(&fs[0]),
        JetExpr::Product(_) | JetExpr::Div(..) => PRODUCT,
        JetExpr::Pow(..) => POW,
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    write!(f, "{c}")
}

fn at(f: &mut fmt::Formatter<'_>, e: &JetExpr, min: u8) -> fmt::Result {
    if strength(e) < min {
        f.write_char('(')?;
        e.fmt(f)?;
        f.write_char(')')
    } else {
        e.fmt(f)
    }
}

impl fmt::Display for JetExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JetExpr::Const(c) => write_const(f, *c),
            JetExpr::X => f.write_char('x'),
            JetExpr::Var(v) => v.fmt(f),
            JetExpr::Neg(a) => match **a {
                JetExpr::Const(c) => write_const(f, -c),
                _ => {
                    f.write_char('-')?;
                    at(f, a, POW)
                }
            },
            JetExpr::Sum(ts) => {
                if ts.is_empty() {
                    return f.write_char('0');
                }
                at(f, &ts[0], SUM)?;
                for t in &ts[1..] {
                    match t {
                        JetExpr::Neg(a) if !matches!(**a, JetExpr::Const(_)) => {
                            f.write_str(" - ")?;
                            at(f, a, PRODUCT)?;
                        }
                        JetExpr::Neg(a) => {
                            let c = a.as_const().unwrap();
                            if c.is_sign_negative() {
                                f.write_str(" + ")?;
                                write_const(f, -c)?;
                            } else {
                                f.write_str(" - ")?;
                                write_const(f, c)?;
                            }
                        }
                        JetExpr::Const(c) if c.is_sign_negative() => {
                            f.write_str(" - ")?;
                            write_const(f, -c)?;
                        }
                        JetExpr::Product(fs)
                            if fs.len() > 1 && fs[0].as_const().is_some_and(|c| c.is_sign_negative()) =>
                        {
                            f.write_str(" - ")?;
                            let c = -fs[0].as_const().unwrap();
                            let rest = &fs[1..];
                            if c == 1.0 {
                                at(f, &rest[0], PRODUCT)?;
                            } else {
                                write_const(f, c)?;
                                f.write_char('*')?;
                                at(f, &rest[0], POW)?;
                            }
                            for r in &rest[1..] {
                                f.write_char('*')?;
                                at(f, r, POW)?;
                            }
                        }
                        _ => {
                            f.write_str(" + ")?;
                            at(f, t, PRODUCT)?;
                        }
                    }
                }
                Ok(())
            }
            JetExpr::Product(fs) => {
                if fs.is_empty() {
                    return f.write_char('1');
                }
                at(f, &fs[0], PRODUCT)?;
                for g in &fs[1..] {
                    f.write_char('*')?;
                    at(f, g, POW)?;
                }
                Ok(())
            }
            JetExpr::Div(a, b) => {
                at(f, a, PRODUCT)?;
                f.write_char('/')?;
                at(f, b, POW)
            }
            JetExpr::Pow(a, k) => {
                at(f, a, ATOM)?;
                write!(f, "^{k}")
            }
            JetExpr::Func(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}
