use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{JetExpr, JetVar};
use crate::schwartz::Omega;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaSource {
    Supplied,
    LeviCivita,
}

type Matrix = Vec<Vec<JetExpr>>;
type Cube = Vec<Vec<Vec<JetExpr>>>;

/// `(g^{ij}, Γ^j_{sk}, w^i_j)` as expressions in `u1 … un`, indexed
/// `g[i][j]`, `gamma[j][s][k]`, `w[i][j]`, together with every symbolic
/// derivative the checks need.
#[derive(Clone, Debug)]
pub struct BracketSpec {
    n: usize,
    pub omega: Omega,
    g: Matrix,
    gamma: Option<Cube>,
    w: Matrix,
    dg: Cube,
    d2g: Vec<Cube>,
    dgamma: Option<Vec<Cube>>,
    dw: Cube,
}

fn d(e: &JetExpr, k: usize) -> JetExpr {
    e.d_partial(JetVar::new(k, 0))
}

impl BracketSpec {
    pub fn new(n: usize, omega: Omega, g: Matrix, gamma: Option<Cube>, w: Matrix) -> Result<Self> {
        if omega.dim != n {
            return Err(Error::Dimension(format!("chart has dimension {} but n = {n}", omega.dim)));
        }
        let square = |m: &Matrix, name: &str| -> Result<()> {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(Error::Dimension(format!("{name} must be {n}x{n}")));
            }
            Ok(())
        };
        square(&g, "g")?;
        square(&w, "w")?;
        if let Some(c) = &gamma {
            if c.len() != n || c.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
                return Err(Error::Dimension(format!("Gamma must be {n}x{n}x{n}")));
            }
        }
        let all = g.iter().flatten().chain(w.iter().flatten()).chain(gamma.iter().flatten().flatten().flatten());
        for e in all {
            if e.depends_on_x() || e.max_order().is_some_and(|o| o > 0) {
                return Err(Error::Invalid(format!("`{e}` must depend on u only (hydrodynamic type)")));
            }
            if e.field_span() > n {
                return Err(Error::Dimension(format!("`{e}` uses more than {n} fields")));
            }
        }
        let grad = |m: &Matrix| -> Cube {
            (0..n).map(|k| m.iter().map(|r| r.iter().map(|e| d(e, k)).collect()).collect()).collect()
        };
        let dg = grad(&g);
        let d2g = (0..n).map(|m| grad(&dg[m])).collect::<Vec<_>>();
        // d2g[k][m] = ∂_m ∂_k g; reindex to [m][k].
        let d2g = (0..n).map(|m| (0..n).map(|k| d2g[k][m].clone()).collect()).collect();
        let dgamma = gamma.as_ref().map(|c| (0..n).map(|m| c.iter().map(|s| grad(s)[m].clone()).collect()).collect());
        let dw = grad(&w);
        Ok(Self { n, omega, g, gamma, w, dg, d2g, dgamma, dw })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> GammaSource {
        if self.gamma.is_some() {
            GammaSource::Supplied
        } else {
            GammaSource::LeviCivita
        }
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn gamma(&self) -> Option<&Cube> {
        self.gamma.as_ref()
    }

    pub fn w(&self) -> &Matrix {
        &self.w
    }

    pub(crate) fn dg(&self) -> &Cube {
        &self.dg
    }

    pub(crate) fn d2g(&self) -> &[Cube] {
        &self.d2g
    }

    pub(crate) fn dgamma(&self) -> Option<&[Cube]> {
        self.dgamma.as_deref()
    }

    pub(crate) fn dw(&self) -> &Cube {
        &self.dw
    }

    /// Same data with `w` scaled by `lambda`.
    pub fn scale_w(&self, lambda: f64) -> Result<Self> {
        let w = self.w.iter().map(|r| r.iter().map(|e| (JetExpr::Const(lambda) * e.clone()).simplify()).collect()).collect();
        Self::new(self.n, self.omega.clone(), self.g.clone(), self.gamma.clone(), w)
    }

    /// Every tensor entry with a label, for validation sweeps.
    pub fn entries(&self) -> Vec<(String, &JetExpr)> {
        let mut out = Vec::new();
        for (i, r) in self.g.iter().enumerate() {
            for (j, e) in r.iter().enumerate() {
                out.push((format!("g^{}{}", i + 1, j + 1), e));
            }
        }
        if let Some(c) = &self.gamma {
            for (j, m) in c.iter().enumerate() {
                for (s, r) in m.iter().enumerate() {
                    for (k, e) in r.iter().enumerate() {
                        out.push((format!("Gamma^{}_{}{}", j + 1, s + 1, k + 1), e));
                    }
                }
            }
        }
        for (i, r) in self.w.iter().enumerate() {
            for (j, e) in r.iter().enumerate() {
                out.push((format!("w^{}_{}", i + 1, j + 1), e));
            }
        }
        out
    }
}
