use nalgebra::DMatrix;
use ndarray::{Array2, Array3, Array4};

use super::BracketSpec;
use crate::error::{Error, Result};
use crate::expr::JetExpr;

/// Every tensor of a spec evaluated at one point `z` of the chart, with the
/// usual index placement: `g[[i,j]] = g^{ij}`, `dg[[k,i,j]] = ∂_k g^{ij}`,
/// `gamma[[j,s,k]] = Γ^j_{sk}`, `dgamma[[m,j,s,k]] = ∂_m Γ^j_{sk}`,
/// `w[[i,j]] = w^i_j`, `dw[[k,i,j]] = ∂_k w^i_j`,
/// `riemann[[i,j,p,k]] = R^{ij}_{pk}`.
#[derive(Clone, Debug)]
pub struct PointGeometry {
    pub z: Vec<f64>,
    pub g: Array2<f64>,
    pub g_lower: Array2<f64>,
    pub det: f64,
    pub dg: Array3<f64>,
    pub gamma: Array3<f64>,
    pub dgamma: Array4<f64>,
    /// Levi-Civita connection of `g`; equals `gamma` when no Γ is supplied.
    pub levi_civita: Array3<f64>,
    pub w: Array2<f64>,
    pub dw: Array3<f64>,
    pub riemann: Array4<f64>,
}

fn eval(e: &JetExpr, z: &[f64], label: impl FnOnce() -> String) -> Result<f64> {
    e.eval_at(z).map_err(|source| Error::PointEval { context: label(), point: z.to_vec(), source })
}

fn matrix(m: &[Vec<JetExpr>], z: &[f64], name: &str) -> Result<Array2<f64>> {
    let n = m.len();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] = eval(&m[i][j], z, || format!("{name}[{}][{}]", i + 1, j + 1))?;
        }
    }
    Ok(out)
}

fn cube(c: &[Vec<Vec<JetExpr>>], z: &[f64], name: &str) -> Result<Array3<f64>> {
    let n = c.len();
    let mut out = Array3::zeros((n, n, n));
    for a in 0..n {
        for b in 0..n {
            for e in 0..n {
                out[[a, b, e]] = eval(&c[a][b][e], z, || format!("{name}[{}][{}][{}]", a + 1, b + 1, e + 1))?;
            }
        }
    }
    Ok(out)
}

/// Relative determinant threshold under which the metric counts as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

impl PointGeometry {
    pub fn new(spec: &BracketSpec, z: &[f64]) -> Result<Self> {
        let n = spec.n();
        if z.len() != n {
            return Err(Error::Dimension(format!("point has {} coordinates, expected {n}", z.len())));
        }
        let g = matrix(spec.g(), z, "g")?;
        let gm = DMatrix::from_fn(n, n, |i, j| g[[i, j]]);
        let det = gm.determinant();
        let scale: f64 = (0..n).map(|i| (0..n).map(|j| g[[i, j]] * g[[i, j]]).sum::<f64>().sqrt()).product();
        let inv = gm.try_inverse().filter(|_| scale > 0.0 && det.abs() > SINGULAR_THRESHOLD * scale);
        let Some(inv) = inv else {
            return Err(Error::SingularMetric { point: z.to_vec() });
        };
        let g_lower = Array2::from_shape_fn((n, n), |(i, j)| inv[(i, j)]);
        let dg = cube(spec.dg(), z, "dg")?;
        let mut d2g = Array4::zeros((n, n, n, n));
        for m in 0..n {
            let c = cube(&spec.d2g()[m], z, "d2g")?;
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        d2g[[m, k, i, j]] = c[[k, i, j]];
                    }
                }
            }
        }
        let (levi_civita, dlc) = levi_civita(&g, &g_lower, &dg, &d2g);
        let (gamma, dgamma) = match (spec.gamma(), spec.dgamma()) {
            (Some(c), Some(dc)) => {
                let gamma = cube(c, z, "Gamma")?;
                let mut dgamma = Array4::zeros((n, n, n, n));
                for m in 0..n {
                    let t = cube(&dc[m], z, "dGamma")?;
                    for j in 0..n {
                        for s in 0..n {
                            for k in 0..n {
                                dgamma[[m, j, s, k]] = t[[j, s, k]];
                            }
                        }
                    }
                }
                (gamma, dgamma)
            }
            _ => (levi_civita.clone(), dlc),
        };
        let w = matrix(spec.w(), z, "w")?;
        let dw = cube(spec.dw(), z, "dw")?;
        let riemann = riemann(&g, &gamma, &dgamma);
        Ok(Self { z: z.to_vec(), g, g_lower, det, dg, gamma, dgamma, levi_civita, w, dw, riemann })
    }

    pub fn n(&self) -> usize {
        self.g.nrows()
    }

    /// `∇_p w^j_k = ∂_p w^j_k + Γ^j_{ps} w^s_k − Γ^s_{kp} w^j_s`, indexed `[p,j,k]`.
    pub fn nabla_w(&self) -> Array3<f64> {
        let n = self.n();
        Array3::from_shape_fn((n, n, n), |(p, j, k)| {
            let mut v = self.dw[[p, j, k]];
            for s in 0..n {
                v += self.gamma[[j, p, s]] * self.w[[s, k]] - self.gamma[[s, k, p]] * self.w[[j, s]];
            }
            v
        })
    }

    /// `Q^{jl}_{pk} = g^{vs}(Γ^j_{vp}Γ^l_{sk} − Γ^j_{vk}Γ^l_{sp})`.
    fn q(&self, j: usize, l: usize, p: usize, k: usize) -> f64 {
        let n = self.n();
        let mut v = 0.0;
        for a in 0..n {
            for s in 0..n {
                v += self.g[[a, s]] * (self.gamma[[j, a, p]] * self.gamma[[l, s, k]] - self.gamma[[j, a, k]] * self.gamma[[l, s, p]]);
            }
        }
        v
    }

    /// `S^{jl}_{pk} = Q^{jl}_{pk} + R^{jl}_{pk} − w^j_p w^l_k + w^j_k w^l_p`.
    pub fn s_block(&self) -> Array4<f64> {
        let n = self.n();
        Array4::from_shape_fn((n, n, n, n), |(j, l, p, k)| {
            self.q(j, l, p, k) + self.riemann[[j, l, p, k]] - self.w[[j, p]] * self.w[[l, k]] + self.w[[j, k]] * self.w[[l, p]]
        })
    }

    /// Gauss defect `R^{ij}_{pk} − (w^i_p w^j_k − w^i_k w^j_p)`.
    pub fn gauss_defect(&self) -> Array4<f64> {
        let n = self.n();
        Array4::from_shape_fn((n, n, n, n), |(i, j, p, k)| {
            self.riemann[[i, j, p, k]] - (self.w[[i, p]] * self.w[[j, k]] - self.w[[i, k]] * self.w[[j, p]])
        })
    }

    /// `∂_k g^{ij} + Γ^i_{sk} g^{sj} + Γ^j_{sk} g^{is}`, indexed `[k,i,j]`.
    pub fn compatibility(&self) -> Array3<f64> {
        let n = self.n();
        Array3::from_shape_fn((n, n, n), |(k, i, j)| {
            let mut v = self.dg[[k, i, j]];
            for s in 0..n {
                v += self.gamma[[i, s, k]] * self.g[[s, j]] + self.gamma[[j, s, k]] * self.g[[i, s]];
            }
            v
        })
    }

    pub fn coefficients(&self, ux: &[f64]) -> Coefficients {
        let n = self.n();
        let (g, gm, w, dw) = (&self.g, &self.gamma, &self.w, &self.dw);
        let s = self.s_block();
        let b = Array4::from_shape_fn((n, n, n, n), |(i, j, l, k)| {
            let mut v = 0.0;
            for a in 0..n {
                for p in 0..n {
                    for c in 0..n {
                        v += -g[[i, a]] * gm[[j, a, p]] * g[[p, c]] * gm[[l, c, k]] + g[[i, a]] * gm[[l, a, p]] * g[[p, c]] * gm[[j, c, k]];
                    }
                }
                v += s[[j, l, a, k]] * g[[a, i]];
            }
            v
        });
        let d = Array3::from_shape_fn((n, n, n), |(i, j, l)| {
            let mut v = 0.0;
            for a in 0..n {
                for p in 0..n {
                    v += g[[j, a]] * gm[[l, a, p]] * g[[p, i]] - g[[i, a]] * gm[[l, a, p]] * g[[p, j]];
                }
            }
            v
        });
        let e = Array3::from_shape_fn((n, n, n), |(i, j, k)| {
            let mut v = 0.0;
            for p in 0..n {
                for a in 0..n {
                    v += w[[i, p]] * g[[p, a]] * gm[[j, a, k]] - g[[i, a]] * gm[[j, a, p]] * w[[p, k]];
                }
                v -= (dw[[p, j, k]] - dw[[k, j, p]]) * g[[p, i]];
            }
            v
        });
        let m = Array2::from_shape_fn((n, n), |(i, j)| (0..n).map(|p| w[[i, p]] * g[[p, j]] - w[[j, p]] * g[[p, i]]).sum());
        // Γ^l_{αβ} u_x^β g^{pα}, indexed [l,p].
        let gu = Array2::from_shape_fn((n, n), |(l, p)| {
            let mut v = 0.0;
            for a in 0..n {
                for bb in 0..n {
                    v += g[[p, a]] * gm[[l, a, bb]] * ux[bb];
                }
            }
            v
        });
        let s_u = |i: usize, j: usize, p: usize| -> f64 { (0..n).map(|k| s[[i, j, p, k]] * ux[k]).sum() };
        let a = Array3::from_shape_fn((n, n, n), |(i, j, l)| {
            let term = |i: usize, j: usize, l: usize| -> f64 { (0..n).map(|p| s_u(i, j, p) * gu[[l, p]]).sum() };
            term(i, j, l) + term(j, l, i) + term(l, i, j)
        });
        // (∂_p w^j_β − ∂_β w^j_p) u_x^β, indexed [j,p].
        let curl: Array2<f64> = Array2::from_shape_fn((n, n), |(j, p)| (0..n).map(|bb| (dw[[p, j, bb]] - dw[[bb, j, p]]) * ux[bb]).sum::<f64>());
        let gk = Array2::from_shape_fn((n, n), |(l, p)| {
            let mut v = 0.0;
            for a in 0..n {
                for k in 0..n {
                    v += g[[p, a]] * gm[[l, a, k]] * ux[k];
                }
            }
            v
        });
        let c = Array2::from_shape_fn((n, n), |(j, l)| {
            let mut v = 0.0;
            for p in 0..n {
                v += curl[[j, p]] * gk[[l, p]] - curl[[l, p]] * gk[[j, p]];
                let wk: f64 = (0..n).map(|k| w[[p, k]] * ux[k]).sum();
                v += s_u(j, l, p) * wk;
            }
            v
        });
        Coefficients { a, b, c, d, e, m }
    }
}

/// Coefficient tensors of the Jacobi integrand at one point; `a` and `c`
/// are contracted with `u_x` (`a[[i,j,l]] = a^{ijl}_k u_x^k`,
/// `c[[j,l]] = c^{jl}_k u_x^k`), the others are `b[[i,j,l,k]]`,
/// `d[[i,j,l]]`, `e[[i,j,k]]`, `m[[i,j]]`.
#[derive(Clone, Debug)]
pub struct Coefficients {
    pub a: Array3<f64>,
    pub b: Array4<f64>,
    pub c: Array2<f64>,
    pub d: Array3<f64>,
    pub e: Array3<f64>,
    pub m: Array2<f64>,
}

fn levi_civita(g: &Array2<f64>, gl: &Array2<f64>, dg: &Array3<f64>, d2g: &Array4<f64>) -> (Array3<f64>, Array4<f64>) {
    let n = g.nrows();
    // ∂_k g_{ij} = −g_{ia} ∂_k g^{ab} g_{bj}
    let dgl = Array3::from_shape_fn((n, n, n), |(k, i, j)| {
        let mut v = 0.0;
        for a in 0..n {
            for b in 0..n {
                v -= gl[[i, a]] * dg[[k, a, b]] * gl[[b, j]];
            }
        }
        v
    });
    let d2gl = Array4::from_shape_fn((n, n, n, n), |(m, k, i, j)| {
        let mut v = 0.0;
        for a in 0..n {
            for b in 0..n {
                v -= dgl[[m, i, a]] * dg[[k, a, b]] * gl[[b, j]]
                    + gl[[i, a]] * d2g[[m, k, a, b]] * gl[[b, j]]
                    + gl[[i, a]] * dg[[k, a, b]] * dgl[[m, b, j]];
            }
        }
        v
    });
    let gamma = Array3::from_shape_fn((n, n, n), |(k, i, j)| {
        0.5 * (0..n).map(|l| g[[k, l]] * (dgl[[i, j, l]] + dgl[[j, i, l]] - dgl[[l, i, j]])).sum::<f64>()
    });
    let dgamma = Array4::from_shape_fn((n, n, n, n), |(m, k, i, j)| {
        0.5 * (0..n)
            .map(|l| {
                dg[[m, k, l]] * (dgl[[i, j, l]] + dgl[[j, i, l]] - dgl[[l, i, j]])
                    + g[[k, l]] * (d2gl[[m, i, j, l]] + d2gl[[m, j, i, l]] - d2gl[[m, l, i, j]])
            })
            .sum::<f64>()
    });
    (gamma, dgamma)
}

/// `R^{ij}_{pk} = g^{is}(∂_kΓ^j_{sp} − ∂_pΓ^j_{sk} + Γ^l_{sp}Γ^j_{lk} − Γ^l_{sk}Γ^j_{lp})`.
fn riemann(g: &Array2<f64>, gamma: &Array3<f64>, dgamma: &Array4<f64>) -> Array4<f64> {
    let n = g.nrows();
    let inner = Array4::from_shape_fn((n, n, n, n), |(s, j, p, k)| {
        let mut v = dgamma[[k, j, s, p]] - dgamma[[p, j, s, k]];
        for l in 0..n {
            v += gamma[[l, s, p]] * gamma[[j, l, k]] - gamma[[l, s, k]] * gamma[[j, l, p]];
        }
        v
    });
    Array4::from_shape_fn((n, n, n, n), |(i, j, p, k)| (0..n).map(|s| g[[i, s]] * inner[[s, j, p, k]]).sum())
}
