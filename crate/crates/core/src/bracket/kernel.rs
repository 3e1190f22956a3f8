//! Pointwise kernels. Each takes the geometry at `u(x)`, the tangent
//! `u_x(x)` and, for every covector argument, the triple `(f, f', f̃)` as
//! independent numbers.

use crate::geometry::PointGeometry;

#[derive(Clone, Debug, PartialEq)]
pub struct Slot {
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub tilde: f64,
}

/// `(P v)^i = g^{ij} v'_j − g^{is}Γ^j_{sk}u_x^k v_j + w^i_k u_x^k ṽ`.
pub fn p_kernel(p: &PointGeometry, ux: &[f64], v: &Slot) -> Vec<f64> {
    let n = p.n();
    (0..n)
        .map(|i| {
            let mut out = 0.0;
            for j in 0..n {
                out += p.g[[i, j]] * v.dv[j];
                for s in 0..n {
                    for k in 0..n {
                        out -= p.g[[i, s]] * p.gamma[[j, s, k]] * ux[k] * v.v[j];
                    }
                }
            }
            for k in 0..n {
                out += p.w[[i, k]] * ux[k] * v.tilde;
            }
            out
        })
        .collect()
}

/// `δ{F,G}/δu^p` for linear `F`, `G`, term by term as in the expansion with
/// the curvature block and the two tilde blocks.
pub fn vd_kernel(pt: &PointGeometry, ux: &[f64], f: &Slot, g: &Slot) -> Vec<f64> {
    let n = pt.n();
    let (gm, gg, w, dw, r) = (&pt.gamma, &pt.g, &pt.w, &pt.dw, &pt.riemann);
    (0..n)
        .map(|p| {
            let mut out = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for s in 0..n {
                        out += f.dv[i] * gg[[i, s]] * gm[[j, s, p]] * g.v[j];
                        out -= f.v[i] * gg[[s, j]] * gm[[i, s, p]] * g.dv[j];
                    }
                    for k in 0..n {
                        let fgu = f.v[i] * ux[k] * g.v[j];
                        let mut q = 0.0;
                        for s in 0..n {
                            for l in 0..n {
                                q += gg[[s, l]] * (gm[[i, s, p]] * gm[[j, l, k]] - gm[[i, s, k]] * gm[[j, l, p]]);
                            }
                        }
                        out += fgu * (r[[i, j, p, k]] + q + w[[i, k]] * w[[j, p]] - w[[i, p]] * w[[j, k]]);
                    }
                }
            }
            let mut fb = 0.0;
            let mut gb = 0.0;
            for i in 0..n {
                for k in 0..n {
                    fb += f.v[i] * ux[k] * (dw[[p, i, k]] - dw[[k, i, p]]);
                    gb += g.v[i] * ux[k] * (dw[[p, i, k]] - dw[[k, i, p]]);
                }
                fb -= f.dv[i] * w[[i, p]];
                gb -= g.dv[i] * w[[i, p]];
            }
            out + fb * g.tilde - gb * f.tilde
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Σ_cyc δ{F,G}/δu^p (P δH)^p` at one node.
pub fn raw_jacobi_integrand(pt: &PointGeometry, ux: &[f64], f: &Slot, g: &Slot, h: &Slot) -> f64 {
    dot(&vd_kernel(pt, ux, f, g), &p_kernel(pt, ux, h))
        + dot(&vd_kernel(pt, ux, g, h), &p_kernel(pt, ux, f))
        + dot(&vd_kernel(pt, ux, h, f), &p_kernel(pt, ux, g))
}

/// The same integrand assembled from the coefficient tensors `a … m`.
pub fn coefficient_integrand(pt: &PointGeometry, ux: &[f64], f: &Slot, g: &Slot, h: &Slot) -> f64 {
    let n = pt.n();
    let c = pt.coefficients(ux);
    let (ft, gt, ht) = (f.tilde, g.tilde, h.tilde);
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                s -= f.v[i] * g.v[j] * h.v[l] * c.a[[i, j, l]];
                for k in 0..n {
                    s += ux[k]
                        * (f.dv[i] * g.v[j] * h.v[l] * c.b[[i, j, l, k]]
                            + f.v[i] * g.dv[j] * h.v[l] * c.b[[j, l, i, k]]
                            + f.v[i] * g.v[j] * h.dv[l] * c.b[[l, i, j, k]]);
                }
                s += f.dv[i] * g.dv[j] * h.v[l] * c.d[[i, j, l]]
                    + f.dv[i] * g.v[j] * h.dv[l] * c.d[[l, i, j]]
                    + f.v[i] * g.dv[j] * h.dv[l] * c.d[[j, l, i]];
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            // Pairs (i,j), (j,l), (i,l) share the same two-index shapes.
            s += ft * g.v[a] * h.v[b] * c.c[[a, b]] + f.v[b] * gt * h.v[a] * c.c[[a, b]] + f.v[a] * g.v[b] * ht * c.c[[a, b]];
            s += f.dv[a] * g.dv[b] * ht * c.m[[a, b]] + f.dv[b] * gt * h.dv[a] * c.m[[a, b]] + ft * g.dv[a] * h.dv[b] * c.m[[a, b]];
            for k in 0..n {
                let e = c.e[[a, b, k]] * ux[k];
                s += f.dv[a] * gt * h.v[b] * e - f.dv[a] * g.v[b] * ht * e - ft * g.dv[a] * h.v[b] * e
                    + f.v[b] * g.dv[a] * ht * e
                    + ft * g.v[b] * h.dv[a] * e
                    - f.v[b] * gt * h.dv[a] * e;
            }
        }
    }
    s
}
