//! The WNL bracket `{F,G} = ∫ δF/δu_i P^{ij} δG/δu_j`, its variational
//! derivative for linear functionals, and skew-symmetry / Jacobi residuals.

mod kernel;
mod trials;

pub use kernel::{coefficient_integrand, p_kernel, raw_jacobi_integrand, vd_kernel, Slot};
pub use trials::{
    bracket_oracle_gap, jacobi_residual, nonlinear_jacobi_spot, random_test_function, skew_residual, trial_rng, OracleGap, Residual,
    SpotCheck, TrialSetup,
};

use crate::error::{Error, Result};
use crate::geometry::{BracketSpec, PointGeometry};
use crate::par;
use crate::schwartz::{Grid, TestFunction};
use crate::variational::{Covector, Functional, LinearFunctional, VdPlan};

/// Geometry sampled along `u` on every grid node.
#[derive(Clone, Debug)]
pub struct Along {
    pub points: Vec<PointGeometry>,
    pub ux: Vec<Vec<f64>>,
}

impl Along {
    pub fn new(spec: &BracketSpec, u: &TestFunction, grid: &Grid) -> Result<Self> {
        u.check_image(&spec.omega, 0.0)?;
        let jets = u.jets(grid, 1)?;
        let points = par::try_map_slice(&jets, |p| PointGeometry::new(spec, &p.values()))?;
        let ux = jets.iter().map(|p| p.first_derivatives()).collect();
        Ok(Self { points, ux })
    }

    pub fn n(&self) -> usize {
        self.points.first().map_or(0, PointGeometry::n)
    }

    /// `f̃ = d⁻¹(w^i_k u_x^k f_i)`.
    pub fn tilde(&self, f: &[Vec<f64>], grid: &Grid) -> Vec<f64> {
        let n = self.n();
        let s: Vec<f64> = (0..grid.len())
            .map(|x| {
                let p = &self.points[x];
                let mut v = 0.0;
                for i in 0..n {
                    for k in 0..n {
                        v += p.w[[i, k]] * self.ux[x][k] * f[i][x];
                    }
                }
                v
            })
            .collect();
        grid.dinv(&s)
    }

    fn slots(&self, v: &Covector, grid: &Grid) -> Result<Vec<Slot>> {
        let dv = v
            .derivative
            .as_ref()
            .ok_or_else(|| Error::MissingDerivative("P needs D_x of its argument".into()))?;
        let tilde = self.tilde(&v.values, grid);
        Ok((0..grid.len())
            .map(|x| Slot {
                v: v.values.iter().map(|c| c[x]).collect(),
                dv: dv.iter().map(|c| c[x]).collect(),
                tilde: tilde[x],
            })
            .collect())
    }

    /// `P^{ij} v_j` at every node.
    pub fn apply_p(&self, v: &Covector, grid: &Grid) -> Result<Vec<Vec<f64>>> {
        let slots = self.slots(v, grid)?;
        Ok(transpose(par::map_indices(grid.len(), |x| p_kernel(&self.points[x], &self.ux[x], &slots[x])), self.n()))
    }

    /// `δ{F,G}/δu^p` for linear `F`, `G` given by their coefficient covectors.
    pub fn vd_of_bracket(&self, f: &Covector, g: &Covector, grid: &Grid) -> Result<Vec<Vec<f64>>> {
        let (fs, gs) = (self.slots(f, grid)?, self.slots(g, grid)?);
        Ok(transpose(par::map_indices(grid.len(), |x| vd_kernel(&self.points[x], &self.ux[x], &fs[x], &gs[x])), self.n()))
    }

    /// `∫ Σ_cyc δ{F,G}/δu^p (P δH)^p` together with its coefficient-tensor
    /// form, both as grid samples.
    pub fn jacobi_integrands(&self, f: &Covector, g: &Covector, h: &Covector, grid: &Grid) -> Result<(Vec<f64>, Vec<f64>)> {
        let (fs, gs, hs) = (self.slots(f, grid)?, self.slots(g, grid)?, self.slots(h, grid)?);
        let both = par::map_indices(grid.len(), |x| {
            let (p, ux) = (&self.points[x], &self.ux[x]);
            (raw_jacobi_integrand(p, ux, &fs[x], &gs[x], &hs[x]), coefficient_integrand(p, ux, &fs[x], &gs[x], &hs[x]))
        });
        Ok(both.into_iter().unzip())
    }
}

fn transpose(rows: Vec<Vec<f64>>, n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| rows.iter().map(|r| r[i]).collect()).collect()
}

/// `δF/δu = α(x)` with its exact derivative.
pub fn linear_covector(f: &LinearFunctional, grid: &Grid) -> Covector {
    let n = f.fields();
    let values = (0..n).map(|i| grid.nodes().iter().map(|&x| f.coefficient(i, 0, x)).collect()).collect();
    let derivative = (0..n).map(|i| grid.nodes().iter().map(|&x| f.coefficient(i, 1, x)).collect()).collect();
    Covector { values, derivative: Some(derivative) }
}

pub fn pair(a: &Covector, b: &[Vec<f64>], grid: &Grid) -> f64 {
    a.pair(b, grid)
}

/// `{F,G}(u)` for general WNL functionals.
pub fn bracket(spec: &BracketSpec, f: &Functional, g: &Functional, u: &TestFunction, grid: &Grid) -> Result<f64> {
    let along = Along::new(spec, u, grid)?;
    let vf = VdPlan::new(f).sample(u, grid)?;
    let vg = VdPlan::new(g).sample(u, grid)?;
    Ok(vf.pair(&along.apply_p(&vg, grid)?, grid))
}

/// `{F,G}(u)` for linear functionals.
pub fn linear_bracket(along: &Along, f: &Covector, g: &Covector, grid: &Grid) -> Result<f64> {
    Ok(f.pair(&along.apply_p(g, grid)?, grid))
}
