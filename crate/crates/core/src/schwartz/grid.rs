use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// A quadrature value with its Richardson error estimate (half-resolution
/// comparison); `None` when the grid has no half-resolution subgrid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: Option<f64>,
}

/// Uniform grid on `[-L, L]` with `m` nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    l: f64,
    m: usize,
    h: f64,
    nodes: Vec<f64>,
}

pub const DEFAULT_L: f64 = 12.0;
pub const DEFAULT_M: usize = 4097;
pub const DEFAULT_EPS_TAIL: f64 = 1e-14;

impl Default for Grid {
    fn default() -> Self {
        Grid::new(DEFAULT_L, DEFAULT_M).unwrap()
    }
}

impl Grid {
    pub fn new(l: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {m}")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("half-width must be positive, got {l}")));
        }
        let h = 2.0 * l / (m - 1) as f64;
        let nodes = (0..m).map(|k| -l + 2.0 * l * k as f64 / (m - 1) as f64).collect();
        Ok(Self { l, m, h, nodes })
    }

    pub fn half_width(&self) -> f64 {
        self.l
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn check(&self, f: &[f64]) {
        assert_eq!(f.len(), self.m, "samples do not match grid");
    }

    fn trapezoid(f: &[f64], stride: usize, h: f64) -> f64 {
        let last = f.len() - 1;
        let mut s: CompensatedSum = (0..=last).step_by(stride).map(|k| f[k]).collect();
        s.add(-0.5 * (f[0] + f[last]));
        s.value() * h
    }

    /// Composite trapezoid value of `∫ f` with a half-resolution Richardson
    /// error estimate.
    pub fn integrate(&self, f: &[f64]) -> Quadrature {
        self.check(f);
        let value = Self::trapezoid(f, 1, self.h);
        let error = (self.m >= 3 && (self.m - 1) % 2 == 0).then(|| {
            let coarse = Self::trapezoid(f, 2, 2.0 * self.h);
            (value - coarse).abs() / 3.0
        });
        Quadrature { value, error }
    }

    /// Cumulative integral `∫_{-L}^{x_k} f`, sixth order in the interior.
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        self.check(f);
        let m = self.m;
        let mut out = vec![0.0; m];
        let mut acc = CompensatedSum::default();
        for k in 0..m - 1 {
            let piece = if m < 6 {
                0.5 * (f[k] + f[k + 1])
            } else {
                let start = k.saturating_sub(2).min(m - 6);
                let w = &interval_weights()[k - start];
                (0..6).map(|j| w[j] * f[start + j]).sum::<f64>()
            };
            acc.add(piece * self.h);
            out[k + 1] = acc.value();
        }
        out
    }

    /// `d⁻¹(f)(x) = ½(∫_{-∞}^x f − ∫_x^∞ f)` on the grid.
    pub fn dinv(&self, f: &[f64]) -> Vec<f64> {
        let mut c = self.cumulative(f);
        let half = 0.5 * c[self.m - 1];
        for v in &mut c {
            *v -= half;
        }
        c
    }

    /// Sixth-order finite-difference derivative of sampled data. Used only
    /// by checks; the engine never differentiates samples.
    pub fn differentiate(&self, f: &[f64]) -> Vec<f64> {
        self.check(f);
        let m = self.m;
        if m < 7 {
            return (0..m)
                .map(|k| {
                    let (a, b) = (k.saturating_sub(1), (k + 1).min(m - 1));
                    (f[b] - f[a]) / ((b - a) as f64 * self.h)
                })
                .collect();
        }
        (0..m)
            .map(|k| {
                let start = k.saturating_sub(3).min(m - 7);
                let w = derivative_weights(k - start);
                (0..7).map(|j| w[j] * f[start + j]).sum::<f64>() / self.h
            })
            .collect()
    }
}

/// Solves `Σ_j w_j t_j^p = rhs_p`, `t_j = j - offset`, for `p < len`.
fn moment_weights(len: usize, offset: usize, rhs: impl Fn(usize) -> f64) -> Vec<f64> {
    let a = DMatrix::from_fn(len, len, |p, j| (j as f64 - offset as f64).powi(p as i32));
    let b = DVector::from_fn(len, |p, _| rhs(p));
    let x = a.lu().solve(&b).expect("Vandermonde system is regular");
    x.iter().copied().collect()
}

/// Weights for `∫_{x_k}^{x_{k+1}} f / h` from six consecutive nodes, indexed
/// by the position of `x_k` inside the stencil.
fn interval_weights() -> &'static [Vec<f64>; 5] {
    static W: OnceLock<[Vec<f64>; 5]> = OnceLock::new();
    W.get_or_init(|| std::array::from_fn(|pos| moment_weights(6, pos, |p| 1.0 / (p + 1) as f64)))
}

fn derivative_weights(pos: usize) -> &'static [f64] {
    static W: OnceLock<[Vec<f64>; 7]> = OnceLock::new();
    &W.get_or_init(|| std::array::from_fn(|pos| moment_weights(7, pos, |p| if p == 1 { 1.0 } else { 0.0 })))[pos]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_rule_matches_closed_form() {
        let w = &interval_weights()[2];
        let expect = [11.0, -93.0, 802.0, 802.0, -93.0, 11.0].map(|v| v / 1440.0);
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{w:?}");
        }
    }

    #[test]
    fn small_grids() {
        assert!(Grid::new(1.0, 1).is_err());
        assert!(Grid::new(-1.0, 10).is_err());
        let g = Grid::new(1.0, 2).unwrap();
        assert_eq!(g.integrate(&[1.0, 1.0]).value, 2.0);
        assert_eq!(g.integrate(&[1.0, 1.0]).error, None);
        assert_eq!(g.dinv(&[1.0, 1.0]), vec![-1.0, 1.0]);
    }

    #[test]
    fn polynomials_integrate_exactly() {
        let g = Grid::new(1.0, 11).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| x.powi(5) - 2.0 * x.powi(4) + x).collect();
        let c = g.cumulative(&f);
        for (k, x) in g.nodes().iter().enumerate() {
            let exact = (x.powi(6) - 1.0) / 6.0 - 2.0 * (x.powi(5) + 1.0) / 5.0 + (x * x - 1.0) / 2.0;
            assert!((c[k] - exact).abs() < 1e-13, "{k}");
        }
        let d = g.differentiate(&f);
        for (k, x) in g.nodes().iter().enumerate() {
            assert!((d[k] - (5.0 * x.powi(4) - 8.0 * x.powi(3) + 1.0)).abs() < 1e-11);
        }
    }
}
