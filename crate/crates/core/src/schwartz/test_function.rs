use serde::Serialize;

use super::{Grid, Omega, DEFAULT_EPS_TAIL};
use crate::error::{Error, Result};
use crate::expr::{JetPoint, JetVar};
use crate::par;

/// Default number of derivative closures generated per component.
pub const DEFAULT_ORDER: usize = 12;

/// `p(x - c) · exp(-a (x - c)^2)` with `p` given by ascending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaussTerm {
    pub poly: Vec<f64>,
    pub a: f64,
    pub c: f64,
}

impl GaussTerm {
    pub fn new(poly: Vec<f64>, a: f64, c: f64) -> Self {
        Self { poly, a, c }
    }

    /// `amp · exp(-a (x - c)^2)`.
    pub fn gaussian(amp: f64, a: f64, c: f64) -> Self {
        Self::new(vec![amp], a, c)
    }

    fn scaled(&self, t: f64) -> Self {
        Self::new(self.poly.iter().map(|p| p * t).collect(), self.a, self.c)
    }
}

fn horner(poly: &[f64], y: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, c| acc * y + c)
}

/// `q' - 2 a y q`.
fn next_poly(q: &[f64], a: f64) -> Vec<f64> {
    let mut out = vec![0.0; q.len() + 1];
    for (p, c) in q.iter().enumerate().skip(1) {
        out[p - 1] += p as f64 * c;
    }
    for (p, c) in q.iter().enumerate() {
        out[p + 1] -= 2.0 * a * c;
    }
    while out.len() > 1 && *out.last().unwrap() == 0.0 {
        out.pop();
    }
    out
}

/// Smallest `Y ≥ sqrt(deg / 2a)` (found by bisection) with
/// `Σ |c_p| Y^p e^{-aY²} < threshold`; past that radius the bound decreases.
fn tail_radius(poly: &[f64], a: f64, threshold: f64) -> f64 {
    let bound = |y: f64| -> f64 {
        let env = (-a * y * y).exp();
        poly.iter().enumerate().map(|(p, c)| c.abs() * y.powi(p as i32)).sum::<f64>() * env
    };
    let deg = poly.len().saturating_sub(1) as f64;
    let y0 = (deg / (2.0 * a)).sqrt();
    if bound(y0) < threshold {
        return y0;
    }
    let mut hi = y0.max(1.0);
    while bound(hi) >= threshold {
        hi *= 2.0;
    }
    let mut lo = y0.max(hi / 2.0).min(hi);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if bound(mid) < threshold {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// An element of the Schwartz space around a base point:
/// `u_j(x) = base_j + Σ_terms p(x - c) e^{-a (x - c)^2}`.
///
/// The base point is the constant loop of the pointed chart; it is zero for
/// charts containing the origin. Derivatives of every term are generated
/// as exact polynomial-Gaussian closures up to `order`.
#[derive(Clone, Debug, Serialize)]
pub struct TestFunction {
    base: Vec<f64>,
    components: Vec<Vec<GaussTerm>>,
    #[serde(skip)]
    derivs: Vec<Vec<Vec<Vec<f64>>>>,
    order: usize,
    l_cut: f64,
    eps_tail: f64,
}

impl PartialEq for TestFunction {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base && self.components == other.components && self.order == other.order
    }
}

impl TestFunction {
    pub fn new(base: Vec<f64>, components: Vec<Vec<GaussTerm>>) -> Result<Self> {
        Self::with_order(base, components, DEFAULT_ORDER, DEFAULT_EPS_TAIL)
    }

    pub fn with_order(base: Vec<f64>, components: Vec<Vec<GaussTerm>>, order: usize, eps_tail: f64) -> Result<Self> {
        if base.len() != components.len() {
            return Err(Error::Dimension(format!(
                "base point has {} entries but {} components given",
                base.len(),
                components.len()
            )));
        }
        for t in components.iter().flatten() {
            if !(t.a > 0.0 && t.a.is_finite()) || !t.c.is_finite() || t.poly.iter().any(|p| !p.is_finite()) {
                return Err(Error::Invalid(format!("Gaussian term needs a > 0 and finite data: {t:?}")));
            }
        }
        let derivs: Vec<Vec<Vec<Vec<f64>>>> = components
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|t| {
                        let mut qs = vec![if t.poly.is_empty() { vec![0.0] } else { t.poly.clone() }];
                        for k in 0..order {
                            let next = next_poly(&qs[k], t.a);
                            qs.push(next);
                        }
                        qs
                    })
                    .collect()
            })
            .collect();
        let mut l_cut: f64 = 0.0;
        for (terms, ds) in components.iter().zip(&derivs) {
            let threshold = eps_tail / terms.len().max(1) as f64;
            for (t, qs) in terms.iter().zip(ds) {
                for q in qs {
                    l_cut = l_cut.max(t.c.abs() + tail_radius(q, t.a, threshold));
                }
            }
        }
        Ok(Self { base, components, derivs, order, l_cut, eps_tail })
    }

    /// Builds the function and verifies that its image stays inside `omega`
    /// with the given margin.
    pub fn make(base: Vec<f64>, components: Vec<Vec<GaussTerm>>, omega: &Omega, margin: f64) -> Result<Self> {
        let u = Self::new(base, components)?;
        u.check_image(omega, margin)?;
        Ok(u)
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn components(&self) -> &[Vec<GaussTerm>] {
        &self.components
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Decay certificate: outside `[-L_cut, L_cut]` every component minus its
    /// base value, and every derivative up to `order`, is below `eps_tail`.
    pub fn l_cut(&self) -> f64 {
        self.l_cut
    }

    pub fn eps_tail(&self) -> f64 {
        self.eps_tail
    }

    /// `u_j^{(i)}(x)`.
    pub fn value(&self, j: usize, i: usize, x: f64) -> Result<f64> {
        if i > self.order {
            return Err(Error::OrderTooHigh { requested: i, available: self.order });
        }
        let mut s = if i == 0 { self.base[j] } else { 0.0 };
        for (t, qs) in self.components[j].iter().zip(&self.derivs[j]) {
            let y = x - t.c;
            s += horner(&qs[i], y) * (-t.a * y * y).exp();
        }
        Ok(s)
    }

    /// Exact jet `(x, u, u', …, u^{(maxorder)})`.
    pub fn jet(&self, x: f64, maxorder: usize) -> Result<JetPoint> {
        if maxorder > self.order {
            return Err(Error::OrderTooHigh { requested: maxorder, available: self.order });
        }
        let n = self.dim();
        let mut p = JetPoint::new(x, n, maxorder);
        for j in 0..n {
            let mut vals = vec![0.0; maxorder + 1];
            vals[0] = self.base[j];
            for (t, qs) in self.components[j].iter().zip(&self.derivs[j]) {
                let y = x - t.c;
                let env = (-t.a * y * y).exp();
                if env == 0.0 {
                    continue;
                }
                for (i, v) in vals.iter_mut().enumerate() {
                    *v += horner(&qs[i], y) * env;
                }
            }
            for (i, v) in vals.into_iter().enumerate() {
                p.set(JetVar::new(j, i), v);
            }
        }
        Ok(p)
    }

    /// Jets at every grid node.
    pub fn jets(&self, grid: &Grid, maxorder: usize) -> Result<Vec<JetPoint>> {
        if maxorder > self.order {
            return Err(Error::OrderTooHigh { requested: maxorder, available: self.order });
        }
        Ok(par::map_slice(grid.nodes(), |&x| self.jet(x, maxorder).expect("order checked")))
    }

    /// `u(x)` at every grid node, component-major.
    pub fn sample(&self, grid: &Grid, order: usize) -> Result<Vec<Vec<f64>>> {
        (0..self.dim())
            .map(|j| par::try_map_slice(grid.nodes(), |&x| self.value(j, order, x)))
            .collect()
    }

    /// `u + t·k` with the same base point.
    pub fn perturbed(&self, k: &TestFunction, t: f64) -> Result<Self> {
        if k.dim() != self.dim() {
            return Err(Error::Dimension("perturbation has a different field count".into()));
        }
        let components = self
            .components
            .iter()
            .zip(&k.components)
            .map(|(a, b)| a.iter().cloned().chain(b.iter().map(|t2| t2.scaled(t))).collect())
            .collect();
        Self::with_order(self.base.clone(), components, self.order.max(k.order), self.eps_tail)
    }

    /// Same function with a different number of generated derivatives.
    pub fn reordered(&self, order: usize) -> Result<Self> {
        Self::with_order(self.base.clone(), self.components.clone(), order, self.eps_tail)
    }

    /// Checks `u(x) ∈ Omega` with margin on a fine grid covering the support.
    pub fn check_image(&self, omega: &Omega, margin: f64) -> Result<()> {
        // The tails approach the base point, so it only has to lie in the
        // closure of the margin region.
        if let Some(c) = omega.constraints.iter().find(|c| c.distance(&self.base) < margin) {
            return Err(Error::ImageEscapesOmega { constraint: c.describe(), x: f64::INFINITY, point: self.base.clone() });
        }
        let narrowest = self.components.iter().flatten().map(|t| t.a).fold(0.0_f64, f64::max);
        if narrowest == 0.0 {
            return Ok(());
        }
        let step = (1.0 / narrowest.sqrt() / 20.0).max(2.0 * self.l_cut / 40000.0);
        let count = (2.0 * self.l_cut / step).ceil() as usize + 1;
        let fine = Grid::new(self.l_cut.max(1e-3), count.max(2))?;
        let hits = par::map_slice(fine.nodes(), |&x| {
            let z: Vec<f64> = (0..self.dim()).map(|j| self.value(j, 0, x).unwrap()).collect();
            omega.violated(&z, margin).map(|c| (c.describe(), x, z))
        });
        match hits.into_iter().flatten().next() {
            Some((constraint, x, point)) => Err(Error::ImageEscapesOmega { constraint, x, point }),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(amp: f64) -> TestFunction {
        TestFunction::new(vec![0.0], vec![vec![GaussTerm::gaussian(amp, 1.0, 0.0)]]).unwrap()
    }

    #[test]
    fn gaussian_jets() {
        let u = gauss(1.0);
        let p = u.jet(0.0, 2).unwrap();
        assert_eq!(p.get(JetVar::new(0, 0)), Some(1.0));
        assert_eq!(p.get(JetVar::new(0, 1)), Some(0.0));
        assert_eq!(p.get(JetVar::new(0, 2)), Some(-2.0));
        let v = TestFunction::new(vec![0.0], vec![vec![GaussTerm::new(vec![0.0, 1.0], 1.0, 0.0)]]).unwrap();
        let p = v.jet(0.0, 2).unwrap();
        assert_eq!((p.get(JetVar::new(0, 0)), p.get(JetVar::new(0, 1)), p.get(JetVar::new(0, 2))), (Some(0.0), Some(1.0), Some(0.0)));
        assert!(matches!(u.jet(0.0, 40), Err(Error::OrderTooHigh { .. })));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let u = TestFunction::new(vec![0.2], vec![vec![GaussTerm::new(vec![0.3, -0.5, 0.2], 0.7, 0.4), GaussTerm::gaussian(-0.4, 1.3, -1.1)]])
            .unwrap();
        let h = 1e-4;
        for x in [-2.0, -0.3, 0.0, 0.9, 2.5] {
            for i in 0..6 {
                let d = u.value(0, i + 1, x).unwrap();
                let fd = (-u.value(0, i, x + 2.0 * h).unwrap() + 8.0 * u.value(0, i, x + h).unwrap()
                    - 8.0 * u.value(0, i, x - h).unwrap()
                    + u.value(0, i, x - 2.0 * h).unwrap())
                    / (12.0 * h);
                assert!((d - fd).abs() <= 1e-8 * (1.0 + d.abs()), "x={x} i={i}: {d} vs {fd}");
            }
        }
    }

    #[test]
    fn decay_certificate_holds() {
        let u = TestFunction::new(vec![0.0], vec![vec![GaussTerm::new(vec![1.0, 2.0], 0.5, 1.0)]]).unwrap();
        let l = u.l_cut();
        assert!(l > 1.0 && l < 20.0, "{l}");
        for x in [l, l + 0.5, -l, -l - 3.0] {
            for i in 0..=u.order() {
                assert!(u.value(0, i, x).unwrap().abs() < 1e-14, "x={x} i={i}");
            }
        }
    }

    #[test]
    fn image_containment() {
        let interval = Omega::open_box(&[-1.0], &[1.0]);
        assert!(gauss(0.5).check_image(&interval, 0.0).is_ok());
        match gauss(2.0).check_image(&interval, 0.0) {
            Err(Error::ImageEscapesOmega { point, .. }) => assert!(point[0] >= 1.0),
            other => panic!("{other:?}"),
        }
        let chart = Omega::whole(2).with(vec![1.0, -1.0], 0.0);
        let u = TestFunction::make(
            vec![0.0, 0.0],
            vec![vec![GaussTerm::gaussian(0.3, 1.0, 0.0)], vec![GaussTerm::gaussian(-0.3, 1.0, 0.0)]],
            &chart,
            0.0,
        );
        assert!(u.is_ok(), "{u:?}");
        let pointed = TestFunction::make(
            vec![1.0, -1.0],
            vec![vec![GaussTerm::gaussian(-1.5, 1.0, 0.0)], vec![GaussTerm::gaussian(1.5, 1.0, 0.0)]],
            &chart,
            0.0,
        );
        assert!(matches!(pointed, Err(Error::ImageEscapesOmega { .. })));
    }
}
