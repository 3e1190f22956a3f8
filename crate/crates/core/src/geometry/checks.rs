use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{BracketSpec, GammaSource, PointGeometry};
use crate::error::{Error, Result};
use crate::par;
use crate::schwartz::Omega;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let (mut inv, mut f) = (0.0, 1.0 / b);
    while i > 0 {
        inv += (i % base as u64) as f64 * f;
        i /= base as u64;
        f /= b;
    }
    inv
}

/// Halton points in the box `[lo, hi]` whose depth in `omega` exceeds
/// `margin`; at most `100·count` candidates are tried.
pub fn sample_points(lo: &[f64], hi: &[f64], omega: &Omega, margin: f64, count: usize) -> Vec<Vec<f64>> {
    assert!(lo.len() <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
    let mut out = Vec::with_capacity(count);
    for i in 1..=(100 * count as u64) {
        if out.len() == count {
            break;
        }
        let z: Vec<f64> = lo.iter().zip(hi).enumerate().map(|(d, (a, b))| a + (b - a) * radical_inverse(i, PRIMES[d])).collect();
        if omega.depth(&z) > margin {
            out.push(z);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    /// Maximum residual over the samples (minimum relative determinant for
    /// `nondegeneracy`).
    pub value: f64,
    pub worst_point: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryReport {
    pub samples: usize,
    pub gamma_source: GammaSource,
    pub conditions: Vec<Condition>,
    pub coefficients: Vec<Condition>,
    /// Cyclic sum of the curvature over its last three indices; informative
    /// only, and only meaningful for torsion-free Γ.
    pub bianchi: f64,
}

impl GeometryReport {
    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().chain(&self.coefficients).find(|c| c.name == name)
    }

    pub fn gpc_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn coefficients_pass(&self) -> bool {
        self.coefficients.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Condition> {
        self.conditions.iter().chain(&self.coefficients).filter(|c| !c.pass).collect()
    }
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Pointwise residuals of one sample, keyed like the report.
#[derive(Clone, Debug)]
pub struct PointResiduals {
    pub z: Vec<f64>,
    pub values: Vec<(&'static str, f64)>,
    pub bianchi: f64,
}

impl PointResiduals {
    pub fn get(&self, name: &str) -> f64 {
        self.values.iter().find(|(k, _)| *k == name).map_or(0.0, |(_, v)| *v)
    }
}

pub const GPC: [&str; 4] = ["gpc1", "gpc2", "gpc3", "gpc4"];
pub const JACOBI_COEFFICIENTS: [&str; 4] = ["b", "d", "e", "m"];

/// All residuals at one point; `ux` is the tangent used for `a` and `c`.
pub fn point_residuals(spec: &BracketSpec, z: &[f64], ux: &[f64]) -> Result<PointResiduals> {
    let p = PointGeometry::new(spec, z)?;
    let n = p.n();
    let scale: f64 = (0..n).map(|i| (0..n).map(|j| p.g[[i, j]].powi(2)).sum::<f64>().sqrt()).product();
    let sym = max_abs(&(&p.g - &p.g.t()));
    let gpc1 = max_abs(&(&p.gamma - &p.gamma.view().permuted_axes([0, 2, 1])));
    let gpc2 = max_abs(&p.gauss_defect());
    let wg = p.w.dot(&p.g);
    let gpc3 = max_abs(&(&wg - &wg.t()));
    let nw = p.nabla_w();
    let gpc4 = max_abs(&(&nw - &nw.view().permuted_axes([2, 1, 0])));
    let compat = max_abs(&p.compatibility());
    let lc = max_abs(&(&p.gamma - &p.levi_civita));
    let c = p.coefficients(ux);
    let mut bianchi: f64 = 0.0;
    // Lower the first index: R_s^j_{pk} = g_{si} R^{ij}_{pk}.
    for j in 0..n {
        for s in 0..n {
            for q in 0..n {
                for k in 0..n {
                    let low = |s: usize, q: usize, k: usize| -> f64 { (0..n).map(|i| p.g_lower[[s, i]] * p.riemann[[i, j, q, k]]).sum() };
                    bianchi = bianchi.max((low(s, q, k) + low(q, k, s) + low(k, s, q)).abs());
                }
            }
        }
    }
    let values = vec![
        ("g_symmetry", sym),
        ("nondegeneracy", p.det.abs() / scale),
        ("compatibility", compat),
        ("levi_civita", lc),
        ("gpc1", gpc1),
        ("gpc2", gpc2),
        ("gpc3", gpc3),
        ("gpc4", gpc4),
        ("a", max_abs(&c.a)),
        ("b", max_abs(&c.b)),
        ("c", max_abs(&c.c)),
        ("d", max_abs(&c.d)),
        ("e", max_abs(&c.e)),
        ("m", max_abs(&c.m)),
    ];
    Ok(PointResiduals { z: z.to_vec(), values, bianchi })
}

/// Random tangent vectors in `[-1, 1]^n`, one per sample, from `seed`.
pub fn tangents(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect()
}

pub fn residuals(spec: &BracketSpec, samples: &[Vec<f64>], seed: u64) -> Result<Vec<PointResiduals>> {
    if samples.is_empty() {
        return Err(Error::Invalid("no sample points inside the chart".into()));
    }
    let ux = tangents(spec.n(), samples.len(), seed);
    par::try_map_indices(samples.len(), |i| point_residuals(spec, &samples[i], &ux[i]))
}

/// Aggregates pointwise residuals; `tol` applies to every residual.
pub fn gpc_check(spec: &BracketSpec, samples: &[Vec<f64>], tol: f64, seed: u64) -> Result<GeometryReport> {
    let rs = residuals(spec, samples, seed)?;
    Ok(aggregate(spec, &rs, tol))
}

pub fn aggregate(spec: &BracketSpec, rs: &[PointResiduals], tol: f64) -> GeometryReport {
    let worst = |name: &str, minimize: bool| -> Condition {
        let pick = rs
            .iter()
            .map(|r| (r.get(name), &r.z))
            .reduce(|a, b| if (minimize && b.0 < a.0) || (!minimize && b.0 > a.0) { b } else { a })
            .unwrap();
        let pass = if minimize { pick.0 > super::SINGULAR_THRESHOLD } else { pick.0 <= tol };
        let tolerance = if minimize { super::SINGULAR_THRESHOLD } else { tol };
        Condition { name: name.into(), value: pick.0, worst_point: pick.1.clone(), tolerance, pass }
    };
    let mut conditions = vec![worst("g_symmetry", false), worst("nondegeneracy", true), worst("compatibility", false)];
    if spec.source() == GammaSource::Supplied {
        conditions.push(worst("levi_civita", false));
    }
    conditions.extend(GPC.iter().map(|c| worst(c, false)));
    let coefficients = ["a", "b", "c", "d", "e", "m"].iter().map(|c| worst(c, false)).collect();
    GeometryReport {
        samples: rs.len(),
        gamma_source: spec.source(),
        conditions,
        coefficients,
        bianchi: rs.iter().map(|r| r.bianchi).fold(0.0, f64::max),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Mismatch {
    pub point: Vec<f64>,
    pub coefficients: Vec<(String, f64)>,
    pub gpc: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceAudit {
    pub samples: usize,
    pub both_pass: usize,
    pub both_fail: usize,
    pub mismatches: Vec<Mismatch>,
}

/// Checks `(b, d, e, m ≤ tol) ⇔ (GPC:1–4 ≤ tol)` point by point.
pub fn equivalence_audit(spec: &BracketSpec, samples: &[Vec<f64>], tol: f64, seed: u64) -> Result<EquivalenceAudit> {
    let rs = residuals(spec, samples, seed)?;
    let mut audit = EquivalenceAudit { samples: rs.len(), both_pass: 0, both_fail: 0, mismatches: Vec::new() };
    for r in &rs {
        let lhs = JACOBI_COEFFICIENTS.iter().all(|c| r.get(c) <= tol);
        let rhs = GPC.iter().all(|c| r.get(c) <= tol);
        match (lhs, rhs) {
            (true, true) => audit.both_pass += 1,
            (false, false) => audit.both_fail += 1,
            _ => audit.mismatches.push(Mismatch {
                point: r.z.clone(),
                coefficients: JACOBI_COEFFICIENTS.iter().map(|c| (c.to_string(), r.get(c))).collect(),
                gpc: GPC.iter().map(|c| (c.to_string(), r.get(c))).collect(),
            }),
        }
    }
    Ok(audit)
}
