#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use wnlpb_core::geometry::examples::{broken_gamma, constant_curvature, flat, printed_christoffel};
use wnlpb_core::geometry::*;
use wnlpb_core::schwartz::Omega;
use wnlpb_core::{JetExpr, Parser};

fn chart_samples(count: usize) -> Vec<Vec<f64>> {
    sample_points(&[0.6, -1.4], &[1.4, -0.6], &Omega::whole(2).with(vec![1.0, -1.0], 0.0), 0.2, count)
}

#[test]
fn flat_metric_has_no_connection() {
    let p = PointGeometry::new(&flat(&[0.0, 0.0]), &[0.3, -0.2]).unwrap();
    assert!(p.levi_civita.iter().all(|v| *v == 0.0));
    assert!(p.riemann.iter().all(|v| *v == 0.0));
    let r = gpc_check(&flat(&[0.0, 0.0]), &chart_samples(10), 1e-12, 1).unwrap();
    assert!(r.gpc_pass() && r.coefficients_pass());
}

#[test]
fn conformal_line_metric() {
    let g = vec![vec![JetExpr::parse("exp(u1)", 1).unwrap()]];
    let spec = BracketSpec::new(1, Omega::whole(1), g, None, vec![vec![JetExpr::zero()]]).unwrap();
    for z in [-1.0, 0.0, 2.0] {
        let p = PointGeometry::new(&spec, &[z]).unwrap();
        assert!((p.gamma[[0, 0, 0]] + 0.5).abs() < 1e-14);
        assert_eq!(p.riemann[[0, 0, 0, 0]], 0.0);
    }
}

#[test]
fn printed_christoffel_table_up_to_one_sign() {
    // Seven printed entries agree with the Levi-Civita connection; the
    // printed Γ^1_22 has the opposite sign.
    let (k, c1, c2, c3) = (1.3, 0.8, 0.4, 0.25);
    let spec = constant_curvature(k, c1, c2, c3);
    for z in chart_samples(50) {
        let p = PointGeometry::new(&spec, &z).unwrap();
        let t = printed_christoffel(k, c1, c2, c3, z[0], z[1]);
        for j in 0..2 {
            for s in 0..2 {
                for q in 0..2 {
                    let want = if (j, s, q) == (0, 1, 1) { -t[j][s][q] } else { t[j][s][q] };
                    assert!((p.gamma[[j, s, q]] - want).abs() <= 1e-9 * (1.0 + want.abs()), "{j}{s}{q} at {z:?}");
                }
            }
        }
    }
}

#[test]
fn constant_curvature_riemann_and_gpc() {
    for (k, c1, c2, c3) in [(1.0, 1.0, 0.0, 0.0), (2.0, 0.5, 0.3, 0.1)] {
        let spec = constant_curvature(k, c1, c2, c3);
        for z in chart_samples(20) {
            let p = PointGeometry::new(&spec, &z).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    for q in 0..2 {
                        for l in 0..2 {
                            let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                            let want = k * (d(i, q) * d(j, l) - d(i, l) * d(j, q));
                            assert!((p.riemann[[i, j, q, l]] - want).abs() <= 1e-8);
                        }
                    }
                }
            }
        }
        let r = gpc_check(&spec, &chart_samples(50), 1e-8, 9).unwrap();
        assert!(r.gpc_pass(), "{:?}", r.failures());
        assert!(r.coefficients_pass(), "{:?}", r.failures());
        assert!(r.condition("gpc1").unwrap().value <= 1e-12);
        assert!(r.condition("compatibility").unwrap().value <= 1e-9);
        assert!(r.bianchi <= 1e-9);
    }
}

#[test]
fn gauss_defect_is_two() {
    let spec = flat(&[1.0, 2.0]);
    let r = gpc_check(&spec, &chart_samples(10), 1e-8, 2).unwrap();
    assert!((r.condition("gpc2").unwrap().value - 2.0).abs() <= 1e-10);
    for c in ["gpc1", "gpc3", "gpc4", "m", "d", "e"] {
        assert_eq!(r.condition(c).unwrap().value, 0.0, "{c}");
    }
    let p = PointGeometry::new(&spec, &[0.0, 0.0]).unwrap();
    let b = p.coefficients(&[0.3, 0.1]).b;
    assert!((b[[0, 1, 0, 1]].abs() - 2.0).abs() <= 1e-12);
}

#[test]
fn gauss_defect_scales_quadratically() {
    let base = flat(&[1.0, 2.0]);
    let zs = chart_samples(5);
    let r1 = gpc_check(&base, &zs, 1e-8, 0).unwrap().condition("gpc2").unwrap().value;
    for lambda in [0.5, 3.0] {
        let r = gpc_check(&base.scale_w(lambda).unwrap(), &zs, 1e-8, 0).unwrap().condition("gpc2").unwrap().value;
        assert!((r - lambda * lambda * r1).abs() <= 1e-12 * r);
    }
}

#[test]
fn torsion_shows_in_gpc1_and_d_proportionally() {
    let zs = chart_samples(10);
    let get = |eps: f64, name: &str| gpc_check(&broken_gamma(eps), &zs, 1e-8, 0).unwrap().condition(name).unwrap().value;
    for name in ["gpc1", "d"] {
        let ratio = get(1e-2, name) / get(1e-3, name);
        assert!((ratio - 10.0).abs() <= 0.5, "{name}: {ratio}");
    }
    assert!(get(1e-2, "compatibility") <= 1e-15);
    let audit = equivalence_audit(&broken_gamma(1e-2), &zs, 1e-8, 0).unwrap();
    assert!(audit.mismatches.is_empty() && audit.both_fail == zs.len());
}

#[test]
fn supplied_gamma_is_compared_with_levi_civita() {
    let spec = constant_curvature(1.0, 1.0, 0.0, 0.0);
    let p = Parser::new(2);
    let e = |s: &str| p.parse(s).unwrap();
    // The printed table with the sign of Γ^1_22 corrected, k = c1 = 1.
    let gamma = vec![
        vec![vec![e("1/(v - u)"), e("1/(u - v)")], vec![e("1/(u - v)"), e("-2/(u - v)")]],
        vec![vec![e("1/(2*(u - v))"), e("1/(v - u)")], vec![e("1/(v - u)"), e("1/(u - v)")]],
    ];
    let supplied = BracketSpec::new(2, spec.omega.clone(), spec.g().clone(), Some(gamma.clone()), spec.w().clone()).unwrap();
    let r = gpc_check(&supplied, &chart_samples(20), 1e-8, 0).unwrap();
    assert!(r.condition("levi_civita").unwrap().value <= 1e-12);
    assert!(r.gpc_pass() && r.coefficients_pass(), "{:?}", r.failures());
    let mut wrong = gamma;
    wrong[0][1][1] = e("2/(u - v)");
    let bad = BracketSpec::new(2, spec.omega.clone(), spec.g().clone(), Some(wrong), spec.w().clone()).unwrap();
    let r = gpc_check(&bad, &chart_samples(20), 1e-8, 0).unwrap();
    assert!(!r.condition("levi_civita").unwrap().pass);
}

#[test]
fn singular_metric_is_reported() {
    let spec = constant_curvature(1.0, 1.0, 0.0, 0.0);
    assert!(matches!(PointGeometry::new(&spec, &[0.5, 0.5]), Err(wnlpb_core::Error::SingularMetric { .. })));
}

#[test]
fn equivalence_on_the_example() {
    let audit = equivalence_audit(&constant_curvature(1.0, 1.0, 0.0, 0.0), &chart_samples(50), 1e-8, 4).unwrap();
    assert_eq!((audit.both_pass, audit.mismatches.len()), (50, 0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn derived_connection_is_symmetric_compatible_and_bianchi(
        a in 0.5f64..2.0, b in -0.5f64..0.5, c in 0.5f64..2.0, q in -0.3f64..0.3,
        u in -0.5f64..0.5, v in -0.5f64..0.5,
    ) {
        let p = Parser::new(2);
        let g = vec![
            vec![p.parse(&format!("{a} + {q}*u^2")).unwrap(), p.parse(&format!("{b}*u*v")).unwrap()],
            vec![p.parse(&format!("{b}*u*v")).unwrap(), p.parse(&format!("{c}*exp({q}*v)")).unwrap()],
        ];
        let w = vec![vec![JetExpr::zero(); 2]; 2];
        let spec = BracketSpec::new(2, Omega::whole(2), g, None, w).unwrap();
        let r = point_residuals(&spec, &[u, v], &[0.4, -0.7]).unwrap();
        prop_assert!(r.get("gpc1") <= 1e-12);
        prop_assert!(r.get("compatibility") <= 1e-9);
        prop_assert!(r.bianchi <= 1e-9);
    }
}
