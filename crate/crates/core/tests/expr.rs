use proptest::prelude::*;
use wnlpb_core::schwartz::{GaussTerm, TestFunction};
use wnlpb_core::{Func, JetExpr, JetPoint, JetVar};

const FIELDS: usize = 2;
const ORDER: usize = 2;

fn leaf() -> impl Strategy<Value = JetExpr> {
    prop_oneof![
        (-3.0f64..3.0).prop_map(|c| JetExpr::Const((c * 8.0).round() / 8.0)),
        Just(JetExpr::X),
        (0..FIELDS, 0..=ORDER).prop_map(|(j, i)| JetExpr::var(j, i)),
    ]
}

/// Trees that evaluate everywhere: denominators are `1 + b²`, no sqrt or ln.
fn expr() -> impl Strategy<Value = JetExpr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(JetExpr::Sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(JetExpr::Product),
            inner.clone().prop_map(|a| -a),
            (inner.clone(), 1i32..4).prop_map(|(a, k)| a.powi(k)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| JetExpr::Div(Box::new(a), Box::new(JetExpr::one() + b.powi(2)))),
            (inner.clone(), prop_oneof![Just(Func::Sin), Just(Func::Cos)]).prop_map(|(a, f)| a.apply(f)),
            inner.prop_map(|a| (JetExpr::Const(0.1) * a).exp()),
        ]
    })
}

fn point() -> impl Strategy<Value = JetPoint> {
    (-1.0f64..1.0, prop::collection::vec(-1.0f64..1.0, FIELDS * (ORDER + 1))).prop_map(|(x, vs)| {
        let mut p = JetPoint::new(x, FIELDS, ORDER + 2);
        for j in 0..FIELDS {
            for i in 0..=ORDER {
                p.set(JetVar::new(j, i), vs[j * (ORDER + 1) + i]);
            }
        }
        p
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_round_trips(e in expr(), p in point()) {
        let printed = e.to_string();
        let back = JetExpr::parse(&printed, FIELDS).unwrap();
        prop_assert_eq!(back.to_string(), printed);
        prop_assert!(close(back.eval(&p).unwrap(), e.eval(&p).unwrap(), 1e-12));
    }

    #[test]
    fn partials_match_central_differences(e in expr(), p in point(), j in 0..FIELDS, i in 0..=ORDER) {
        let v = JetVar::new(j, i);
        let exact = e.d_partial(v).eval(&p).unwrap();
        let h = 1e-5;
        let at = |t: f64| e.eval(&p.clone().with(v, p.get(v).unwrap() + t)).unwrap();
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let scale = 1.0 + e.eval(&p).unwrap().abs();
        prop_assert!((exact - fd).abs() <= 1e-6 * (scale + exact.abs()), "{} vs {}", exact, fd);
    }

    #[test]
    fn mixed_partials_commute(e in expr(), p in point(), a in 0..FIELDS, b in 0..=ORDER) {
        let (va, vb) = (JetVar::new(a, b), JetVar::new(1 - a, 0));
        let ab = e.d_partial(va).d_partial(vb).eval(&p).unwrap();
        let ba = e.d_partial(vb).d_partial(va).eval(&p).unwrap();
        prop_assert!(close(ab, ba, 1e-10));
    }

    #[test]
    fn simplify_is_idempotent_and_value_preserving(e in expr(), p in point()) {
        let s = e.simplify();
        prop_assert_eq!(s.simplify(), s.clone());
        prop_assert!(close(s.eval(&p).unwrap(), e.eval(&p).unwrap(), 1e-10));
    }

    #[test]
    fn total_derivative_follows_a_curve(e in expr(), x in -1.5f64..1.5) {
        let u = TestFunction::new(
            vec![0.1, -0.2],
            vec![vec![GaussTerm::new(vec![0.5, 0.3], 0.8, 0.2)], vec![GaussTerm::new(vec![-0.4], 1.2, -0.3)]],
        )
        .unwrap();
        let along = |t: f64| e.eval(&u.jet(t, ORDER + 1).unwrap()).unwrap();
        let h = 1e-4;
        let fd = (along(x + h) - along(x - h)) / (2.0 * h);
        let exact = e.d_total().eval(&u.jet(x, ORDER + 1).unwrap()).unwrap();
        prop_assert!((exact - fd).abs() <= 1e-5 * (1.0 + exact.abs() + along(x).abs()), "{} vs {}", exact, fd);
    }
}
