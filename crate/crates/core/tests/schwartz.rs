use statrs::function::erf::erf;
use wnlpb_core::schwartz::{GaussTerm, Grid, Omega, TestFunction};

fn sample(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    grid.nodes().iter().map(|&x| f(x)).collect()
}

#[test]
fn gaussian_integral() {
    let g = Grid::default();
    let q = g.integrate(&sample(&g, |x| (-x * x).exp()));
    assert!((q.value - std::f64::consts::PI.sqrt()).abs() <= 1e-10);
    assert!(q.error.unwrap() <= 1e-10);
    assert_eq!(g.integrate(&vec![0.0; g.len()]).value, 0.0);
    assert!(g.integrate(&sample(&g, |x| x * (-x * x).exp())).value.abs() <= 1e-12);
}

#[test]
fn dinv_matches_error_function() {
    let g = Grid::default();
    let d = g.dinv(&sample(&g, |x| (-x * x).exp()));
    let worst = g
        .nodes()
        .iter()
        .zip(&d)
        .map(|(&x, v)| (v - 0.5 * std::f64::consts::PI.sqrt() * erf(x)).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-9, "{worst}");
    assert!(d[g.len() / 2].abs() <= 1e-12);
    assert!(g.dinv(&vec![0.0; g.len()]).iter().all(|v| *v == 0.0));
}

#[test]
fn dinv_is_an_antiderivative() {
    let g = Grid::default();
    let f = sample(&g, |x| (1.0 + x - 0.3 * x * x) * (-0.8 * (x - 0.5).powi(2)).exp());
    let d = g.differentiate(&g.dinv(&f));
    let worst = d.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn edge_limits() {
    let g = Grid::default();
    let f = sample(&g, |x| (2.0 - x) * (-(x + 1.0).powi(2)).exp());
    let total = g.integrate(&f).value;
    let d = g.dinv(&f);
    assert!((d[0] + 0.5 * total).abs() <= 1e-8);
    assert!((d[g.len() - 1] - 0.5 * total).abs() <= 1e-8);
}

#[test]
fn quadrature_converges() {
    let exact = std::f64::consts::PI.sqrt() / 4.0;
    let mut last = f64::INFINITY;
    for m in [33, 65, 129, 257, 513] {
        let g = Grid::new(12.0, m).unwrap();
        let err = (g.integrate(&sample(&g, |x| (-16.0 * x * x).exp())).value - exact).abs();
        assert!(err * 4.0 <= last || err < 1e-14, "m={m} err={err} last={last}");
        last = err;
    }
}

#[test]
fn product_rule_for_two_antiderivatives() {
    let g = Grid::default();
    let f = sample(&g, |x| (-(x - 0.7).powi(2)).exp());
    let h = sample(&g, |x| x * (-0.5 * x * x).exp() + 0.3 * (-2.0 * (x + 1.0).powi(2)).exp());
    let (df, dh) = (g.dinv(&f), g.dinv(&h));
    let xi: Vec<f64> = df.iter().zip(&dh).map(|(a, b)| a * b).collect();
    let rhs: Vec<f64> = (0..g.len()).map(|k| df[k] * h[k] + f[k] * dh[k]).collect();
    let lhs = g.differentiate(&xi);
    let worst = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
    assert!((xi[g.len() - 1] - xi[0]).abs() <= 1e-8);
    let closure: f64 = (0..g.len())
        .filter(|&k| g.nodes()[k].abs() > 8.0)
        .map(|k| (f[k] * dh[k]).abs() - 0.5 * g.integrate(&h).value.abs() * f[k].abs() * (1.0 + 1e-9))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(closure <= 1e-15);
}

#[test]
fn test_function_image_examples() {
    let interval = Omega::open_box(&[-1.0], &[1.0]);
    assert!(TestFunction::make(vec![0.0], vec![vec![GaussTerm::gaussian(0.5, 1.0, 0.0)]], &interval, 0.0).is_ok());
    assert!(TestFunction::make(vec![0.0], vec![vec![GaussTerm::gaussian(2.0, 1.0, 0.0)]], &interval, 0.0).is_err());
    let chart = Omega::whole(2).with(vec![1.0, -1.0], 0.0);
    let u = TestFunction::make(
        vec![0.0, 0.0],
        vec![vec![GaussTerm::gaussian(0.3, 1.0, 0.0)], vec![GaussTerm::gaussian(-0.3, 1.0, 0.0)]],
        &chart,
        0.0,
    )
    .unwrap();
    let far = u.jet(u.l_cut() + 1.0, 4).unwrap();
    assert!(far.values().iter().chain(far.first_derivatives().iter()).all(|v| v.abs() < 1e-14));
}
