use isocap::numerics::{
    classify_improper, generalized_left_inverse, integrate_adaptive, log_space, stieltjes_integrate, Convergence,
    SingularEnd, StieltjesWeight, TableKind, Tabulated, PROPER_REL_TOL,
};
use proptest::prelude::*;

#[test]
fn power_integrals_match_closed_form() {
    for e in [-0.9, -0.5, 0.0, 0.7, 2.0, 5.5] {
        let (a, b) = (0.3f64, 2.5f64);
        let exact = (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0);
        let v = integrate_adaptive(|x: f64| x.powf(e), a, b, PROPER_REL_TOL).unwrap();
        assert!((v - exact).abs() <= 1e-8 * exact.abs(), "e = {e}: {v} vs {exact}");
    }
}

#[test]
fn improper_threshold_grid() {
    for e in [-1.5, -1.2, -1.05, -0.95, -0.5, 0.0] {
        let v = classify_improper(|s: f64| s.powf(e), 0.0, 1.0, SingularEnd::Left).unwrap();
        let expected = if e > -1.0 { Convergence::Converges } else { Convergence::Diverges };
        assert_eq!(v.status, expected, "e = {e}");
        if expected == Convergence::Converges {
            let exact = 1.0 / (e + 1.0);
            assert!((v.value - exact).abs() < 1e-5 * exact, "e = {e}: {} vs {exact}", v.value);
        }
    }
    // The same integrand written around the right end.
    let v = classify_improper(|s: f64| (1.0 - s).powf(-0.5), 0.0, 1.0, SingularEnd::Right).unwrap();
    assert_eq!(v.status, Convergence::Converges);
    assert!((v.value - 2.0).abs() < 1e-5);
}

#[test]
fn log_factor_decides_on_the_threshold() {
    // 1/(s log^b(1/s)) converges iff b > 1; b = 1 sits on the log threshold.
    let f = |b: f64| move |s: f64| 1.0 / (s * (1.0 / s).ln().powf(b));
    let status = |b: f64| classify_improper(f(b), 0.0, 0.5, SingularEnd::Left).unwrap().status;
    assert_eq!(status(2.0), Convergence::Converges);
    assert_eq!(status(0.5), Convergence::Diverges);
    assert_eq!(status(1.0), Convergence::Indeterminate);
}

#[test]
fn stieltjes_with_unit_density_is_plain_integration() {
    let w = StieltjesWeight::density(|_| 1.0);
    for (a, b) in [(0.0, 1.0), (0.1, 3.0), (1e-3, 0.5)] {
        let g = |x: f64| (3.0 * x).sin() + x * x;
        let s = stieltjes_integrate(g, &w, a, b).unwrap();
        let i = integrate_adaptive(g, a, b, PROPER_REL_TOL).unwrap();
        assert!((s - i).abs() <= 1e-9 * i.abs().max(1.0), "{s} vs {i}");
    }
}

#[test]
fn stieltjes_from_phi_is_a_riemann_stieltjes_sum() {
    // d(-D phi) with phi(r) = 1/r: density 1/r^2.
    let w = StieltjesWeight::from_phi(|r| 1.0 / r);
    let (a, b) = (0.2, 1.0);
    let g = |r: f64| r.cos();
    let s = stieltjes_integrate(g, &w, a, b).unwrap();
    let n = 200_000;
    let h = (b - a) / n as f64;
    let oracle: f64 = (0..n)
        .map(|i| {
            let (r0, r1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            g(0.5 * (r0 + r1)) * (1.0 / r0 - 1.0 / r1)
        })
        .sum();
    assert!((s - oracle).abs() < 1e-6 * oracle, "{s} vs {oracle}");
}

#[test]
fn left_inverse_of_tabulated_step() {
    let t = Tabulated::new(vec![0.0, 1.0, 2.0], vec![1.0, 3.0, 4.0], TableKind::Step);
    assert_eq!(t.eval(0.5), 1.0);
    assert_eq!(t.eval(1.0), 3.0);
    let inv = t.left_inverse(2.0);
    assert!(!inv.below_range && !inv.above_range);
    assert!(inv.value >= 0.0 && inv.value <= 1.0);
}

#[test]
fn grids_are_strictly_increasing() {
    let g = log_space(1e-6, 0.5, 100);
    assert_eq!(g.len(), 100);
    assert!((g[0] - 1e-6).abs() < 1e-20 && (g[99] - 0.5).abs() < 1e-15);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
}

proptest! {
    #[test]
    fn integration_is_linear(
        e1 in 0.0f64..4.0,
        e2 in 0.0f64..4.0,
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        a in 0.05f64..1.0,
        len in 0.1f64..3.0,
    ) {
        let b = a + len;
        let tol = PROPER_REL_TOL;
        let f = |x: f64| x.powf(e1);
        let g = |x: f64| x.powf(e2);
        let combo = integrate_adaptive(|x| alpha * f(x) + beta * g(x), a, b, tol).unwrap();
        let i_f = integrate_adaptive(f, a, b, tol).unwrap();
        let i_g = integrate_adaptive(g, a, b, tol).unwrap();
        let sep = alpha * i_f + beta * i_g;
        let scale = alpha.abs() * i_f.abs() + beta.abs() * i_g.abs();
        prop_assert!((combo - sep).abs() <= 2.0 * tol * scale.max(1e-300) + 1e-14, "{} vs {}", combo, sep);
    }

    #[test]
    fn left_inverse_undoes_increasing_functions(k in 0.2f64..5.0, c in 0.0f64..2.0, x in 0.01f64..0.99) {
        let f = |s: f64| s.powf(k) + c * 0.1 * s;
        let inv = generalized_left_inverse(f, 0.0, 1.0, f(x));
        prop_assert!((inv.value - x).abs() < 1e-9, "{} vs {}", inv.value, x);
    }
}
