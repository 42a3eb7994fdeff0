use isocap::domains::{
    catalog, condenser_capacity_1d, condenser_capacity_radial, lambda_iso, nu_from_lambda, nu_p, DomainSpec, Exactness,
    NuModel, Profile,
};
use isocap::numerics::{lin_space, log_space};

fn catalog_instances() -> Vec<(DomainSpec, Vec<f64>)> {
    vec![
        (DomainSpec::ball(2), vec![1.5, 2.0]),
        (DomainSpec::ball(3), vec![1.5, 2.0, 3.0]),
        (DomainSpec::holder(2, 0.5), vec![1.5, 2.0]),
        (DomainSpec::gamma_john(2, 1.5), vec![1.5, 2.0]),
        (DomainSpec::cusp(2, Profile::power(2.0)), vec![1.5, 2.0, 3.0]),
        (DomainSpec::cusp(3, Profile::power(1.5)), vec![2.0]),
        (DomainSpec::funnel(2, Profile::ShiftedPower { exponent: 3.0 }), vec![1.5, 2.0, 3.0]),
        (DomainSpec::funnel(3, Profile::Exponential { rate: 1.0 }), vec![2.0]),
        (DomainSpec::couhil(2.0), vec![1.5, 2.0]),
        (DomainSpec::nikodym(1.5), vec![1.5, 2.0, 3.0]),
        (DomainSpec::interval(1.0), vec![1.5, 2.0, 3.0]),
    ]
}

#[test]
fn every_catalog_nu_is_non_decreasing() {
    for (d, ps) in catalog_instances() {
        let m = d.total_measure().unwrap();
        let grid = lin_space(1e-3 * m, 0.499 * m, 200);
        for p in ps {
            let nu = nu_p(&d, p).unwrap();
            let v: Vec<f64> = grid.iter().map(|&s| nu.evaluate(s)).collect();
            for (i, w) in v.windows(2).enumerate() {
                assert!(
                    w[0] <= w[1] * (1.0 + 1e-12),
                    "{} p = {p}: nu decreases at s = {}",
                    d.family_name(),
                    grid[i]
                );
            }
        }
    }
}

#[test]
fn catalog_lists_every_family() {
    let names: Vec<&str> = catalog().iter().map(|e| e.family).collect();
    for f in ["lipschitz_ball", "holder", "gamma_john", "cusp", "funnel", "couhil_comb", "nikodym_comb", "custom"] {
        assert!(names.contains(&f), "{f} missing from {names:?}");
    }
}

#[test]
fn lower_bound_families_are_flagged() {
    for d in [DomainSpec::holder(3, 0.3), DomainSpec::gamma_john(3, 1.2)] {
        assert_eq!(nu_p(&d, 2.0).unwrap().exactness, Exactness::LowerBoundOnly);
    }
    let cusp = DomainSpec::cusp(2, Profile::power(2.0));
    assert_eq!(nu_p(&cusp, 2.0).unwrap().exactness, Exactness::Exact);
}

#[test]
fn lambda_route_is_exact_on_profile_domains() {
    for d in [
        DomainSpec::cusp(2, Profile::power(1.0)),
        DomainSpec::cusp(3, Profile::power(2.0)),
        DomainSpec::funnel(2, Profile::ShiftedPower { exponent: 4.0 }),
    ] {
        let m = d.total_measure().unwrap();
        for p in [1.5, 2.0, 3.0] {
            let nu = nu_p(&d, p).unwrap();
            let via = nu_from_lambda(&lambda_iso(&d).unwrap(), p, m);
            for s in log_space(1e-5 * m, 0.45 * m, 30) {
                let (a, b) = (nu.evaluate(s), via.evaluate(s));
                assert!((a - b).abs() <= 1e-6 * a, "{} p = {p} s = {s}: {a} vs {b}", d.family_name());
            }
        }
    }
}

#[test]
fn comb_lambda_route_decays_faster() {
    // With lambda ~ delta ~ s^alpha the route through lambda gives
    // nu ~ s^{alpha p - p + 1}, a larger exponent than nu_p ~ s^alpha.
    for alpha in [1.5, 2.0, 2.5] {
        let d = DomainSpec::nikodym(alpha);
        let m = d.total_measure().unwrap();
        for p in [1.5, 2.0, 3.0] {
            let nu = nu_p(&d, p).unwrap();
            let via = nu_from_lambda(&lambda_iso(&d).unwrap(), p, m);
            let e_nu = nu.asymptotic.unwrap().exponent;
            let e_via = via.asymptotic.unwrap().exponent;
            assert!((e_via - (alpha * p - p + 1.0)).abs() < 1e-12);
            assert!(e_via > e_nu, "alpha = {alpha}, p = {p}");
            // Measured slope of the lambda route near 0.
            let (s1, s2) = (1e-7 * m, 1e-6 * m);
            let slope = (via.evaluate(s2) / via.evaluate(s1)).ln() / (s2 / s1).ln();
            assert!((slope - e_via).abs() < 0.02, "slope {slope} vs {e_via}");
            let ratio = |s: f64| via.evaluate(s) / nu.evaluate(s);
            assert!(ratio(1e-6 * m) < ratio(1e-3 * m));
        }
    }
}

#[test]
fn condenser_capacity_monotonicity() {
    let w = |t: f64| t * t;
    let cap = |a: f64, g: f64| condenser_capacity_1d(w, 2.5, a, g).unwrap().value;
    let gs = [0.5, 0.7, 1.0, 2.0];
    for pair in gs.windows(2) {
        assert!(cap(0.2, pair[0]) > cap(0.2, pair[1]));
    }
    let as_ = [0.05, 0.1, 0.2, 0.4];
    for pair in as_.windows(2) {
        assert!(cap(pair[0], 1.0) < cap(pair[1], 1.0));
    }
}

#[test]
fn radial_capacity_closed_form_and_asymptotics() {
    // cap = c0 (∫_r^R t^{-(n-1)/(p-1)} dt)^{1-p}
    let closed = |n: u32, p: f64, r: f64, big_r: f64, c0: f64| {
        let a = (n as f64 - 1.0) / (p - 1.0);
        let i = if (a - 1.0).abs() < 1e-12 {
            (big_r / r).ln()
        } else {
            (big_r.powf(1.0 - a) - r.powf(1.0 - a)) / (1.0 - a)
        };
        c0 * i.powf(1.0 - p)
    };
    for (n, p) in [(3, 2.0), (4, 2.0), (3, 1.5), (2, 2.0)] {
        let c = condenser_capacity_radial(n, p, 0.1, 1.0, 2.0).unwrap();
        let e = closed(n, p, 0.1, 1.0, 2.0);
        assert!((c - e).abs() < 1e-9 * e, "n = {n}, p = {p}: {c} vs {e}");
    }
    for (n, p) in [(3, 2.0), (4, 2.0), (3, 1.5)] {
        let c0 = 1.0;
        let mass = |r: f64| c0 * r.powi(n as i32) / n as f64;
        let (r1, r2) = (1e-6, 1e-5);
        let c1 = condenser_capacity_radial(n, p, r1, 1.0, c0).unwrap();
        let c2 = condenser_capacity_radial(n, p, r2, 1.0, c0).unwrap();
        let slope = (c2 / c1).ln() / (mass(r2) / mass(r1)).ln();
        let expected = (n as f64 - p) / n as f64;
        assert!((slope - expected).abs() < 0.01, "n = {n}, p = {p}: slope {slope} vs {expected}");
    }
    assert!(condenser_capacity_radial(2, 3.0, 0.1, 1.0, 1.0).is_err());
}

#[test]
fn invalid_parameters_name_the_condition() {
    let e = nu_p(&DomainSpec::holder(2, 1.5), 2.0).unwrap_err().to_string();
    assert!(e.contains("alpha"), "{e}");
    let e = nu_p(&DomainSpec::couhil(2.0), 2.5).unwrap_err().to_string();
    assert!(e.contains("1 <= p <= 2"), "{e}");
    let e = nu_p(&DomainSpec::funnel(2, Profile::ShiftedPower { exponent: 0.9 }), 2.0)
        .unwrap_err()
        .to_string();
    assert!(e.contains("finite funnel volume"), "{e}");
    let e = nu_p(&DomainSpec::custom(NuModel::Constant { value: 1.0 }, -1.0), 2.0)
        .unwrap_err()
        .to_string();
    assert!(e.contains("measure"), "{e}");
}

#[test]
fn domain_specs_round_trip_through_json() {
    for (d, _) in catalog_instances() {
        let text = serde_json::to_string(&d).unwrap();
        let back: DomainSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d, "{text}");
    }
}
