use isocap::criteria::{
    conjugate, embedding_condition, gradient_norm_condition, lorentz_gradient_condition, solution_norm_condition,
    wellposedness, wellposedness_via_lambda, CriterionId, CriterionReport, Verdict,
};
use isocap::domains::{lambda_iso, nu_p, DomainSpec, IsocapFn, NuModel, Profile};
use isocap::numerics::EXPONENT_MARGIN;
use isocap::Error;
use proptest::prelude::*;

/// Band around a closed-form threshold inside which no verdict is asserted.
const BAND: f64 = 0.05;

fn power(theta: f64, p: f64) -> IsocapFn {
    nu_p(
        &DomainSpec::custom(
            NuModel::Power {
                coef: 1.0,
                exponent: theta,
            },
            1.0,
        ),
        p,
    )
    .unwrap()
}

/// For `nu(s) = s^theta`, every condition holds iff `theta < threshold`
/// (or `theta <= threshold` for the suprema). Worked out from the integrands:
/// `(s/nu)^e` is integrable iff `theta < 1 + 1/e`, `s^a/nu` is bounded iff
/// `theta <= a`, and `(s^a/nu)^e/s` is integrable iff `theta < a`.
fn threshold(r: &CriterionReport) -> f64 {
    let k = |name: &str| r.parameters[name];
    let p = k("p");
    let pp = p / (p - 1.0);
    match r.criterion_id {
        CriterionId::WpInt => 1.0 + p / conjugate(k("q")),
        CriterionId::WpLog => 1.0,
        CriterionId::SolI => (p - 1.0) / k("sigma") + 1.0 / conjugate(k("q")),
        CriterionId::SolII => {
            let (q, s) = (k("q"), k("sigma"));
            1.0 + (q * (p - 1.0) - s) / (s * q)
        }
        CriterionId::SolIII => 1.0 + (p - 1.0) / k("sigma"),
        CriterionId::GradI | CriterionId::LorSup | CriterionId::LorInt => {
            1.0 + p * (p - 1.0) / k("sigma") - p / k("q")
        }
        CriterionId::GradII => {
            let (q, s) = (k("q"), k("sigma"));
            1.0 + p * (q * (p - 1.0) - s) / (s * q)
        }
        CriterionId::GradIII => 1.0 + p * (p - 1.0) / k("sigma"),
        CriterionId::GradIV => {
            // (1 - theta) e - g > -1 with e = sigma/(p(p-1)), g = sigma/(p-1)
            let s = k("sigma");
            let e = s / (p * (p - 1.0));
            let g = s / (p - 1.0);
            1.0 - (g - 1.0) / e
        }
        CriterionId::EmbSup | CriterionId::EmbInt => p / k("sigma"),
        CriterionId::IsoInt | CriterionId::IsoLog => {
            let _ = pp;
            unreachable!("lambda criteria are not evaluated on nu")
        }
    }
}

/// Factor multiplying `theta` in the exponent of the integrand, so the
/// classifier's margin can be mapped back to a band in `theta`.
fn slope(r: &CriterionReport) -> f64 {
    let k = |name: &str| r.parameters[name];
    let p = k("p");
    match r.criterion_id {
        CriterionId::WpInt => conjugate(k("q")) / p,
        CriterionId::WpLog => 1.0 / p,
        CriterionId::SolII => {
            let (q, s) = (k("q"), k("sigma"));
            s * q / (q * (p - 1.0) - s)
        }
        CriterionId::SolIII => k("sigma") / (p - 1.0),
        CriterionId::GradII => {
            let (q, s) = (k("q"), k("sigma"));
            s * q / (p * (q * (p - 1.0) - s))
        }
        CriterionId::GradIII | CriterionId::GradIV => k("sigma") / (p * (p - 1.0)),
        CriterionId::LorInt => {
            let (rho, gamma) = (k("rho"), k("gamma"));
            rho * gamma / (p * (gamma - rho) * (p - 1.0))
        }
        CriterionId::EmbInt => k("sigma") / (p - k("sigma")),
        _ => 1.0,
    }
}

fn is_sup(id: CriterionId) -> bool {
    matches!(id, CriterionId::SolI | CriterionId::GradI | CriterionId::LorSup | CriterionId::EmbSup)
}

fn check_against_oracle(r: &CriterionReport, theta: f64) -> Result<(), TestCaseError> {
    let thr = threshold(r);
    let band = BAND.max(2.0 * EXPONENT_MARGIN / slope(r));
    if (theta - thr).abs() < band {
        return Ok(());
    }
    let expected = if theta < thr { Verdict::Holds } else { Verdict::Fails };
    prop_assert_eq!(
        r.verdict,
        expected,
        "{} theta = {} threshold = {} params {:?} sup = {}",
        r.criterion_id,
        theta,
        thr,
        r.parameters,
        is_sup(r.criterion_id)
    );
    Ok(())
}

fn thetas() -> impl Strategy<Value = f64> {
    (1u32..=30).prop_map(|k| k as f64 / 10.0)
}

fn qs() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), 1.1f64..6.0, Just(f64::INFINITY)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn power_law_oracle(theta in thetas(), p in 1.2f64..4.0, q in qs(), sigma_frac in 0.05f64..1.0) {
        let nu = power(theta, p);
        check_against_oracle(&wellposedness(&nu, 1.0, p, q).unwrap(), theta)?;

        let sigma = sigma_frac * p;
        check_against_oracle(&gradient_norm_condition(&nu, 1.0, p, q, sigma).unwrap(), theta)?;

        let sigma_sol = sigma_frac * 3.0 * p;
        match solution_norm_condition(&nu, 1.0, p, q, sigma_sol) {
            Ok(r) => check_against_oracle(&r, theta)?,
            Err(Error::CaseTable(_)) => prop_assert!(q == 1.0 || (q.is_infinite() && sigma_sol > 1.0)),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }

        let sigma_emb = 1.0 + sigma_frac * 2.0 * p;
        check_against_oracle(&embedding_condition(&nu, 1.0, p, sigma_emb).unwrap(), theta)?;

        if q > 1.0 && q.is_finite() && sigma < p {
            for (rho, gamma) in [(1.0, 0.5), (0.5, 2.0)] {
                let r = lorentz_gradient_condition(&nu, 1.0, p, q, sigma, rho, gamma).unwrap();
                check_against_oracle(&r, theta)?;
            }
        }
    }

    #[test]
    fn wellposedness_is_monotone_in_q(alpha in 1.1f64..3.0, p in prop_oneof![Just(1.5), Just(2.0), Just(3.0)]) {
        let d = DomainSpec::nikodym(alpha);
        let m = d.total_measure().unwrap();
        let nu = nu_p(&d, p).unwrap();
        let grid = [1.0, 1.2, 1.5, 2.0, 3.0, 4.0, 8.0, f64::INFINITY];
        let mut seen = false;
        for q in grid {
            let holds = wellposedness(&nu, m, p, q).unwrap().verdict.holds();
            prop_assert!(!seen || holds, "alpha = {} p = {} q = {}", alpha, p, q);
            seen |= holds;
        }
    }
}

#[test]
fn lambda_route_never_beats_nu_route() {
    let mut cases: Vec<(DomainSpec, Vec<f64>)> = Vec::new();
    for k in 0..20 {
        let alpha = 1.1 + 0.1 * k as f64;
        cases.push((DomainSpec::nikodym(alpha), vec![1.5, 2.0, 3.0]));
        if alpha <= 3.0 {
            cases.push((DomainSpec::couhil(alpha), vec![1.5, 2.0]));
        }
    }
    for beta in [1.5, 2.5, 4.0] {
        cases.push((DomainSpec::funnel(2, Profile::ShiftedPower { exponent: beta }), vec![2.0]));
    }
    let mut checked = 0;
    for (d, ps) in cases {
        let m = d.total_measure().unwrap();
        for p in ps {
            let Ok(nu) = nu_p(&d, p) else { continue };
            let lam = lambda_iso(&d).unwrap();
            for q in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
                let via = wellposedness_via_lambda(&lam, m, p, q).unwrap();
                let direct = wellposedness(&nu, m, p, q).unwrap();
                if via.verdict == Verdict::Holds {
                    assert_eq!(direct.verdict, Verdict::Holds, "{d:?} p = {p} q = {q}");
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 200);
}

#[test]
fn reports_carry_parameters_and_rates() {
    let nu = power(2.5, 2.0);
    let r = wellposedness(&nu, 1.0, 2.0, 2.0).unwrap();
    assert_eq!(r.verdict, Verdict::Fails);
    assert!(r.quantity.is_none());
    // (s/nu)^{q'/p} = s^{-1.5}
    let rate = r.rate.unwrap();
    assert!((rate.exponent + 1.5).abs() < 1e-3, "{rate:?}");
    assert_eq!(r.parameters["q"], 2.0);
    let r = wellposedness(&power(0.5, 2.0), 1.0, 2.0, f64::INFINITY).unwrap();
    // ∫_0^{1/2} s^{1/4} ds
    let exact = 0.5f64.powf(1.25) / 1.25;
    assert!((r.quantity.unwrap() - exact).abs() < 1e-6 * exact);
}

#[test]
fn wrong_p_is_rejected() {
    let nu = power(1.0, 2.0);
    assert!(wellposedness(&nu, 1.0, 3.0, 2.0).is_err());
    assert!(wellposedness(&nu, 1.0, 2.0, 0.5).is_err());
    assert!(gradient_norm_condition(&nu, 1.0, 2.0, 2.0, 3.0).is_err());
}
