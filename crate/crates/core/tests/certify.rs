use num_traits::{One, Zero};
use proptest::prelude::*;
use smq_conic::Settings;
use smq_core::boolean::BooleanFunction;
use smq_core::certify::{
    certify_lower, certify_upper, exact_project_dual_cone, exact_project_subspace, exact_psd_check,
    limit_denominator, parse_certificate, q, quadratic_form, rationalize, verify_certificate, write_certificate,
    round_to, CertifyConfig, RationalMatrix, Rounding, Q,
};
use smq_core::linalg::{ChoiObject, SpaceLabel, C64};
use smq_core::process::fixtures::quantum_switch;
use smq_core::process::{ProcessClass, ProcessScenario};
use smq_core::sdp::{min_error, DualSolution, MinError, SdpConfig};
use smq_core::Error;

fn labels(d: usize) -> Vec<SpaceLabel> {
    vec![SpaceLabel::new("X", d)]
}

fn rational(d: usize, entries: &[(usize, usize, Q)]) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(labels(d));
    for (r, c, v) in entries {
        m.set(*r, *c, (v.clone(), Q::zero()));
    }
    m
}

fn solve(f: &BooleanFunction, t: usize, class: ProcessClass) -> MinError {
    let cfg = SdpConfig {
        settings: Settings {
            tol: 1e-8,
            ..Settings::default()
        },
        ..SdpConfig::default()
    };
    min_error(f, t, class, &cfg).unwrap()
}

#[test]
fn exact_psd_verdicts() {
    let id = RationalMatrix::identity(labels(4));
    assert!(exact_psd_check(&id).psd);

    let tiny = Q::new((-1).into(), num_bigint::BigInt::from(10).pow(40));
    let m = rational(2, &[(0, 0, q(1, 1)), (1, 1, tiny)]);
    let v = exact_psd_check(&m);
    assert!(!v.psd);
    let z = v.witness.unwrap();
    assert!(quadratic_form(&m, &z) < Q::zero());

    // [[1, 2], [2, 1]] has eigenvalue -1
    let m = rational(2, &[(0, 0, q(1, 1)), (0, 1, q(2, 1)), (1, 0, q(2, 1)), (1, 1, q(1, 1))]);
    let v = exact_psd_check(&m);
    assert!(!v.psd);
    assert!(quadratic_form(&m, &v.witness.unwrap()) < Q::zero());

    // zero diagonal with coupling
    let m = rational(3, &[(0, 0, q(1, 1)), (1, 2, q(1, 3)), (2, 1, q(1, 3))]);
    let v = exact_psd_check(&m);
    assert!(!v.psd);
    assert!(quadratic_form(&m, &v.witness.unwrap()) < Q::zero());

    // rank-deficient but PSD: all-ones matrix
    let ones: Vec<_> = (0..3).flat_map(|r| (0..3).map(move |c| (r, c, q(1, 1)))).collect();
    assert!(exact_psd_check(&rational(3, &ones)).psd);
}

#[test]
fn complex_matrices_use_the_real_embedding() {
    // [[1, i], [-i, 1]] is PSD and singular; [[1, 2i], [-2i, 1]] is not
    for (b, psd) in [(1, true), (2, false)] {
        let mut m = RationalMatrix::identity(labels(2));
        m.set(0, 1, (Q::zero(), q(b, 1)));
        m.set(1, 0, (Q::zero(), q(-b, 1)));
        let v = exact_psd_check(&m);
        assert_eq!(v.psd, psd);
        if let Some(z) = v.witness {
            assert!(quadratic_form(&m, &z) < Q::zero());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gram_matrices_are_psd(a in proptest::collection::vec(-5i64..=5, 12)) {
        // A is 3x4, M = AᵀA
        let mut entries = Vec::new();
        for r in 0..4 {
            for c in 0..4 {
                let s: i64 = (0..3).map(|k| a[k * 4 + r] * a[k * 4 + c]).sum();
                entries.push((r, c, q(s, 1)));
            }
        }
        let m = rational(4, &entries);
        prop_assert!(exact_psd_check(&m).psd);
        // shifting by a negative multiple of the identity past zero breaks it
        let shifted = m.add_identity(&q(-1, 1_000_000));
        let v = exact_psd_check(&shifted);
        // A has rank at most 3 < 4, so the shift always breaks PSD
        prop_assert!(!v.psd);
        prop_assert!(quadratic_form(&shifted, &v.witness.unwrap()) < Q::zero());
    }

    #[test]
    fn rationalize_is_close(x in -10.0f64..10.0) {
        let r = rationalize(x, 1_000_000).unwrap();
        prop_assert!(r.denom() <= &num_bigint::BigInt::from(1_000_000));
        prop_assert!((smq_core::certify::to_f64(&r) - x).abs() < 1e-6);
    }
}

#[test]
fn limit_denominator_examples() {
    let pi = Q::from_float(std::f64::consts::PI).unwrap();
    assert_eq!(limit_denominator(&pi, &10.into()), q(22, 7));
    assert_eq!(limit_denominator(&pi, &100.into()), q(311, 99));
    assert_eq!(limit_denominator(&pi, &1000.into()), q(355, 113));
    assert_eq!(rationalize(0.5, 10).unwrap(), q(1, 2));
    assert_eq!(rationalize(-0.125, 1_000_000).unwrap(), q(-1, 8));
    assert_eq!(round_to(0.3333334, 1000, Rounding::Grid).unwrap(), q(333, 1000));
    assert_eq!(round_to(0.3333334, 1000, Rounding::ContinuedFraction).unwrap(), q(1, 3));
    assert!(round_to(f64::NAN, 1000, Rounding::Grid).is_err());
}

#[test]
fn exact_projection_is_idempotent() {
    let sc = ProcessScenario::query(1, 2).unwrap().contracted();
    let dim = sc.dim();
    let mut m = RationalMatrix::zeros(sc.labels());
    for r in 0..dim {
        for c in 0..dim {
            if (r * 7 + c * 3) % 5 == 0 {
                m.set(r, c, (q((r + c) as i64 % 7 - 3, 5), Q::zero()));
            }
        }
    }
    let m = m.hermitian_part();
    for class in [ProcessClass::Fo, ProcessClass::Gen] {
        let p = exact_project_subspace(&m, class, &sc).unwrap();
        assert_eq!(exact_project_subspace(&p, class, &sc).unwrap(), p, "{class}");
        let c = exact_project_dual_cone(&m, class, &sc).unwrap();
        assert_eq!(exact_project_dual_cone(&c, class, &sc).unwrap(), c, "{class}");
    }
    assert!(matches!(
        exact_project_subspace(&m, ProcessClass::Qc, &sc),
        Err(Error::Invalid(_))
    ));
}

#[test]
fn switch_is_a_fixed_point_of_the_general_projector() {
    let pm = quantum_switch(2).unwrap().process().unwrap();
    let m = RationalMatrix::from_choi(&pm.w, 1_000_000, Rounding::ContinuedFraction).unwrap();
    let gen = exact_project_subspace(&m, ProcessClass::Gen, &pm.scenario).unwrap();
    assert_eq!(gen, m);
    let fo = exact_project_subspace(&m, ProcessClass::Fo, &pm.scenario).unwrap();
    assert_ne!(fo, m);
}

#[test]
fn constant_function_has_zero_upper_bound() {
    let f = BooleanFunction::constant(2, true).unwrap();
    let r = solve(&f, 1, ProcessClass::Fo);
    let c = certify_upper(&f, 1, ProcessClass::Fo, &r.primal, &CertifyConfig::default()).unwrap();
    assert!(c.value.is_zero(), "{}", c.value);
    let v = verify_certificate(&c).unwrap();
    assert!(v.value.is_zero());
}

#[test]
fn zero_dual_gives_a_trivial_lower_bound() {
    let f = BooleanFunction::variable(2, 1).unwrap();
    let sc = ProcessScenario::query(2, 1).unwrap().contracted();
    let dual = DualSolution {
        scenario: sc,
        lambdas: [Vec::new(), Vec::new()],
        wbar_star: ChoiObject::zeros(sc.labels()).unwrap(),
    };
    let c = certify_lower(&f, 1, ProcessClass::Fo, &dual, &CertifyConfig::default()).unwrap();
    assert!(c.value <= Q::zero());
    verify_certificate(&c).unwrap();
}

#[test]
fn solved_instances_certify_both_sides() {
    let cases = [
        (BooleanFunction::variable(2, 1).unwrap(), 1),
        (BooleanFunction::parity(3).unwrap(), 1),
        (BooleanFunction::and(2).unwrap(), 1),
    ];
    for (f, t) in &cases {
        for class in [ProcessClass::Fo, ProcessClass::Gen] {
            let r = solve(f, *t, class);
            let cfg = CertifyConfig::default();
            let up = certify_upper(f, *t, class, &r.primal, &cfg).unwrap();
            let lo = certify_lower(f, *t, class, &r.dual, &cfg).unwrap();
            let (u, l) = (up.value_f64(), lo.value_f64());
            assert!(l <= u, "{} {class}: {l} > {u}", f.id());
            assert!((u - r.eps_primal).abs() < 1e-4, "{} {class}: {u} vs {}", f.id(), r.eps_primal);
            assert!((l - r.eps_dual).abs() < 1e-4, "{} {class}: {l} vs {}", f.id(), r.eps_dual);
            for c in [&up, &lo] {
                let v = verify_certificate(c).unwrap();
                assert_eq!(v.value, c.value);
            }
        }
    }
}

#[test]
fn dictator_lower_bound_is_nonpositive() {
    let f = BooleanFunction::variable(2, 1).unwrap();
    let r = solve(&f, 1, ProcessClass::Fo);
    let c = certify_lower(&f, 1, ProcessClass::Fo, &r.dual, &CertifyConfig::default()).unwrap();
    assert!(c.value <= Q::zero());
    assert!(c.value_f64() > -1e-5);
}

#[test]
fn perturbed_solutions_still_certify() {
    let f = BooleanFunction::parity(3).unwrap();
    let r = solve(&f, 1, ProcessClass::Gen);
    let bump = |w: &ChoiObject, k: usize| {
        let mut w = w.clone();
        let d = w.dim();
        for (i, z) in w.data_mut().iter_mut().enumerate() {
            if (i / d + i % d + k) % 3 == 0 {
                *z += C64::new(1e-3, 0.0);
            }
        }
        w
    };
    let mut primal = r.primal.clone();
    primal.w = [bump(&primal.w[0], 0), bump(&primal.w[1], 1)];
    let mut dual = r.dual.clone();
    dual.wbar_star = bump(&dual.wbar_star, 2);
    for l in dual.lambdas.iter_mut().flatten() {
        l.1 += 1e-3;
    }
    let cfg = CertifyConfig::default();
    let up = certify_upper(&f, 1, ProcessClass::Gen, &primal, &cfg).unwrap();
    let lo = certify_lower(&f, 1, ProcessClass::Gen, &dual, &cfg).unwrap();
    verify_certificate(&up).unwrap();
    verify_certificate(&lo).unwrap();
    assert!(lo.value <= up.value);
    assert!(up.value_f64() >= r.eps_dual - 1e-6);
    assert!(lo.value_f64() <= r.eps_primal + 1e-6);
    assert!(up.value_f64() - r.eps_primal < 0.05);
}

#[test]
fn text_round_trip_and_tampering() {
    let f = BooleanFunction::and(2).unwrap();
    let r = solve(&f, 1, ProcessClass::Fo);
    let cfg = CertifyConfig::default();
    for c in [
        certify_upper(&f, 1, ProcessClass::Fo, &r.primal, &cfg).unwrap(),
        certify_lower(&f, 1, ProcessClass::Fo, &r.dual, &cfg).unwrap(),
    ] {
        let text = write_certificate(&c);
        let back = parse_certificate(&text).unwrap();
        assert_eq!(back.value, c.value);
        assert_eq!(back.matrices, c.matrices);
        assert_eq!(back.lambdas, c.lambdas);
        verify_certificate(&back).unwrap();

        // an overstated bound is rejected
        let mut bad = back.clone();
        bad.value = match c.kind {
            smq_core::certify::BoundKind::Upper => &c.value - q(1, 1000),
            smq_core::certify::BoundKind::Lower => &c.value + q(1, 1000),
        };
        assert!(matches!(verify_certificate(&bad), Err(Error::CertificationFailed(_))));

        // breaking positivity of the first matrix is detected
        let mut bad = back.clone();
        let m = &mut bad.matrices[0].1;
        let (re, im) = m.get(0, 0);
        m.set(0, 0, (re - Q::one() * q(1000, 1), im));
        let err = verify_certificate(&bad).unwrap_err().to_string();
        assert!(err.contains("certification failed"), "{err}");

        // malformed text is an input error
        assert!(parse_certificate(&text.replace("end", "")).is_err());
        assert!(parse_certificate("nonsense").is_err());
    }
}
