use smq_conic::{solve, Settings};
use smq_core::boolean::{input_bits, BooleanFunction};
use smq_core::process::{ProcessClass, SubspaceProjector};
use smq_core::sdp::{build_primal, min_error, BlockBasis, QuerySdp, Reduction, SdpConfig};
use smq_core::Error;

fn cfg() -> SdpConfig {
    SdpConfig {
        settings: Settings {
            tol: 1e-8,
            ..Settings::default()
        },
        ..SdpConfig::default()
    }
}

fn solve_eps(f: &BooleanFunction, t: usize, class: ProcessClass) -> smq_core::sdp::MinError {
    let r = min_error(f, t, class, &cfg()).unwrap();
    assert!(r.eps_dual <= r.eps_primal + 1e-9, "weak duality: {} > {}", r.eps_dual, r.eps_primal);
    r
}

#[test]
fn single_bit_dictator_is_exact_with_one_query() {
    let f = BooleanFunction::variable(1, 1).unwrap();
    for class in [ProcessClass::Fo, ProcessClass::Gen] {
        let r = solve_eps(&f, 1, class);
        assert!(r.eps_primal < 1e-6, "{class}: {}", r.eps_primal);
    }
}

#[test]
fn constant_function_has_zero_error() {
    let f = BooleanFunction::constant(2, true).unwrap();
    let r = solve_eps(&f, 1, ProcessClass::Fo);
    assert!(r.eps_primal < 1e-6);
}

#[test]
fn two_bit_parity_needs_one_query() {
    // (|1⟩ + |2⟩)/√2 picks up the phase (−1)^{x1 ⊕ x2} between the two terms
    let f = BooleanFunction::parity(2).unwrap();
    let r = solve_eps(&f, 1, ProcessClass::Fo);
    assert!(r.eps_primal < 1e-6, "{}", r.eps_primal);
}

#[test]
fn three_bit_parity_with_one_query_is_not_exact() {
    let f = BooleanFunction::parity(3).unwrap();
    let r = solve_eps(&f, 1, ProcessClass::Fo);
    assert!(r.eps_dual > 1e-2, "{}", r.eps_dual);
}

#[test]
fn reduced_and_full_parameterizations_agree() {
    for id in [1u64, 6, 7, 8] {
        let f = BooleanFunction::from_id(2, id).unwrap();
        let mut c = cfg();
        let twirl = min_error(&f, 1, ProcessClass::Gen, &c).unwrap();
        c.reduction = Reduction::Full;
        let full = min_error(&f, 1, ProcessClass::Gen, &c).unwrap();
        assert!((twirl.eps_primal - full.eps_primal).abs() < 1e-5, "id {id}: {} vs {}", twirl.eps_primal, full.eps_primal);
    }
}

#[test]
fn explicit_dual_matches_primal() {
    for id in [1u64, 8, 14] {
        let f = BooleanFunction::from_id(2, id).unwrap();
        let sdp = QuerySdp::new(&f, 1, ProcessClass::Fo, &cfg()).unwrap();
        let settings = Settings {
            tol: 1e-9,
            ..Settings::default()
        };
        let p = solve(&sdp.primal().unwrap(), &settings).unwrap();
        let d = solve(&sdp.dual().unwrap(), &settings).unwrap();
        assert!(
            (p.primal_objective + d.primal_objective).abs() < 1e-5,
            "id {id}: primal {} dual {}",
            p.primal_objective,
            -d.primal_objective
        );
    }
}

#[test]
fn trivial_dual_gives_zero() {
    let f = BooleanFunction::and(2).unwrap();
    let sdp = QuerySdp::new(&f, 1, ProcessClass::Gen, &cfg()).unwrap();
    let zero = vec![0.0; sdp.basis.len()];
    let (_, _, bound) = sdp.repair_dual(&[vec![0.0; 3], vec![0.0; 1]], &zero);
    assert_eq!(bound, 0.0);
}

#[test]
fn subspace_operator_matches_the_projector() {
    let f = BooleanFunction::and(2).unwrap();
    for class in [ProcessClass::Fo, ProcessClass::Gen] {
        let sdp = QuerySdp::new(&f, 2, class, &cfg()).unwrap();
        let basis: &BlockBasis = &sdp.basis;
        let v: Vec<f64> = (0..basis.len()).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let mut pv = vec![0.0; basis.len()];
        sdp.subspace_projector().mul_vec(&v, &mut pv);
        let proj = SubspaceProjector::new(sdp.scenario, class).unwrap();
        let direct = proj.project(&basis.to_choi(&v).unwrap()).unwrap();
        let via = basis.to_choi(&pv).unwrap();
        assert!(direct.distance(&via).unwrap() < 1e-10);
        let rows = sdp.subspace_projector().to_dense();
        let m = nalgebra::DMatrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j]);
        assert!((&m - m.transpose()).abs().max() < 1e-12);
        assert!((&m * &m - &m).abs().max() < 1e-10);
    }
}

#[test]
fn solutions_are_feasible_and_consistent() {
    let f = BooleanFunction::and(2).unwrap();
    for class in [ProcessClass::Fo, ProcessClass::Gen] {
        let r = solve_eps(&f, 1, class);
        assert!(r.primal.constraint_violation(class).unwrap() < 1e-9);
        assert!(r.dual.constraint_violation(2, class).unwrap() < 1e-9);
        assert!((r.dual.lower_bound() - r.eps_dual).abs() < 1e-9);
        for p in 0..4 {
            let x = input_bits(2, p);
            assert!(r.primal.evaluate(&f, &x).unwrap() >= 1.0 - r.eps_primal - 1e-6);
        }
        assert!((r.primal.worst_case_error(&f).unwrap() - r.eps_primal).abs() < 1e-9);
        let pm = r.primal.to_process(class).unwrap();
        for p in 0..4 {
            let x = input_bits(2, p);
            let probs = pm.outcome_probabilities(&x).unwrap();
            assert!((probs[0] + probs[1] - 1.0).abs() < 1e-9);
            assert!((probs[f.eval(&x) as usize] - r.primal.evaluate(&f, &x).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn gen_never_exceeds_fo() {
    for id in [1u64, 6, 22, 105, 150] {
        let f = BooleanFunction::from_id(3, id).unwrap();
        let fo = solve_eps(&f, 1, ProcessClass::Fo);
        let gen = solve_eps(&f, 1, ProcessClass::Gen);
        assert!(gen.eps_dual <= fo.eps_primal + 1e-6, "id {id}");
    }
}

#[test]
fn sizes_and_caps() {
    let f = BooleanFunction::from_id(4, 5865).unwrap();
    let sdp = QuerySdp::new(&f, 2, ProcessClass::Gen, &SdpConfig::default()).unwrap();
    assert_eq!(sdp.side(), 625);
    assert_eq!(sdp.basis.to_choi(&sdp.basis.identity()).unwrap().dim(), 625);
    let g = BooleanFunction::from_id(5, 1).unwrap();
    assert!(matches!(build_primal(&g, 2, ProcessClass::Fo), Err(Error::SizeCap(_))));
    let h = BooleanFunction::from_id(3, 1).unwrap();
    assert!(matches!(build_primal(&h, 3, ProcessClass::Fo), Err(Error::SizeCap(_))));
    assert!(build_primal(&h, 2, ProcessClass::Qc).is_err());
}
