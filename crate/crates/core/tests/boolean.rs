use proptest::prelude::*;
use smq_core::boolean::{
    apply_npn, approx_degree, degree, input_bits, multilinear_interpolate, npn_canonical, npn_classes,
    phase_oracle_choi, phase_oracle_vector, BooleanFunction, MultilinearPoly, NpnTransform,
};

fn table_ids() -> Vec<u64> {
    include_str!("data/table_n4_t2.csv")
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn or_polynomial_and_degree() {
    let or2 = BooleanFunction::or(2).unwrap();
    assert_eq!(multilinear_interpolate(&or2).to_string(), "x1 + x2 - x1x2");
    assert_eq!(degree(&or2), 2);
}

#[test]
fn id_5865_calibrates_bit_order() {
    // x1 + x2x3 + x2x4 + x3x4 + x2x3x4 over GF(2)
    let f = BooleanFunction::from_fn(4, |x| x[0] ^ (x[1] & x[2]) ^ (x[1] & x[3]) ^ (x[2] & x[3]) ^ (x[1] & x[2] & x[3]))
        .unwrap();
    assert_eq!(f.id(), 5865);
    let g = multilinear_interpolate(&f);
    for p in 0..16 {
        let x = input_bits(4, p);
        assert_eq!(g.eval(&x), f.eval(&x) as u8 as f64);
    }
    // the integer coefficients reduce mod 2 to the stated normal form
    let odd: Vec<u32> = g.coeffs.iter().filter(|(_, c)| (**c as i64).rem_euclid(2) == 1).map(|(m, _)| *m).collect();
    let mut expect = vec![0b0001, 0b0110, 0b1010, 0b1100, 0b1110];
    expect.sort();
    assert_eq!(odd, expect);
    assert_eq!(g.to_string(), "x1 + x2x3 + x2x4 + x3x4 - 2x1x2x3 - 2x1x2x4 - 2x1x3x4 - 3x2x3x4 + 6x1x2x3x4");
}

#[test]
fn interpolation_round_trips_all_small_tables() {
    for n in 1..=3 {
        for id in 0..1u64 << (1 << n) {
            let f = BooleanFunction::from_id(n, id).unwrap();
            let g = multilinear_interpolate(&f);
            for p in 0..1 << n {
                let x = input_bits(n, p);
                assert_eq!(g.eval(&x), f.eval(&x) as u8 as f64);
            }
            assert!(g.coeffs.values().all(|c| c.fract() == 0.0));
        }
    }
    for id in (0..65536u64).step_by(97) {
        let f = BooleanFunction::from_id(4, id).unwrap();
        let g = multilinear_interpolate(&f);
        let back = BooleanFunction::from_fn(4, |x| g.eval(x) == 1.0).unwrap();
        assert_eq!(back, f);
    }
}

#[test]
fn degrees_of_simple_functions() {
    let c = BooleanFunction::constant(4, true).unwrap();
    assert_eq!((degree(&c), approx_degree(&c, 1.0 / 3.0).unwrap()), (0, 0));
    let parity = BooleanFunction::parity(4).unwrap();
    assert_eq!(approx_degree(&parity, 1.0 / 3.0).unwrap(), 4);
    let or4 = BooleanFunction::or(4).unwrap();
    let ad = approx_degree(&or4, 1.0 / 3.0).unwrap();
    assert!(ad <= degree(&or4) && ad >= 1);
    let x2 = BooleanFunction::variable(3, 2).unwrap();
    assert_eq!(approx_degree(&x2, 1.0 / 3.0).unwrap(), 1);
}

#[test]
fn approx_degree_never_exceeds_degree() {
    for id in [1u64, 6, 22, 105, 5865, 6630, 27030] {
        let f = BooleanFunction::from_id(4, id).unwrap();
        assert!(approx_degree(&f, 1.0 / 3.0).unwrap() <= degree(&f), "id {id}");
    }
}

#[test]
fn npn_simple_cases() {
    let zero = BooleanFunction::constant(4, false).unwrap();
    assert_eq!(npn_canonical(&zero).0.id(), 0);
    for n in 1..=4 {
        let and = npn_canonical(&BooleanFunction::and(n).unwrap()).0;
        let or = npn_canonical(&BooleanFunction::or(n).unwrap()).0;
        assert_eq!(and, or);
    }
}

#[test]
fn npn_classes_of_four_bits_match_the_table() {
    let reps = npn_classes(4).unwrap();
    assert_eq!(reps.len(), 222);
    let mut ids = table_ids();
    ids.sort();
    assert_eq!(reps, ids);
}

#[test]
fn oracle_examples() {
    let v = phase_oracle_vector(&[true, false], 1).unwrap();
    let diag: Vec<f64> = (0..3).map(|i| v.data()[i * 3 + i].re).collect();
    assert_eq!(diag, vec![1.0, -1.0, 1.0]);
    let o = phase_oracle_choi(&[false, false], 2).unwrap();
    let id = phase_oracle_vector(&[false, false], 2).unwrap();
    assert!(id.data().iter().all(|c| c.im == 0.0 && (c.re == 0.0 || c.re == 1.0)));
    assert_eq!(o.dim(), 81);
    let x = [true, false, true];
    let two = phase_oracle_vector(&x, 2).unwrap();
    let one = phase_oracle_vector(&x, 1).unwrap();
    let relabeled = one
        .relabeled(&[("A1_I", "A2_I"), ("A1_O", "A2_O")])
        .unwrap();
    let t = one.tensor(&relabeled).unwrap();
    assert_eq!(t.data(), two.data());
}

#[test]
fn polynomial_display_is_canonical() {
    let mut p = MultilinearPoly::zero(3);
    p.add_term(0b100, 1.0);
    p.add_term(0b011, -0.25);
    assert_eq!(p.to_string(), "x3 - 0.25x1x2");
}

fn transform_strategy() -> impl Strategy<Value = (u64, Vec<usize>, u32, bool)> {
    (0..65536u64, Just((0..4).collect::<Vec<usize>>()).prop_shuffle(), 0..16u32, any::<bool>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn npn_canonical_is_invariant((id, perm, neg, out) in transform_strategy()) {
        let f = BooleanFunction::from_id(4, id).unwrap();
        let t = NpnTransform { perm, input_neg: neg, output_neg: out };
        let g = apply_npn(&f, &t).unwrap();
        let (cf, wf) = npn_canonical(&f);
        prop_assert_eq!(&npn_canonical(&g).0, &cf);
        prop_assert_eq!(apply_npn(&f, &wf).unwrap(), cf);
    }
}
