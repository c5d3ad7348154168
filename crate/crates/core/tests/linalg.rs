use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use smq_core::boolean::phase_oracle_vector;
use smq_core::linalg::{
    apply_channel, choi_of_isometry, choi_vector_multi, link_product, ChoiObject, SpaceLabel, C64,
};
use smq_core::process::{random_isometry, random_unitary};
use smq_core::Error;

fn l(name: &str, dim: usize) -> SpaceLabel {
    SpaceLabel::new(name, dim)
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
}

fn random_matrix(labels: Vec<SpaceLabel>, rng: &mut ChaCha8Rng) -> ChoiObject {
    let d: usize = labels.iter().map(|s| s.dim).product();
    ChoiObject::from_dmatrix(labels, &gaussian(d, d, rng)).unwrap()
}

fn random_hermitian(labels: Vec<SpaceLabel>, rng: &mut ChaCha8Rng) -> ChoiObject {
    random_matrix(labels, rng).hermitian_part()
}

/// Kraus operators of a random channel `d_in → d_out`.
fn random_kraus(d_in: usize, d_out: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<DMatrix<C64>> {
    let v = random_isometry(d_out * k, d_in, rng);
    (0..k).map(|j| DMatrix::from_fn(d_out, d_in, |r, c| v[(r * k + j, c)])).collect()
}

fn apply_kraus(ks: &[DMatrix<C64>], rho: &DMatrix<C64>) -> DMatrix<C64> {
    ks.iter().map(|k| k * rho * k.adjoint()).fold(DMatrix::zeros(ks[0].nrows(), ks[0].nrows()), |a, b| a + b)
}

/// `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)` by brute force.
fn naive_choi(d_in: usize, map: impl Fn(&DMatrix<C64>) -> DMatrix<C64>) -> DMatrix<C64> {
    let mut blocks = Vec::new();
    for i in 0..d_in {
        for j in 0..d_in {
            let mut e = DMatrix::zeros(d_in, d_in);
            e[(i, j)] = C64::new(1.0, 0.0);
            blocks.push(map(&e));
        }
    }
    let d_out = blocks[0].nrows();
    let n = d_in * d_out;
    DMatrix::from_fn(n, n, |r, c| blocks[(r / d_out) * d_in + c / d_out][(r % d_out, c % d_out)])
}

#[test]
fn identity_isometry_has_all_ones_choi_vector() {
    let v = choi_of_isometry(&DMatrix::identity(3, 3), l("X", 3), vec![l("Y", 3)]).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert_eq!(v.data()[i * 3 + j], C64::new(expect, 0.0));
        }
    }
}

#[test]
fn one_bit_oracle_has_signed_diagonal() {
    let v = phase_oracle_vector(&[true], 1).unwrap();
    let d: Vec<f64> = v.data().iter().map(|c| c.re).collect();
    assert_eq!(d, vec![1.0, 0.0, 0.0, -1.0]);
}

#[test]
fn isometry_choi_norm_is_input_dimension() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v = random_isometry(4, 2, &mut rng);
    let c = choi_of_isometry(&v, l("X", 2), vec![l("Y", 4)]).unwrap();
    let n = c.data().iter().map(|z| z.norm_sqr()).sum::<f64>();
    assert!((n - 2.0).abs() < 1e-12);
    let not_iso = &v * C64::new(1.1, 0.0);
    assert!(matches!(choi_of_isometry(&not_iso, l("X", 2), vec![l("Y", 4)]), Err(Error::NonIsometry(_))));
    assert!(matches!(
        choi_of_isometry(&v, l("X", 3), vec![l("Y", 4)]),
        Err(Error::DimensionMismatch(_))
    ));
}

#[test]
fn isometry_choi_matches_naive_channel_choi() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let v = random_isometry(6, 2, &mut rng);
    let m = choi_of_isometry(&v, l("X", 2), vec![l("Y", 3), l("Z", 2)]).unwrap().outer().unwrap();
    let naive = naive_choi(2, |e| &v * e * v.adjoint());
    let got = m.to_dmatrix();
    assert!((got - naive).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-12);
}

#[test]
fn link_of_disjoint_spaces_is_tensor_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_matrix(vec![l("A", 2)], &mut rng);
    let b = random_matrix(vec![l("B", 3)], &mut rng);
    let p = link_product(&a, &b).unwrap();
    assert!(p.distance(&a.tensor(&b).unwrap()).unwrap() <= 1e-12);
}

#[test]
fn link_over_one_shared_space_is_transposed_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = random_matrix(vec![l("Y", 3)], &mut rng);
    let n = random_matrix(vec![l("Y", 3)], &mut rng);
    let p = link_product(&m, &n).unwrap();
    let expect = (m.to_dmatrix().transpose() * n.to_dmatrix()).trace();
    assert!(p.spaces().is_empty());
    assert!((p.data()[0] - expect).norm() <= 1e-12);
}

#[test]
fn link_composes_channels() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ka = random_kraus(2, 2, 2, &mut rng);
    let kb = random_kraus(2, 2, 3, &mut rng);
    let a = ChoiObject::from_dmatrix(vec![l("X", 2), l("Y", 2)], &naive_choi(2, |e| apply_kraus(&ka, e))).unwrap();
    let b = ChoiObject::from_dmatrix(vec![l("Y", 2), l("Z", 2)], &naive_choi(2, |e| apply_kraus(&kb, e))).unwrap();
    let composed = naive_choi(2, |e| apply_kraus(&kb, &apply_kraus(&ka, e)));
    let p = link_product(&a, &b).unwrap();
    assert_eq!(p.space_names(), vec!["X", "Z"]);
    assert!((p.to_dmatrix() - composed).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-12);
}

#[test]
fn partial_trace_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let m = random_matrix(vec![l("A", 2), l("B", 3), l("C", 2)], &mut rng);
    let full = m.partial_trace(&["A", "B", "C"]).unwrap();
    assert!((full.data()[0] - m.trace()).norm() <= 1e-12);

    let ra = random_hermitian(vec![l("A", 2)], &mut rng);
    let rb = random_hermitian(vec![l("B", 3)], &mut rng);
    let prod = ra.tensor(&rb).unwrap().partial_trace(&["B"]).unwrap();
    assert!(prod.distance(&ra.scale(rb.trace())).unwrap() <= 1e-12);

    let mid = m.partial_trace(&["B"]).unwrap();
    let d = m.to_dmatrix();
    for a1 in 0..2 {
        for c1 in 0..2 {
            for a2 in 0..2 {
                for c2 in 0..2 {
                    let mut acc = C64::new(0.0, 0.0);
                    for b in 0..3 {
                        acc += d[(a1 * 6 + b * 2 + c1, a2 * 6 + b * 2 + c2)];
                    }
                    assert!((mid.get(a1 * 2 + c1, a2 * 2 + c2) - acc).norm() <= 1e-12);
                }
            }
        }
    }
    assert!(matches!(m.partial_trace(&["Q"]), Err(Error::UnknownSpace(_))));
}

#[test]
fn trace_and_replace_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let labels = vec![l("A", 2), l("X", 3), l("B", 2)];
    for _ in 0..10 {
        let a = random_hermitian(labels.clone(), &mut rng);
        let b = random_hermitian(labels.clone(), &mut rng);
        let ra = a.trace_and_replace("X").unwrap();
        assert!(ra.trace_and_replace("X").unwrap().distance(&ra).unwrap() <= 1e-12);
        let lhs = a.inner(&b.trace_and_replace("X").unwrap()).unwrap();
        let rhs = ra.inner(&b).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12);
        let om = a.one_minus("X").unwrap();
        assert!(om.partial_trace(&["X"]).unwrap().frobenius_norm() <= 1e-12);
    }
    let m = random_hermitian(vec![l("A", 2)], &mut rng);
    let one_x = ChoiObject::identity(vec![l("X", 3)]).unwrap();
    let w = one_x.tensor(&m).unwrap();
    assert!(w.trace_and_replace("X").unwrap().distance(&w).unwrap() <= 1e-12);
}

#[test]
fn apply_channel_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let g = gaussian(3, 3, &mut rng);
    let rho = &g * g.adjoint();
    let id = choi_of_isometry(&DMatrix::identity(3, 3), l("X", 3), vec![l("Y", 3)]).unwrap().outer().unwrap();
    let out = apply_channel(&id, &["X"], &rho).unwrap();
    assert!((out.to_dmatrix() - &rho).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-12);

    let u = random_unitary(3, &mut rng);
    let uc = choi_of_isometry(&u, l("X", 3), vec![l("Y", 3)]).unwrap().outer().unwrap();
    let out = apply_channel(&uc, &["X"], &rho).unwrap();
    assert!((out.to_dmatrix() - &u * &rho * u.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-12);

    let dep = ChoiObject::identity(vec![l("X", 3), l("Y", 3)]).unwrap().scale(C64::new(1.0 / 3.0, 0.0));
    let out = apply_channel(&dep, &["X"], &rho).unwrap();
    let expect = DMatrix::<C64>::identity(3, 3) * (rho.trace() / 3.0);
    assert!((out.to_dmatrix() - expect).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-12);

    assert!(matches!(apply_channel(&dep, &["X"], &DMatrix::identity(2, 2)), Err(Error::DimensionMismatch(_))));
}

#[test]
fn vector_link_matches_matrix_link() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let u = gaussian(4, 2, &mut rng);
    let v = gaussian(3, 4, &mut rng);
    let a = choi_vector_multi(&u, vec![l("X", 2)], vec![l("Y", 4)]).unwrap();
    let b = choi_vector_multi(&v, vec![l("Y", 4)], vec![l("Z", 3)]).unwrap();
    let vec_link = link_product(&a, &b).unwrap().outer().unwrap();
    let mat_link = link_product(&a.outer().unwrap(), &b.outer().unwrap()).unwrap();
    assert!(vec_link.distance(&mat_link).unwrap() <= 1e-10);
}

#[test]
fn json_dump_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let m = random_matrix(vec![l("A", 2), l("B", 2)], &mut rng);
    let back = ChoiObject::from_json(&m.to_json()).unwrap();
    assert_eq!(back, m);
}

#[test]
fn duplicate_spaces_collide() {
    let a = ChoiObject::identity(vec![l("A", 2)]).unwrap();
    assert!(matches!(a.tensor(&a), Err(Error::SpaceCollision(_))));
}

fn dims_strategy() -> impl Strategy<Value = (u64, [usize; 4])> {
    (any::<u64>(), [1usize..=3, 1usize..=3, 1usize..=3, 1usize..=2])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn link_product_commutes((seed, d) in dims_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(vec![l("A", d[0]), l("S", d[1])], &mut rng);
        let b = random_matrix(vec![l("S", d[1]), l("B", d[2])], &mut rng);
        let ab = link_product(&a, &b).unwrap();
        let ba = link_product(&b, &a).unwrap();
        prop_assert!(ab.distance(&ba).unwrap() <= 1e-12 * (1.0 + ab.frobenius_norm()));
    }

    #[test]
    fn link_product_associates((seed, d) in dims_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(vec![l("A", d[0]), l("S", d[1])], &mut rng);
        let b = random_matrix(vec![l("S", d[1]), l("T", d[2]), l("B", d[3])], &mut rng);
        let c = random_matrix(vec![l("T", d[2]), l("C", d[0])], &mut rng);
        let left = link_product(&link_product(&a, &b).unwrap(), &c).unwrap();
        let right = link_product(&a, &link_product(&b, &c).unwrap()).unwrap();
        prop_assert!(left.distance(&right).unwrap() <= 1e-12 * (1.0 + left.frobenius_norm()));
    }
}
