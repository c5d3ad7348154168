use proptest::prelude::*;
use smq_conic::cone::{min_eigenvalue, project_psd, svec_len};

proptest! {
    #[test]
    fn psd_projection_is_idempotent(d in 1usize..6, seed in prop::collection::vec(-5.0f64..5.0, 21)) {
        let mut v = seed[..svec_len(d)].to_vec();
        project_psd(&mut v, d);
        prop_assert!(min_eigenvalue(&v, d) >= -1e-12);
        let once = v.clone();
        project_psd(&mut v, d);
        for (a, b) in once.iter().zip(&v) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }
}
