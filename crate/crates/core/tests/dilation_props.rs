mod common;

use dilatrix::dilation::{dilate, dilate_n_plus_one, intertwining_residual};
use dilatrix::linalg::{identity, op_norm};
use dilatrix::tol;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dilation_map_is_isometric_and_intertwines(seed in any::<u64>(), n in 2usize..=4) {
        let t = common::member(seed, n, 5);
        let (construction, result) = dilate(&t, tol::DEFAULT, None).unwrap();
        prop_assert!(result.certificate.passed(), "{:?}", result.certificate.failures().collect::<Vec<_>>());
        let gram = result.pi.adjoint() * &result.pi;
        prop_assert!(op_norm(&(gram - identity(t.dim()))) < 1e-9);
        for i in 0..n {
            let op = construction.triple.mult_op(i, result.degree);
            prop_assert!(intertwining_residual(&result.pi, &t.op(i).adjoint(), &op) < 1e-6);
        }
    }

    #[test]
    fn first_block_is_l(seed in any::<u64>()) {
        let t = common::member(seed, 3, 4);
        let (_, result) = dilate(&t, tol::DEFAULT, None).unwrap();
        prop_assert!(op_norm(&(result.block(0) - &result.l)) < 1e-14);
    }
}

#[test]
fn n_plus_one_dilation_certifies() {
    for seed in 0..4u64 {
        let t = common::member(seed, 2 + seed as usize % 2, 4);
        let x = common::commutant(&t, seed);
        let x = x.unscale(op_norm(&x).max(1.0));
        let d = dilate_n_plus_one(&t, &x, tol::DEFAULT, None).unwrap();
        assert!(d.certificate.passed(), "{:?}", d.certificate.failures().collect::<Vec<_>>());
    }
}

#[test]
fn insufficient_degree_is_reported() {
    let t = common::member(11, 2, 4);
    let rho = dilatrix::linalg::spectral_radius(&t.product()).unwrap();
    if rho > 1e-3 {
        assert!(matches!(
            dilate(&t, tol::DEFAULT, Some(1)),
            Err(dilatrix::Error::TruncationInsufficient { .. })
        ));
    }
}
