mod common;

use dilatrix::gen;
use dilatrix::lifting::{
    commutant_defect_check, intertwiner_y, lift_commutant, theta_sup, TransferRealization,
};
use dilatrix::linalg::{c64, op_norm, scalar, zeros};
use dilatrix::{tol, Complex64, ComplexMatrix};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lift_of_commutant_is_contractive_and_intertwines(seed in any::<u64>(), n in 2usize..=3) {
        let t = common::member(seed, n, 4);
        let x = common::commutant(&t, seed);
        let x = x.unscale(op_norm(&x).max(1e-12));
        let pipe = lift_commutant(&t, &x, tol::DEFAULT, None).unwrap();
        prop_assert!(pipe.lift.certificate.passed(), "{:?}", pipe.lift.certificate.failures().collect::<Vec<_>>());
        prop_assert!(pipe.verification.passed(), "{:?}", pipe.verification.failures().collect::<Vec<_>>());
        let check = commutant_defect_check(&pipe.construction.triple, &pipe.lift.theta, 1e-8);
        prop_assert!(check.passed(), "{:?}", check.failures().collect::<Vec<_>>());
    }

    #[test]
    fn lift_preserves_norm(seed in any::<u64>()) {
        let t = common::member(seed, 2, 4);
        let x = common::commutant(&t, seed.wrapping_add(1));
        let norm = op_norm(&x);
        prop_assume!(norm > 1e-6);
        let pipe = lift_commutant(&t, &x.unscale(norm), tol::DEFAULT, None).unwrap();
        let (sup, _) = theta_sup(&pipe.lift, 512);
        prop_assert!((sup * norm - norm).abs() < 1e-6 * norm.max(1.0), "sup {sup}");
    }

    #[test]
    fn m_theta_action_matches_dense_matrix(seed in any::<u64>()) {
        let t = common::member(seed, 2, 3);
        let x = common::commutant(&t, seed);
        let x = x.unscale(op_norm(&x).max(1.0));
        let pipe = lift_commutant(&t, &x, tol::DEFAULT, None).unwrap();
        let dense = pipe.lift.m_theta().matrix();
        let v = pipe.dilation.pi.clone();
        prop_assert!(op_norm(&(&dense * &v - pipe.lift.apply_m_theta(&v))) < 1e-10);
    }

    #[test]
    fn transfer_coefficients_sum_to_evaluation(seed in any::<u64>(), k in 1usize..=3, g in 1usize..=2) {
        let real = gen::gen_commuting_realization(seed, k, g).unwrap().realization;
        let coeffs = real.coefficients(400);
        let z = c64(0.3, -0.2);
        let mut sum = zeros(real.dim_k(), real.dim_k());
        let mut zk = c64(1.0, 0.0);
        for c in &coeffs {
            sum += c * zk;
            zk *= z;
        }
        prop_assert!(op_norm(&(sum - real.eval(z).unwrap())) < 1e-10);
    }

    #[test]
    fn intertwiner_exists_for_commuting_realizations(seed in any::<u64>(), k in 1usize..=3, g in 1usize..=2) {
        let cr = gen::gen_commuting_realization(seed, k, g).unwrap();
        let y = intertwiner_y(&cr.realization, &cr.u, 1e-8).unwrap();
        prop_assert!(y.certificate.passed(), "{:?}", y.certificate.failures().collect::<Vec<_>>());
    }
}

#[test]
fn scalar_realization_evaluates_to_moebius_free_form() {
    // W = [[0, 1], [1, 0]] gives Θ(z) = z.
    let w = TransferRealization::new(scalar(c64(0.0, 0.0)), scalar(c64(1.0, 0.0)), scalar(c64(1.0, 0.0)), scalar(c64(0.0, 0.0))).unwrap();
    let z = Complex64::new(0.2, 0.5);
    assert!((w.eval(z).unwrap()[(0, 0)] - z).norm() < 1e-15);
    assert!(w.is_unitary(1e-14));
}

#[test]
fn non_commutant_is_rejected() {
    let t = common::member(5, 2, 4);
    let dim = t.dim();
    if dim < 2 {
        return;
    }
    let mut x: ComplexMatrix = zeros(dim, dim);
    x[(0, 1)] = c64(1.0, 0.0);
    if dilatrix::lifting::commutant_residual(&t, &x) > 1e-6 {
        assert!(lift_commutant(&t, &x, tol::DEFAULT, None).is_err());
    }
}
