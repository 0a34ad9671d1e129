mod common;

use dilatrix::gen::{self, GenKind, GenSpec};
use dilatrix::linalg::{op_norm, spectral_radius};
use dilatrix::opcore::class_membership;
use dilatrix::{tol, Error};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn compressions_are_members(seed in any::<u64>(), n in 2usize..=4, degree in 1usize..=3) {
        let spec = GenSpec::new(seed, n, vec![degree, 2], GenKind::BclCompression);
        match gen::generate(&spec) {
            Ok(g) => {
                prop_assert!(g.triple.is_some());
                prop_assert!(spectral_radius(&g.tuple.product()).unwrap() < 1.0);
                prop_assert!(class_membership(&g.tuple, tol::DEFAULT).unwrap().is_member);
            }
            Err(e) => prop_assert_eq!(e, Error::DegenerateSubspace),
        }
    }

    #[test]
    fn direct_sums_are_members(seed in any::<u64>(), n in 1usize..=4, a in 1usize..=3, b in 0usize..=2) {
        let spec = GenSpec::new(seed, n, vec![a, b], GenKind::DirectSum);
        let t = gen::generate(&spec).unwrap().tuple;
        prop_assert_eq!(t.dim(), a + b);
        prop_assert!(class_membership(&t, tol::DEFAULT).unwrap().is_member);
    }

    #[test]
    fn generated_commutants_commute(seed in any::<u64>(), n in 2usize..=3) {
        let t = common::member(seed, n, 5);
        let x = common::commutant(&t, seed);
        let scale = op_norm(&x).max(1.0);
        prop_assert!(dilatrix::lifting::commutant_residual(&t, &x) < 1e-10 * scale);
    }
}

#[test]
fn kinds_parse_from_names() {
    assert_eq!("direct_sum".parse::<GenKind>().unwrap(), GenKind::DirectSum);
    assert_eq!("bcl_compression".parse::<GenKind>().unwrap(), GenKind::BclCompression);
    assert_eq!("scalar".parse::<GenKind>().unwrap(), GenKind::Scalar);
    assert!(matches!("other".parse::<GenKind>(), Err(Error::InvalidParameter(_))));
}

#[test]
fn scalar_kind_is_one_dimensional() {
    let t = gen::generate(&GenSpec::new(7, 3, vec![], GenKind::Scalar)).unwrap().tuple;
    assert_eq!(t.dim(), 1);
    assert_eq!(t.len(), 3);
}
