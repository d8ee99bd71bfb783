use std::sync::Arc;

use proptest::prelude::*;
use quaddr::action::ActionModel;
use quaddr::complex::QuadComplex;
use quaddr::engine::{oracle_total, total_cohomology};
use quaddr::group::GroupModel;
use quaddr::identities::{check_element, cup_laws, Sampler};
use quaddr::model::build_transformation_model;
use quaddr::space::SpaceModel;

fn weighted(affine: i32, laurent: i32) -> QuadComplex {
    let g = GroupModel::torus(&["g"]);
    let b = SpaceModel::new(vec![
        ("x".into(), quaddr::space::CoordKind::Affine),
        ("t".into(), quaddr::space::CoordKind::Torus),
    ]);
    let a = ActionModel::monomial(&g, &b, &[vec![affine, laurent]]).unwrap();
    let m = build_transformation_model(g, b, a).unwrap().with_window(1, 1);
    QuadComplex::new(Arc::new(m)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn relations_hold_on_random_elements(affine in -2i32..=2, laurent in -2i32..=2, seed in any::<u64>()) {
        let cx = weighted(affine, laurent);
        let mut s = Sampler::new(&cx, seed, 2).unwrap();
        for _ in 0..4 {
            let x = s.element().unwrap();
            let r = check_element(&cx, &x);
            prop_assert!(r.passed(), "{:?}", r.witnesses());
        }
    }

    #[test]
    fn cup_laws_on_random_weights(affine in -2i32..=2, laurent in -2i32..=2, seed in any::<u64>()) {
        let cx = weighted(affine, laurent);
        let r = cup_laws(&cx, 4, 4, seed).unwrap();
        prop_assert!(r.passed(), "{:?}", r.witnesses());
    }

    #[test]
    fn sectors_close_and_match_the_oracle(affine in -1i32..=1, laurent in -1i32..=1) {
        let cx = weighted(affine, laurent);
        let k = total_cohomology(&cx, 1).unwrap();
        let o = oracle_total(&cx, 1).unwrap();
        prop_assert_eq!(k.dims, o.dims);
    }
}
