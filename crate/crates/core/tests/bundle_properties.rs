use std::sync::Arc;

use chernforge::arith::Rational;
use chernforge::chern::{chern_character, dual, line_power, tensor_line, universal_line, FormalBundle, LineBundle};
use chernforge::oracle::OracleContext;
use chernforge::ring::{CycleClass, RingModel};
use proptest::prelude::*;

fn universal(r: u32) -> (Arc<RingModel>, FormalBundle, LineBundle) {
    let model = OracleContext::new().bundle("E", r).line("L").universal_model(r).unwrap();
    let e = FormalBundle::from_universal(&model, "E", r).unwrap();
    let l = universal_line(&model, "L", true).unwrap();
    (model, e, l)
}

#[test]
fn twists_compose() {
    for r in 1..=4u32 {
        let (_, e, l) = universal(r);
        let el = tensor_line(&e, &l).unwrap();
        for m in 0..=r as i64 {
            let stepwise = tensor_line(&el, &line_power(&l, m)).unwrap();
            let direct = tensor_line(&e, &line_power(&l, m + 1)).unwrap();
            assert_eq!(stepwise.chern_classes(), direct.chern_classes(), "r={r} m={m}");
        }
        let back = tensor_line(&el, &line_power(&l, -1)).unwrap();
        assert_eq!(back.chern_classes(), e.chern_classes(), "untwist r={r}");
    }
}

#[test]
fn dual_is_an_involution() {
    for r in 1..=4u32 {
        let (_, e, l) = universal(r);
        let twisted = tensor_line(&e, &l).unwrap();
        assert_eq!(dual(&dual(&twisted)).chern_classes(), twisted.chern_classes());
        // (E⊗L)^∨ = E^∨ ⊗ L^{-1}
        let lhs = dual(&twisted);
        let rhs = tensor_line(&dual(&e), &line_power(&l, -1)).unwrap();
        assert_eq!(lhs.chern_classes(), rhs.chern_classes());
    }
}

proptest! {
    #[test]
    fn character_rank_in_degree_zero(coeffs in prop::collection::vec(-5i64..=5, 1..=3)) {
        let p4 = RingModel::projective_space(4);
        let h = CycleClass::generator(&p4, "H").unwrap();
        let chern: Vec<CycleClass> = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| h.pow(i as u32 + 1).scale(&Rational::from(c)))
            .collect();
        let e = FormalBundle::new("E", chern).unwrap();
        let ch = chern_character(&e, 4).unwrap();
        prop_assert_eq!(ch.degree_component(0), CycleClass::constant(&p4, coeffs.len() as i64));
    }
}
