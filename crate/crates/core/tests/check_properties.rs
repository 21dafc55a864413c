use chernforge::arith::Rational;
use chernforge::checks::{kleiman_smooth_bound, verify_syzygy_identity, Sign, SyzygyInstance};
use chernforge::chern::FormalBundle;
use chernforge::ring::{CycleClass, RingModel};
use proptest::prelude::*;

proptest! {
    #[test]
    fn syzygy_sign_flip(p in 1u32..=4, z in -5i64..=5, n in -5i64..=5, c in -30i64..=30, plus in any::<bool>()) {
        let p5 = RingModel::projective_space(5);
        let h = CycleClass::generator(&p5, "H").unwrap();
        let chern = (1..=p).map(|i| h.pow(i).scale(&Rational::from(if i == p { c } else { 1 }))).collect();
        let e = FormalBundle::new("E", chern).unwrap();
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let inst = SyzygyInstance::new(h.pow(p).scale(&Rational::from(z)), e, n, sign, p).unwrap();
        let flipped = SyzygyInstance { z: inst.z.neg(), sign: sign.flip(), ..inst.clone() };
        let a = verify_syzygy_identity(&inst).unwrap();
        let b = verify_syzygy_identity(&flipped).unwrap();
        prop_assert_eq!(a.holds, b.holds);
        prop_assert_eq!(a.residual, b.residual);
    }

    #[test]
    fn kleiman_is_monotone(d in 0u32..=40, i in 0u32..=40) {
        prop_assume!(i <= d);
        if kleiman_smooth_bound(d, i).unwrap() {
            for j in 0..i {
                prop_assert!(kleiman_smooth_bound(d, j).unwrap());
            }
        }
    }
}
