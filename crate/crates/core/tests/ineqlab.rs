use csbp_lab::ineqlab::{
    find_box_constant, young_check, young_sides, BoxExponents, BoxLemma, YoungInputs, YoungVariant,
};
use csbp_lab::rng::path_rng;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    /// Equality of the weighted form needs p·u = q·v; of the plain form, u = v.
    #[test]
    fn young_equality_points(p in 1.01f64..20.0, lu in -4.0f64..4.0) {
        let q = p / (p - 1.0);
        let u = 10f64.powf(lu);
        let [(l, r), _] = young_sides(u, p * u / q, p);
        prop_assert!((l - r).abs() <= 1e-10 * l, "{l} vs {r}");
        let [_, (l, r)] = young_sides(u, u, p);
        prop_assert!((l - r).abs() <= 1e-10 * l, "{l} vs {r}");
        let [(l, r), (l2, r2)] = young_sides(u, 3.0 * u, p);
        prop_assert!(l > r && l2 >= r2);
    }
}

fn interior_exponents() -> BoxExponents {
    BoxExponents {
        r1: -0.3,
        r2: -0.3,
        theta1: 0.0,
        theta2: 0.0,
        kappa1: 0.8,
        kappa2: 0.8,
        rho1: 2.0,
        rho2: 2.0,
    }
}

#[test]
fn box_conclusion_holds_on_sub_boxes() {
    let e = interior_exponents();
    let cs = [1.0, 1.0, 3.0, 3.0];
    let rep = find_box_constant(BoxLemma::PowersOverInteraction, &e, &cs).unwrap();
    assert!(rep.satisfied);
    let c = rep.constant.unwrap();
    let mut rng = path_rng(8, 0);
    for shrink in [1.0, 0.5, 0.1, 1e-3] {
        for _ in 0..500 {
            let x = c * shrink * rand::Rng::random::<f64>(&mut rng);
            let y = c * shrink * rand::Rng::random::<f64>(&mut rng);
            let lhs = cs[0] * x.powf(e.r1 + e.rho1) + cs[1] * y.powf(e.r2 + e.rho2);
            let rhs = cs[2] * x.powf(e.theta1 - 1.0 + e.rho1) * y.powf(e.kappa1)
                + cs[3] * y.powf(e.theta2 - 1.0 + e.rho2) * x.powf(e.kappa2);
            assert!(lhs >= rhs * (1.0 - 1e-12), "({x},{y}) in box {c}");
        }
    }
}

#[test]
fn reports_are_reproducible() {
    for variant in [YoungVariant::Young, YoungVariant::PowerMean] {
        let run = || young_check(variant, &YoungInputs::default(), 500, &mut path_rng(21, 3)).unwrap();
        assert_eq!(format!("{:?}", run()), format!("{:?}", run()));
    }
    let e = interior_exponents();
    let a = find_box_constant(BoxLemma::PowersOverInteraction, &e, &[1.0, 1.0, 3.0, 3.0]).unwrap();
    let b = find_box_constant(BoxLemma::PowersOverInteraction, &e, &[1.0, 1.0, 3.0, 3.0]).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}
