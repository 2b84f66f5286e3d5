use hofa_core::multilinear::{polarize_by_derivative, polarize_by_permutations};
use hofa_core::{
    depolarize, parse_polynomial, polarize, random, FieldSpec, HomogeneousForm, MultilinearForm,
};
use proptest::prelude::*;
use rand::Rng;

fn instance(seed: u64) -> HomogeneousForm {
    let mut rng = random::rng(seed);
    let spec = FieldSpec::new([5u64, 7, 11][rng.gen_range(0..3)]).unwrap();
    let n = rng.gen_range(1..=3);
    random::form(spec, n, rng.gen_range(1..=4), &mut rng)
}

proptest! {
    #[test]
    fn polarization_is_symmetric(seed in any::<u64>(), rot in 0usize..4) {
        let g = instance(seed);
        let t = polarize(&g);
        let k = t.blocks();
        let perm: Vec<usize> = (0..k).map(|b| (b + rot) % k).collect();
        let permuted = t.permute_blocks(&perm).unwrap();
        prop_assert_eq!(permuted.poly(), t.poly());
    }

    #[test]
    fn polarization_is_multilinear(seed in any::<u64>()) {
        let g = instance(seed);
        let spec = g.spec();
        let t = polarize(&g);
        let mut rng = random::rng(seed ^ 3);
        let mut pts: Vec<Vec<_>> = (0..t.blocks()).map(|_| random::vector(spec, t.n(), &mut rng)).collect();
        let u = random::vector(spec, t.n(), &mut rng);
        let (a, b) = (random::element(spec, &mut rng), random::element(spec, &mut rng));
        let w = pts[0].clone();
        let mixed: Vec<_> = w.iter().zip(&u).map(|(&x, &y)| spec.add(spec.mul(a, x), spec.mul(b, y))).collect();
        pts[0] = mixed;
        let lhs = t.evaluate(&pts).unwrap();
        pts[0] = w;
        let tw = t.evaluate(&pts).unwrap();
        pts[0] = u;
        let tu = t.evaluate(&pts).unwrap();
        prop_assert_eq!(lhs, spec.add(spec.mul(a, tw), spec.mul(b, tu)));
    }

    #[test]
    fn both_constructions_agree(seed in any::<u64>()) {
        let g = instance(seed);
        prop_assert_eq!(polarize_by_permutations(&g), polarize_by_derivative(&g));
    }

    #[test]
    fn diagonal_recovers_the_form(seed in any::<u64>()) {
        let g = instance(seed);
        let t = polarize(&g);
        let k = g.degree();
        prop_assert_eq!(t.diagonal(), g.poly().scale(g.spec().factorial(k as u64)));
        prop_assert_eq!(depolarize(&t, k).unwrap(), g);
    }

    #[test]
    fn text_round_trip(seed in any::<u64>()) {
        let t = polarize(&instance(seed));
        prop_assert_eq!(MultilinearForm::parse(&t.to_text()).unwrap(), t);
    }
}

#[test]
fn cube_polarizes_to_six_times_the_product() {
    let g = HomogeneousForm::from_polynomial(parse_polynomial("p=7; n=1; x1^3").unwrap()).unwrap();
    assert_eq!(
        polarize(&g).to_text(),
        "blocks=3; support=1,2,3; p=7; n=1; 6*x1_1*x2_1*x3_1"
    );
}

#[test]
fn depolarize_rejects_small_characteristic() {
    let g =
        HomogeneousForm::from_polynomial(parse_polynomial("p=3; n=2; x1*x2*x2").unwrap()).unwrap();
    assert!(depolarize(&polarize(&g), 3).is_err());
}
