mod common;

use hofa_core::bias::{bias_exact, bias_sampled, correlation, histogram_exact, TOLERANCE};
use hofa_core::enumerate::DEFAULT_BUDGET;
use hofa_core::{random, FieldSpec, Polynomial};
use proptest::prelude::*;
use rand::Rng;

fn instance(seed: u64) -> Polynomial {
    let mut rng = random::rng(seed);
    let p = [2u64, 3, 5, 7][rng.gen_range(0..4)];
    let spec = FieldSpec::new(p).unwrap();
    let n = rng.gen_range(1..=3);
    random::polynomial(spec, n, rng.gen_range(0..=4), &mut rng)
}

proptest! {
    #[test]
    fn exact_bias_matches_direct_sum(seed in any::<u64>()) {
        let f = instance(seed);
        let report = bias_exact(&f).unwrap();
        prop_assert!((report.value - common::bias_value(&f)).norm() <= TOLERANCE);
        prop_assert!(report.magnitude <= 1.0 + TOLERANCE);
    }

    #[test]
    fn histogram_counts_every_point(seed in any::<u64>()) {
        let f = instance(seed);
        let h = histogram_exact(&f, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(h.total(), f.spec().p().pow(f.nvars() as u32));
        for x in common::points(f.spec().p(), f.nvars()).iter().take(1) {
            prop_assert!(h.count(hofa_core::FieldElement(common::eval(&f, x))) > 0);
        }
    }

    #[test]
    fn constants_and_negation_keep_the_magnitude(seed in any::<u64>(), c in 0u64..100) {
        let f = instance(seed);
        let spec = f.spec();
        let shifted = &f + &Polynomial::constant(spec, f.nvars(), spec.elem(c));
        let b = bias_exact(&f).unwrap().magnitude;
        prop_assert!((bias_exact(&shifted).unwrap().magnitude - b).abs() <= TOLERANCE);
        prop_assert!((bias_exact(&f.neg()).unwrap().magnitude - b).abs() <= TOLERANCE);
    }

    #[test]
    fn correlation_is_the_bias_of_the_difference(seed in any::<u64>()) {
        let f = instance(seed);
        let mut rng = random::rng(seed ^ 1);
        let g = random::polynomial(f.spec(), f.nvars(), 2, &mut rng);
        let c = correlation(&f, &g).unwrap().magnitude;
        prop_assert!((c - common::bias(&(&f - &g))).abs() <= TOLERANCE);
    }
}

#[test]
fn sampling_stays_within_its_interval() {
    let spec = FieldSpec::new(5).unwrap();
    let mut rng = random::rng(11);
    for seed in 0..20 {
        let f = random::polynomial(spec, 3, 3, &mut rng);
        let exact = bias_exact(&f).unwrap().magnitude;
        let sampled = bias_sampled(&f, 20_000, seed).unwrap();
        let w = sampled.half_width().unwrap();
        assert!(
            (sampled.magnitude - exact).abs() <= w,
            "{} vs {exact} (w = {w})",
            sampled.magnitude
        );
    }
}

#[test]
fn linear_forms_have_zero_bias() {
    let spec = FieldSpec::new(7).unwrap();
    let f = &Polynomial::var(spec, 2, 0) + &Polynomial::var(spec, 2, 1).scale(spec.elem(3));
    assert!(bias_exact(&f).unwrap().is_exactly_zero());
}
