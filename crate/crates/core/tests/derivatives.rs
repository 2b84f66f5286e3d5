mod common;

use hofa_core::poly::{iterated_derivative_recursive, iterated_derivative_semisurjection};
use hofa_core::{polarize, random, FieldSpec, Polynomial};
use proptest::prelude::*;
use rand::Rng;

fn instance(seed: u64) -> (Polynomial, usize) {
    let mut rng = random::rng(seed);
    let p = [3u64, 5, 7][rng.gen_range(0..3)];
    let spec = FieldSpec::new(p).unwrap();
    let n = rng.gen_range(1..=2);
    let d = rng.gen_range(1..=3);
    (
        random::polynomial(spec, n, rng.gen_range(0..=4), &mut rng),
        d,
    )
}

proptest! {
    #[test]
    fn both_expansions_agree(seed in any::<u64>()) {
        let (f, d) = instance(seed);
        prop_assert_eq!(iterated_derivative_semisurjection(&f, d), iterated_derivative_recursive(&f, d));
    }

    #[test]
    fn symbolic_derivative_matches_nested_differences(seed in any::<u64>()) {
        let (f, d) = instance(seed);
        let n = f.nvars();
        let p = f.spec().p();
        let delta = f.iterated_discrete_derivative(d);
        let mut rng = random::rng(seed.wrapping_add(1));
        for _ in 0..20 {
            let pt: Vec<u64> = (0..n * (d + 1)).map(|_| rng.gen_range(0..p)).collect();
            let dirs: Vec<Vec<u64>> = pt[..n * d].chunks(n).map(<[u64]>::to_vec).collect();
            prop_assert_eq!(common::eval(&delta, &pt), common::nested_difference(&f, &dirs, &pt[n * d..]));
        }
    }

    #[test]
    fn derivatives_lower_the_degree_in_the_point(seed in any::<u64>()) {
        let (f, d) = instance(seed);
        let n = f.nvars();
        let delta = f.iterated_discrete_derivative(d);
        let k = f.degree().finite().unwrap_or(0);
        for (m, _) in delta.terms() {
            let point: u32 = m.exps()[n * d..].iter().sum();
            prop_assert!(m.degree() <= k && point + d as u32 <= k);
        }
    }

    #[test]
    fn top_derivative_is_the_polarization(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let spec = FieldSpec::new([5u64, 7][rng.gen_range(0..2)]).unwrap();
        let n = rng.gen_range(1..=2);
        let d = rng.gen_range(1..=3);
        let low = random::polynomial(spec, n, d as u32 - 1, &mut rng);
        let top = random::form(spec, n, d as u32, &mut rng);
        let f = &low + top.poly();
        let directions: Vec<usize> = (0..n * d).collect();
        let expected = polarize(&top).poly().embed(n * (d + 1), &directions);
        prop_assert_eq!(f.iterated_discrete_derivative(d), expected);
    }

    #[test]
    fn single_differences_match_the_definition(seed in any::<u64>()) {
        let (f, _) = instance(seed);
        let mut rng = random::rng(seed ^ 7);
        let v = random::vector(f.spec(), f.nvars(), &mut rng);
        let dv = f.discrete_derivative_at(&v).unwrap();
        let vr: Vec<u64> = v.iter().map(|e| e.value()).collect();
        for x in common::points(f.spec().p(), f.nvars()) {
            prop_assert_eq!(common::eval(&dv, &x), common::nested_difference(&f, &[vr.clone()], &x));
        }
    }
}
