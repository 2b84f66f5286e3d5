mod common;

use hofa_core::bias::bias_exact;
use hofa_core::certfile::CertFile;
use hofa_core::enumerate::DEFAULT_BUDGET;
use hofa_core::rank::{
    compress_decomposition, search_partition_rank, search_rank, DecompositionCert, SearchOutcome,
};
use hofa_core::rkstar::{derive_invariance_transform, perturbation, RkStarCert};
use hofa_core::{parse_polynomial, polarize, random, FieldSpec, HomogeneousForm, Polynomial};
use proptest::prelude::*;
use rand::Rng;

fn poly(s: &str) -> Polynomial {
    parse_polynomial(s).unwrap()
}

fn form(s: &str) -> HomogeneousForm {
    HomogeneousForm::from_polynomial(poly(s)).unwrap()
}

/// `target = sum alpha beta` at every point.
fn pointwise(target: &Polynomial, factors: &[(Polynomial, Polynomial)]) -> bool {
    let p = target.spec().p();
    common::points(p, target.nvars()).iter().all(|x| {
        let s = factors.iter().fold(0, |s, (a, b)| {
            (s + common::eval(a, x) * common::eval(b, x)) % p
        });
        s == common::eval(target, x)
    })
}

proptest! {
    #[test]
    fn found_decompositions_are_correct(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let spec = FieldSpec::new([3u64, 5][rng.gen_range(0..2)]).unwrap();
        let n = rng.gen_range(1..=2);
        let g = random::form(spec, n, rng.gen_range(2..=3), &mut rng);
        let SearchOutcome::Found(cert) = search_rank(&g, n, 1 << 20) else {
            return Err(TestCaseError::fail("rank above n"));
        };
        prop_assert!(cert.verify().is_valid() && cert.len() <= n);
        let factors: Vec<_> = cert.factors.iter().map(|(a, b)| (a.poly().clone(), b.poly().clone())).collect();
        prop_assert!(pointwise(g.poly(), &factors));
        let compressed = compress_decomposition(&cert).unwrap();
        prop_assert!(compressed.verify().is_valid() && compressed.len() <= cert.len());
    }

    #[test]
    fn certificate_files_round_trip(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let spec = FieldSpec::new(5).unwrap();
        let g = random::nonzero_form(spec, 2, 3, &mut rng);
        let cert = search_rank(&g, 2, 1 << 20).found().unwrap();
        let file = CertFile::Decomposition(cert.clone());
        let back = CertFile::parse(&file.to_text()).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert!(back.verify(DEFAULT_BUDGET).unwrap().is_valid());
        let c = random::vector(spec, 2, &mut rng);
        let compressed = compress_decomposition(&cert).unwrap();
        if !compressed.is_empty() {
            let rk = derive_invariance_transform(&compressed, &c).unwrap();
            prop_assert!(pointwise(&rk.target, &rk.factors));
            let rk_file = CertFile::RkStar(rk);
            prop_assert_eq!(CertFile::parse(&rk_file.to_text()).unwrap(), rk_file);
        }
    }
}

#[test]
fn quadratic_forms_have_rank_one_products() {
    let g = form("p=5; n=2; x1*x2");
    let cert = search_rank(&g, 2, 1 << 20).found().unwrap();
    assert_eq!(cert.len(), 1);
    assert!(search_rank(&g, 0, 1 << 20).is_absent());
}

#[test]
fn tampered_decomposition_is_rejected() {
    let g = form("p=5; n=2; x1*x2 + x2^2");
    let mut cert = search_rank(&g, 2, 1 << 20).found().unwrap();
    cert.target = form("p=5; n=2; x1*x2");
    assert!(!cert.verify().is_valid());
    let text = CertFile::Decomposition(cert).to_text();
    assert!(!CertFile::parse(&text)
        .unwrap()
        .verify(DEFAULT_BUDGET)
        .unwrap()
        .is_valid());
}

#[test]
fn shifted_linear_term_has_no_rkstar_certificate() {
    // f(x, y) = x1 x2 + y1 is unbiased, and writing y1 as 1 * y1 puts a
    // constant left factor on a term of degree above k - 2.
    let f = poly("p=3; n=3; x1*x2 + x3");
    assert!(bias_exact(&f).unwrap().is_exactly_zero());
    let cert = RkStarCert {
        target: f.clone(),
        factors: vec![
            (poly("p=3; n=3; x1"), poly("p=3; n=3; x2")),
            (poly("p=3; n=3; 1"), poly("p=3; n=3; x3")),
        ],
    };
    assert!(pointwise(&cert.target, &cert.factors));
    assert!(!cert.verify().is_valid());
}

#[test]
fn perturbation_generators_cut_a_dense_zero_set() {
    let cert = DecompositionCert {
        target: form("p=5; n=3; x1*x2*x3"),
        factors: vec![(form("p=5; n=3; x1"), form("p=5; n=3; x2*x3"))],
    };
    let c = [5u64, 1, 2].map(|v| FieldSpec::new(5).unwrap().elem(v));
    let rk = derive_invariance_transform(&cert, &c).unwrap();
    let pert = perturbation(&rk, DEFAULT_BUDGET).unwrap();
    assert!(pert.verify(DEFAULT_BUDGET).unwrap().is_valid());
    let zeros = common::common_zeros(&pert.generators, 5, 3);
    assert_eq!(zeros, pert.zero_count);
    assert!(zeros * 5u64.pow(pert.m() as u32) >= 125);
}

#[test]
fn bilinear_partition_rank_of_the_identity() {
    let t = hofa_core::MultilinearForm::parse(
        "blocks=2; support=1,2; p=7; n=3; x1_1*x2_1 + x1_2*x2_2 + x1_3*x2_3",
    )
    .unwrap();
    let cert = search_partition_rank(&t, 3, DEFAULT_BUDGET)
        .found()
        .unwrap();
    assert_eq!(cert.len(), 3);
    assert!(search_partition_rank(&t, 2, DEFAULT_BUDGET).is_absent());
    let g = form("p=7; n=2; x1*x2*x2");
    assert!(search_partition_rank(&polarize(&g), 2, DEFAULT_BUDGET)
        .found()
        .unwrap()
        .verify()
        .is_valid());
}
