mod common;

use hofa_core::bias::TOLERANCE;
use hofa_core::certfile::{write_run, CertFile};
use hofa_core::enumerate::DEFAULT_BUDGET;
use hofa_core::pipeline::{
    pipeline_degree_d, pipeline_degree_d_plus_1, pipeline_homogeneous, variety_from_pr_cert,
    Budgets, PipelineRun,
};
use hofa_core::rank::search_partition_rank;
use hofa_core::{parse_polynomial, polarize, random, FieldSpec, HomogeneousForm};
use proptest::prelude::*;
use rand::Rng;

fn sound(run: &PipelineRun, d: u32) -> Result<(), TestCaseError> {
    let cert = &run.cert;
    let direct = common::bias(&(&cert.f - &cert.correlator));
    prop_assert!((direct - cert.exact_bias()).abs() <= TOLERANCE);
    prop_assert!(direct + TOLERANCE >= cert.claimed_floor);
    prop_assert!(cert.correlator.degree().is_below(d));
    prop_assert!(cert.verify(DEFAULT_BUDGET).unwrap().is_ok());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn homogeneous_pipeline_is_sound(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let spec = FieldSpec::new([5u64, 7][rng.gen_range(0..2)]).unwrap();
        let f = random::nonzero_form(spec, 2, 3, &mut rng);
        let run = pipeline_homogeneous(&f, 2, None, Budgets::default()).unwrap();
        sound(&run, 2)?;
        let r = run.summary.length("r").unwrap() as i32;
        prop_assert_eq!(run.cert.claimed_floor, (spec.p() as f64).powi(-2 * r));
    }

    #[test]
    fn degree_d_pipeline_is_sound(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let spec = FieldSpec::new(5).unwrap();
        let n = rng.gen_range(1..=2);
        let f = random::polynomial(spec, n, 2, &mut rng);
        let top = HomogeneousForm::new(f.homogeneous_component(2).into_poly(), 2).unwrap();
        let pr = search_partition_rank(&polarize(&top), n, DEFAULT_BUDGET).found().unwrap();
        let variety = variety_from_pr_cert(&pr).unwrap();
        sound(&pipeline_degree_d(&f, 2, &variety, Budgets::default()).unwrap(), 2)?;
    }

    #[test]
    fn degree_d_plus_1_pipeline_is_sound(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let spec = FieldSpec::new([5u64, 7][rng.gen_range(0..2)]).unwrap();
        let f = random::polynomial(spec, 2, 3, &mut rng);
        let run = pipeline_degree_d_plus_1(&f, 2, None, None, Budgets::default()).unwrap();
        sound(&run, 2)?;
        prop_assert!(run.cert.exact_bias() <= common::affine_correlation(&f) + TOLERANCE);
    }
}

#[test]
fn fast_path_floor_is_the_root_of_the_derivative_bias() {
    let f = parse_polynomial("p=7; n=2; x1^2 + 3*x1*x2 + x2").unwrap();
    let run = pipeline_degree_d_plus_1(&f, 1, None, None, Budgets::default()).unwrap();
    assert!(run.cert.correlator.is_zero());
    let cor = common::bias(&f);
    assert!((cor * cor - common::bias(&f.iterated_discrete_derivative(1))).abs() <= TOLERANCE);
}

#[test]
fn run_directory_certificates_verify() {
    let f = parse_polynomial("p=5; n=3; x1*x2*x3 + 2*x1*x2 + x3").unwrap();
    let run = pipeline_degree_d_plus_1(&f, 2, None, None, Budgets::default()).unwrap();
    let dir = std::env::temp_dir().join(format!("hofa-pipeline-test-{}", std::process::id()));
    write_run(&run, &dir).unwrap();
    let mut certs = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "cert") {
            let file = CertFile::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
            assert!(
                file.verify(DEFAULT_BUDGET).unwrap().is_valid(),
                "{}",
                path.display()
            );
            certs += 1;
        }
    }
    std::fs::remove_dir_all(&dir).unwrap();
    assert!(certs >= 2);
}
