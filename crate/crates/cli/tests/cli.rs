use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn hofa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hofa"))
        .current_dir(dir)
        .args(args)
        .env("HOFA_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn workspace(files: &[(&str, &str)]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in files {
        fs::write(dir.path().join(name), body).unwrap();
    }
    dir
}

#[test]
fn bias_of_a_linear_form_is_zero() {
    let dir = workspace(&[("f.poly", "p=5; n=1; x1\n")]);
    let out = hofa(dir.path(), &["bias", "--poly", "f.poly", "--exact"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("bias=0.000000000000"), "{text}");
    assert!(text.contains("histogram=1,1,1,1,1"), "{text}");
}

#[test]
fn gowers_reports_the_u2_norm() {
    let dir = workspace(&[("f.poly", "p=5; n=1; x1^2 + x1\n")]);
    let out = hofa(dir.path(), &["gowers", "--poly", "f.poly", "--d", "2"]);
    assert_eq!(out.status.code(), Some(0));
    // Delta^2 f = 2 v1 v2 is a nondegenerate bilinear form: bias 1/5.
    let text = stdout(&out);
    assert!(text.contains("bias=0.200000000000"), "{text}");
    assert!(
        text.contains(&format!("norm={:.12}", 0.2f64.powf(0.25))),
        "{text}"
    );
}

#[test]
fn polarize_matches_the_worked_example() {
    let dir = workspace(&[("g.poly", "p=5; n=2; x1*x2\n")]);
    let out = hofa(
        dir.path(),
        &["polarize", "--poly", "g.poly", "--out", "rep"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out).trim(),
        "blocks=2; support=1,2; p=5; n=2; x1_1*x2_2 + x1_2*x2_1"
    );
    assert!(dir.path().join("rep/polarize.txt").exists());
}

#[test]
fn sampled_bias_is_deterministic_under_a_seed() {
    let dir = workspace(&[("f.poly", "p=7; n=3; x1*x2 + x3^2\n")]);
    let args = [
        "bias",
        "--poly",
        "f.poly",
        "--samples",
        "5000",
        "--seed",
        "3",
        "--format",
        "csv",
    ];
    let a = hofa(dir.path(), &args);
    let b = hofa(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).starts_with("label,method,p,total,bias"));
}

#[test]
fn degree_d1_pipeline_persists_a_run_directory() {
    let dir = workspace(&[("f.poly", "p=5; n=3; x1*x2*x3 + x1*x2\n")]);
    let out = hofa(
        dir.path(),
        &[
            "pipeline",
            "degree-d1",
            "--poly",
            "f.poly",
            "--d",
            "2",
            "--out",
            "run",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let line = stdout(&out);
    assert!(
        line.starts_with("cor=") && line.contains(" floor=") && line.contains(" degP="),
        "{line}"
    );
    let summary = fs::read_to_string(dir.path().join("run/summary.txt")).unwrap();
    let m: i32 = summary
        .lines()
        .find_map(|l| l.strip_prefix("m="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        line.contains(&format!("floor={:.12}", 5f64.powi(-m))),
        "{line}"
    );
    for name in ["input.poly", "correlation.cert", "notes.txt"] {
        assert!(dir.path().join("run").join(name).exists(), "{name}");
    }
    let verify = hofa(dir.path(), &["verify", "--cert", "run/correlation.cert"]);
    assert_eq!(verify.status.code(), Some(0), "{}", stderr(&verify));
}

#[test]
fn invalid_variety_certificate_exits_2() {
    let dir = workspace(&[
        ("f.poly", "p=5; n=2; x1*x2\n"),
        (
            "v.cert",
            "kind=variety\np=5; n=2; d=2\nf: x1*x2\nform{1}: x1_1\n",
        ),
    ]);
    let out = hofa(
        dir.path(),
        &[
            "pipeline", "degree-d", "--poly", "f.poly", "--d", "2", "--cert", "v.cert",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("invalid variety certificate"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn homogeneous_pipeline_rejects_high_degree() {
    let dir = workspace(&[("f.poly", "p=7; n=2; x1^2*x2^2\n")]);
    let out = hofa(
        dir.path(),
        &["pipeline", "homogeneous", "--poly", "f.poly", "--d", "2"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("precondition"), "{}", stderr(&out));
}

#[test]
fn parse_errors_name_line_and_column() {
    let dir = workspace(&[("f.poly", "p=5; n=2;\nx1 + x9\n")]);
    let out = hofa(dir.path(), &["bias", "--poly", "f.poly"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn malformed_inputs_never_panic() {
    let cases = [
        "",
        "p=4; n=1; x1",
        "p=5; n=1; x1^",
        "p=5; n=1; 7*x1",
        "p=5; n=one; x1",
        "kind=rkstar\np=5; n=2\nalpha: x1\n",
        "kind=partition-rank\np=5; n=2; blocks=2\ntarget: x1_1*x2_2\nq: x2_2\n",
        "kind=correlation\np=5; n=1; degree_bound=0; claimed_floor=abc; histogram=1,1,1,1,1\nf: x1\ncorrelator: 0\n",
    ];
    for (i, body) in cases.iter().enumerate() {
        let dir = workspace(&[("x.poly", body)]);
        for args in [
            &["bias", "--poly", "x.poly"][..],
            &["verify", "--cert", "x.poly"][..],
        ] {
            let out = hofa(dir.path(), args);
            let code = out.status.code();
            assert!(
                code == Some(2) || code == Some(1),
                "case {i} {args:?}: {code:?} {}",
                stderr(&out)
            );
            assert!(
                !stderr(&out).contains("panicked"),
                "case {i}: {}",
                stderr(&out)
            );
        }
    }
}

#[test]
fn flag_disagreement_is_a_precondition_error() {
    let dir = workspace(&[("f.poly", "p=5; n=1; x1\n")]);
    let out = hofa(dir.path(), &["bias", "--poly", "f.poly", "--p", "7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_errors_describe_the_envelope() {
    let dir = workspace(&[("f.poly", "p=7; n=6; x1*x2*x3\n")]);
    let out = hofa(
        dir.path(),
        &["bias", "--poly", "f.poly", "--budget", "1000"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("budget"), "{}", stderr(&out));
}

#[test]
fn check_suite_passes_and_is_reproducible() {
    let dir = workspace(&[]);
    let args = [
        "check",
        "--suite",
        "identities",
        "--trials",
        "10",
        "--seed",
        "7",
        "--format",
        "csv",
    ];
    let a = hofa(dir.path(), &args);
    let b = hofa(dir.path(), &args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(stdout(&a), stdout(&b));
    assert!(
        stdout(&a).lines().skip(1).all(|l| l.ends_with(",10,10,0")),
        "{}",
        stdout(&a)
    );
}

#[test]
fn injected_mutant_fails_with_a_counterexample() {
    let dir = workspace(&[]);
    let out = hofa(
        dir.path(),
        &[
            "check",
            "--suite",
            "identities",
            "--trials",
            "5",
            "--mutant",
            "semi-surjection",
            "--out",
            "rep",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("derivative-expansion"));
    let instance = fs::read_to_string(
        dir.path()
            .join("rep/counterexample-derivative-expansion.txt"),
    )
    .unwrap();
    assert!(instance.contains("p=5"), "{instance}");
}

#[test]
fn zero_trials_warns_and_passes() {
    let dir = workspace(&[]);
    let out = hofa(dir.path(), &["check", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn derive_along_a_direction() {
    let dir = workspace(&[("f.poly", "p=5; n=2; x1^2*x2\n")]);
    let out = hofa(
        dir.path(),
        &["derive", "--poly", "f.poly", "--direction", "1,0"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "p=5; n=2; 2*x1*x2");
}

#[test]
fn eval_reduces_negative_coordinates() {
    let dir = workspace(&[("f.poly", "p=5; n=2; x1*x2 + 3\n")]);
    let out = hofa(dir.path(), &["eval", "--poly", "f.poly", "--point", "-1,2"]);
    assert_eq!(stdout(&out).trim(), "value=1");
}
