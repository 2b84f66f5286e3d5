use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hofa_core::bias::{bias_with, gowers_norm, BiasReport, Estimate};
use hofa_core::certfile::{polynomial_to_text, write_run, CertFile};
use hofa_core::enumerate::DEFAULT_BUDGET;
use hofa_core::multilinear::polarize;
use hofa_core::pipeline::{
    pipeline_degree_d, pipeline_degree_d_plus_1, pipeline_homogeneous, Budgets, PipelineRun,
};
use hofa_core::poly::{format_body, VarNaming};
use hofa_core::rank::Verdict;
use hofa_core::suites::{run_suite, to_csv, Mutant, Suite, SuiteConfig};
use hofa_core::{parse_polynomial, Error, FieldElement, HomogeneousForm, Polynomial};

#[derive(Parser)]
#[command(
    name = "hofa",
    version,
    about = "Exact higher-order Fourier analysis over prime fields"
)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Expected field size; checked against input files
    #[arg(long, global = true)]
    p: Option<u64>,

    /// Expected variable count; checked against input files
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Enumerate exhaustively (the default)
    #[arg(long, global = true, conflicts_with = "samples")]
    exact: bool,

    /// Estimate by Monte Carlo with this many samples
    #[arg(long, global = true)]
    samples: Option<u64>,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Cap on point evaluations per exhaustive sweep
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,

    /// Cap on subspace choices per certificate search
    #[arg(long, global = true, default_value_t = 1_000_000)]
    search_budget: u64,

    /// Directory for report files
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads; HOFA_THREADS overrides the default
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum PipelineName {
    Homogeneous,
    DegreeD,
    DegreeD1,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Identities,
    Inequalities,
    Certificates,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutantName {
    SemiSurjection,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a polynomial at a point
    Eval {
        #[arg(long)]
        poly: PathBuf,
        /// Comma-separated coordinates
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Bias of a polynomial
    Bias {
        #[arg(long)]
        poly: PathBuf,
    },
    /// Gowers U^d norm through bias(Delta^d f)
    Gowers {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        d: usize,
    },
    /// Symbolic Delta^d f, or the formal derivative along a direction
    Derive {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, required_unless_present = "direction")]
        d: Option<usize>,
        /// Comma-separated direction c for the formal derivative
        #[arg(long, conflicts_with = "d", allow_hyphen_values = true)]
        direction: Option<String>,
    },
    /// Polarization of a homogeneous form
    Polarize {
        #[arg(long)]
        poly: PathBuf,
    },
    /// Run a correlation pipeline and persist its artifacts
    Pipeline {
        #[arg(value_enum)]
        name: PipelineName,
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        d: usize,
        /// Partition-rank (homogeneous), variety (degree-d) or decomposition
        /// of the top part (degree-d1) certificate
        #[arg(long)]
        cert: Option<PathBuf>,
        /// Decomposition of h - d_c g for degree-d1
        #[arg(long)]
        hc_cert: Option<PathBuf>,
    },
    /// Run property suites
    Check {
        #[arg(long, value_enum, default_value_t = SuiteName::All)]
        suite: SuiteName,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Inject a known defect to confirm the suite catches it
        #[arg(long, value_enum, hide = true)]
        mutant: Option<MutantName>,
    },
    /// Re-check a certificate file
    Verify {
        #[arg(long)]
        cert: PathBuf,
    },
}

enum Failure {
    Error(Error),
    /// A check ran and reported a failure.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.common.threads.or_else(|| {
        std::env::var("HOFA_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads.filter(|&t| t > 0) {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            if e.is_caller_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: &Cli) -> CmdResult {
    let c = &cli.common;
    match &cli.command {
        Command::Eval { poly, point } => {
            let f = load_poly(poly, c)?;
            let x = parse_point(point, &f)?;
            let v = f.evaluate(&x)?;
            emit(c, "eval", &format!("value={v}\n"), &format!("value\n{v}\n"))
        }
        Command::Bias { poly } => {
            let f = load_poly(poly, c)?;
            let report = bias_with(&f, estimate(c))?;
            emit(c, "bias", &report.to_record(), &csv(&report, "f"))
        }
        Command::Gowers { poly, d } => {
            let f = load_poly(poly, c)?;
            let g = gowers_norm(&f, *d, estimate(c))?;
            let text = format!(
                "order={}\nnorm={:.12}\n{}",
                g.order,
                g.norm,
                g.derivative.to_record()
            );
            let table = format!(
                "order,norm,{}\n{},{:.12},{}\n",
                BiasReport::CSV_HEADER,
                g.order,
                g.norm,
                g.derivative.to_csv_row("derivative")
            );
            emit(c, "gowers", &text, &table)
        }
        Command::Derive { poly, d, direction } => {
            let f = load_poly(poly, c)?;
            let text = match (d, direction) {
                (_, Some(dir)) => polynomial_to_text(&f.formal_derivative(&parse_point(dir, &f)?)?),
                (Some(d), None) => {
                    let dd = f.iterated_discrete_derivative(*d);
                    let naming = VarNaming::Blocks {
                        per_block: f.nvars(),
                    };
                    format!(
                        "blocks={}; p={}; n={}; {}\n",
                        d + 1,
                        f.spec().p(),
                        f.nvars(),
                        format_body(&dd, &naming)
                    )
                }
                (None, None) => unreachable!("clap requires one of --d and --direction"),
            };
            emit(c, "derive", &text, &text)
        }
        Command::Polarize { poly } => {
            let f = load_poly(poly, c)?;
            let g = homogeneous(f)?;
            let text = format!("{}\n", polarize(&g).to_text());
            emit(c, "polarize", &text, &text)
        }
        Command::Pipeline {
            name,
            poly,
            d,
            cert,
            hc_cert,
        } => pipeline(c, *name, poly, *d, cert.as_deref(), hc_cert.as_deref()),
        Command::Check {
            suite,
            trials,
            mutant,
        } => check(c, *suite, *trials, *mutant),
        Command::Verify { cert } => {
            let file = load_cert(cert)?;
            match file.verify(c.budget)? {
                Verdict::Valid => {
                    println!("valid kind={}", file.kind());
                    Ok(())
                }
                Verdict::Invalid(why) => Err(Failure::Check(format!(
                    "invalid kind={}: {why}",
                    file.kind()
                ))),
            }
        }
    }
}

fn estimate(c: &Common) -> Estimate {
    match c.samples {
        Some(samples) if !c.exact => Estimate::Sampled {
            samples,
            seed: c.seed,
        },
        _ => Estimate::Exact { budget: c.budget },
    }
}

fn csv(report: &BiasReport, label: &str) -> String {
    format!("{}\n{}\n", BiasReport::CSV_HEADER, report.to_csv_row(label))
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::precondition(format!("cannot read {}: {e}", path.display())))
}

fn load_poly(path: &Path, c: &Common) -> Result<Polynomial, Error> {
    let f = parse_polynomial(&read(path)?)?;
    if let Some(p) = c.p.filter(|&p| p != f.spec().p()) {
        return Err(Error::precondition(format!(
            "--p {p} disagrees with p={} in {}",
            f.spec().p(),
            path.display()
        )));
    }
    if let Some(n) = c.n.filter(|&n| n != f.nvars()) {
        return Err(Error::precondition(format!(
            "--n {n} disagrees with n={} in {}",
            f.nvars(),
            path.display()
        )));
    }
    Ok(f)
}

fn load_cert(path: &Path) -> Result<CertFile, Error> {
    CertFile::parse(&read(path)?)
}

fn homogeneous(f: Polynomial) -> Result<HomogeneousForm, Error> {
    if !f.is_homogeneous() {
        return Err(Error::precondition("expected a homogeneous form"));
    }
    HomogeneousForm::from_polynomial(f)
}

fn parse_point(s: &str, f: &Polynomial) -> Result<Vec<FieldElement>, Error> {
    let x = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map(|v| f.spec().from_i64(v))
                .map_err(|_| Error::precondition(format!("bad coordinate `{}`", t.trim())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if x.len() != f.nvars() {
        return Err(Error::ArityMismatch {
            left: f.nvars(),
            right: x.len(),
        });
    }
    Ok(x)
}

/// Prints the report and mirrors it into `--out` when given.
fn emit(c: &Common, stem: &str, text: &str, table: &str) -> CmdResult {
    let (body, ext) = match c.format {
        Format::Text => (text, "txt"),
        Format::Csv => (table, "csv"),
    };
    print!("{body}");
    if let Some(dir) = &c.out {
        write_file(&dir.join(format!("{stem}.{ext}")), body)?;
    }
    Ok(())
}

fn write_file(path: &Path, body: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| Error::precondition(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, body)
        .map_err(|e| Error::precondition(format!("cannot write {}: {e}", path.display())))
}

fn decomposition(path: Option<&Path>) -> Result<Option<hofa_core::rank::DecompositionCert>, Error> {
    match path.map(load_cert).transpose()? {
        None => Ok(None),
        Some(CertFile::Decomposition(d)) => Ok(Some(d)),
        Some(other) => Err(Error::InvalidCertificate(format!(
            "expected a decomposition certificate, got {}",
            other.kind()
        ))),
    }
}

fn pipeline(
    c: &Common,
    name: PipelineName,
    poly: &Path,
    d: usize,
    cert: Option<&Path>,
    hc: Option<&Path>,
) -> CmdResult {
    let f = load_poly(poly, c)?;
    let budgets = Budgets {
        eval: c.budget,
        search: c.search_budget,
    };
    let run: PipelineRun = match name {
        PipelineName::Homogeneous => {
            let pr = match cert.map(load_cert).transpose()? {
                None => None,
                Some(CertFile::PartitionRank(pr)) => Some(pr),
                Some(other) => {
                    return Err(Error::InvalidCertificate(format!(
                        "expected a partition-rank certificate, got {}",
                        other.kind()
                    ))
                    .into())
                }
            };
            pipeline_homogeneous(&homogeneous(f)?, d, pr.as_ref(), budgets)?
        }
        PipelineName::DegreeD => {
            let path = cert.ok_or_else(|| {
                Error::precondition("degree-d needs a variety certificate (--cert)")
            })?;
            let variety = match load_cert(path)? {
                CertFile::Variety { cert, .. } => cert,
                other => {
                    return Err(Error::InvalidCertificate(format!(
                        "expected a variety certificate, got {}",
                        other.kind()
                    ))
                    .into())
                }
            };
            pipeline_degree_d(&f, d, &variety, budgets)?
        }
        PipelineName::DegreeD1 => {
            let g = decomposition(cert)?;
            let h = decomposition(hc)?;
            pipeline_degree_d_plus_1(&f, d, g.as_ref(), h.as_ref(), budgets)?
        }
    };
    let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("hofa-run"));
    write_run(&run, &dir)?;
    println!("{}", run.cert.summary_line());
    Ok(())
}

fn check(c: &Common, suite: SuiteName, trials: usize, mutant: Option<MutantName>) -> CmdResult {
    let suite = match suite {
        SuiteName::Identities => Suite::Identities,
        SuiteName::Inequalities => Suite::Inequalities,
        SuiteName::Certificates => Suite::Certificates,
        SuiteName::All => Suite::All,
    };
    if trials == 0 {
        eprintln!("warning: --trials 0 runs nothing; every property passes vacuously");
    }
    let config = SuiteConfig {
        trials,
        seed: c.seed,
        mutant: mutant.map(|MutantName::SemiSurjection| Mutant::SemiSurjection),
    };
    let results = run_suite(suite, config);
    let table = to_csv(&results);
    let mut text = String::new();
    for r in &results {
        let status = if r.ok() { "PASS" } else { "FAIL" };
        text.push_str(&format!(
            "{status} {}/{} {}/{}\n",
            r.suite, r.name, r.passed, r.trials
        ));
    }
    emit(c, "check", &text, &table)?;
    if let Some(dir) = &c.out {
        if c.format == Format::Text {
            write_file(&dir.join("check.csv"), &table)?;
        }
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.ok()).collect();
    if failed.is_empty() {
        return Ok(());
    }
    let mut msg = String::new();
    for r in &failed {
        let instance = r.counterexample.as_deref().unwrap_or("");
        if let Some(dir) = &c.out {
            write_file(
                &dir.join(format!("counterexample-{}.txt", r.name)),
                instance,
            )?;
        }
        msg.push_str(&format!(
            "property {} failed; minimal instance:\n{instance}",
            r.name
        ));
    }
    Err(Failure::Check(msg))
}
