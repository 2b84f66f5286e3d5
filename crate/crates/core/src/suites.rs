//! Seeded property suites over random instances.
//!
//! Each property draws its instances from its own ChaCha8 stream, so the
//! outcome depends only on the seed and the trial count. Failing instances
//! are serialized in the usual text formats; the shortest one is kept.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bias::{
    bias_exact_with_budget, check_avg_correlation_identity, check_bias_chain_rule,
    check_easy_direction, check_warning, derive_bias_bounds, gowers_norm, multilinear_bias,
    Estimate, TOLERANCE,
};
use crate::certfile::{polynomial_to_text, CertFile};
use crate::enumerate::DEFAULT_BUDGET;
use crate::error::{Error, Result};
use crate::field::{histogram_is_flat, histogram_to_bias, FieldElement, FieldSpec, ValueHistogram};
use crate::linalg::rank_of;
use crate::multilinear::{
    check_delta_nabla, polarize, polarize_by_derivative, DdViaPolarization, MultilinearForm,
};
use crate::pipeline::{pipeline_degree_d_plus_1, pipeline_homogeneous, Budgets};
use crate::poly::{
    iterated_derivative_recursive, iterated_derivative_semisurjection, monomials_of_degree,
    HomogeneousForm, Monomial, Polynomial,
};
use crate::random;
use crate::rank::{
    check_ar_pr_inequality, compress_decomposition, search_partition_rank, search_rank,
    DecompositionCert,
};
use crate::rkstar::{
    chain_rule_combine, combine_subadditive, derive_invariance_transform, lower_degree_correlation,
    perturbation, rkstar_from_homogeneous,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Inequalities,
    Certificates,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Suite> {
        match s {
            "identities" => Some(Suite::Identities),
            "inequalities" => Some(Suite::Inequalities),
            "certificates" => Some(Suite::Certificates),
            "all" => Some(Suite::All),
            _ => None,
        }
    }

    fn includes(self, group: Suite) -> bool {
        self == Suite::All || self == group
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Identities => "identities",
            Suite::Inequalities => "inequalities",
            Suite::Certificates => "certificates",
            Suite::All => "all",
        })
    }
}

/// Deliberate defects used to show that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mutant {
    /// Adds one to a coefficient of the semi-surjection expansion.
    SemiSurjection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub mutant: Option<Mutant>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub suite: Suite,
    pub name: &'static str,
    pub trials: usize,
    pub passed: usize,
    /// The shortest failing instance, serialized.
    pub counterexample: Option<String>,
}

impl PropertyResult {
    pub fn ok(&self) -> bool {
        self.passed == self.trials
    }
}

pub const CSV_HEADER: &str = "suite,property,trials,passed,failed";

pub fn to_csv(results: &[PropertyResult]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in results {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.suite,
            r.name,
            r.trials,
            r.passed,
            r.trials - r.passed
        ));
    }
    out
}

enum Outcome {
    Pass,
    Fail(String),
}

fn verdict(ok: bool, instance: impl FnOnce() -> String) -> Result<Outcome> {
    Ok(if ok {
        Outcome::Pass
    } else {
        Outcome::Fail(instance())
    })
}

type Check = fn(&mut ChaCha8Rng, Option<Mutant>) -> Result<Outcome>;

const PROPERTIES: &[(Suite, &str, Check)] = &[
    (
        Suite::Identities,
        "derivative-expansion",
        derivative_expansion,
    ),
    (Suite::Identities, "nested-differences", nested_differences),
    (Suite::Identities, "product-rule", product_rule),
    (Suite::Identities, "homogeneous-split", homogeneous_split),
    (
        Suite::Identities,
        "polarization-symmetry",
        polarization_symmetry,
    ),
    (
        Suite::Identities,
        "polarization-diagonal",
        polarization_diagonal,
    ),
    (Suite::Identities, "delta-nabla", delta_nabla),
    (
        Suite::Identities,
        "derivative-polarization",
        derivative_polarization,
    ),
    (Suite::Identities, "multilinearity", multilinearity),
    (Suite::Identities, "avg-cor", avg_cor),
    (Suite::Identities, "bias-chain", bias_chain),
    (Suite::Identities, "gowers-two-path", gowers_two_path),
    (Suite::Inequalities, "histogram-bounds", histogram_bounds),
    (Suite::Inequalities, "easy-direction", easy_direction),
    (Suite::Inequalities, "derive-bias", derive_bias),
    (
        Suite::Inequalities,
        "gowers-monotonicity",
        gowers_monotonicity,
    ),
    (Suite::Inequalities, "warning", warning),
    (Suite::Inequalities, "ar-floor", ar_floor),
    (Suite::Certificates, "rank-search", rank_search),
    (Suite::Certificates, "compression", compression),
    (Suite::Certificates, "bilinear-rank", bilinear_rank),
    (Suite::Certificates, "derive-rkstar", derive_rkstar),
    (Suite::Certificates, "subadditivity", subadditivity),
    (Suite::Certificates, "chain-rule", chain_rule),
    (Suite::Certificates, "perturbation", perturbation_density),
    (
        Suite::Certificates,
        "pipeline-homogeneous",
        pipeline_homogeneous_sound,
    ),
    (Suite::Certificates, "pipeline-degree-d1", pipeline_d1_sound),
];

/// Names of the properties in a suite, in run order.
pub fn property_names(suite: Suite) -> Vec<&'static str> {
    PROPERTIES
        .iter()
        .filter(|(g, _, _)| suite.includes(*g))
        .map(|(_, n, _)| *n)
        .collect()
}

fn stream_id(name: &str) -> u64 {
    // FNV-1a, so streams do not depend on property order.
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn run_suite(suite: Suite, config: SuiteConfig) -> Vec<PropertyResult> {
    PROPERTIES
        .iter()
        .filter(|(g, _, _)| suite.includes(*g))
        .map(|&(group, name, check)| {
            let mut passed = 0;
            let mut counterexample: Option<String> = None;
            for trial in 0..config.trials {
                let mut rng = random::rng(config.seed);
                rng.set_stream(stream_id(name) ^ trial as u64);
                let failure = match check(&mut rng, config.mutant) {
                    Ok(Outcome::Pass) => None,
                    Ok(Outcome::Fail(instance)) => Some(instance),
                    Err(e) => Some(format!("# error: {e}")),
                };
                match failure {
                    None => passed += 1,
                    Some(text) => {
                        let text = format!(
                            "# property {name}, seed {}, trial {trial}\n{text}",
                            config.seed
                        );
                        if counterexample.as_ref().is_none_or(|c| text.len() < c.len()) {
                            counterexample = Some(text);
                        }
                    }
                }
            }
            PropertyResult {
                suite: group,
                name,
                trials: config.trials,
                passed,
                counterexample,
            }
        })
        .collect()
}

fn field<R: Rng>(rng: &mut R, primes: &[u64]) -> FieldSpec {
    FieldSpec::new(primes[rng.gen_range(0..primes.len())]).expect("prime")
}

fn poly_text(f: &Polynomial) -> String {
    polynomial_to_text(f)
}

fn with_c(text: String, c: &[FieldElement]) -> String {
    let c: Vec<String> = c.iter().map(|x| x.value().to_string()).collect();
    format!("{text}# c = ({})\n", c.join(","))
}

fn derivative_expansion(rng: &mut ChaCha8Rng, mutant: Option<Mutant>) -> Result<Outcome> {
    let spec = FieldSpec::new(5)?;
    let n = rng.gen_range(1..=3);
    let d = rng.gen_range(1..=3);
    let deg = rng.gen_range(0..=4);
    let f = random::polynomial(spec, n, deg, rng);
    let mut fast = iterated_derivative_semisurjection(&f, d);
    if mutant == Some(Mutant::SemiSurjection) {
        let m = fast
            .terms()
            .next()
            .map(|(m, _)| m.clone())
            .unwrap_or_else(|| Monomial::one(fast.nvars()));
        fast.add_term(m, FieldElement::ONE);
    }
    let slow = iterated_derivative_recursive(&f, d);
    verdict(fast == slow, || format!("{}# d = {d}\n", poly_text(&f)))
}

fn nested_differences(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = FieldSpec::new(3)?;
    let n = 2;
    let d = rng.gen_range(1..=3);
    let f = random::polynomial(spec, n, rng.gen_range(0..=4), rng);
    let dd = f.iterated_discrete_derivative(d).evaluator();
    let fev = f.evaluator();
    let p = spec.p();
    let mut ok = true;
    crate::enumerate::for_each_point(p, n * (d + 1), |pt| {
        let x = &pt[n * d..];
        // Inclusion-exclusion over subsets of the directions.
        let mut acc = 0u64;
        for mask in 0u32..(1 << d) {
            let mut y = x.to_vec();
            for t in 0..d {
                if mask >> t & 1 == 1 {
                    for i in 0..n {
                        y[i] = (y[i] + pt[t * n + i]) % p;
                    }
                }
            }
            let v = fev.eval_raw(&y);
            let sign_negative = (d as u32 - mask.count_ones()) % 2 == 1;
            acc = if sign_negative {
                (acc + p - v) % p
            } else {
                (acc + v) % p
            };
        }
        ok &= acc == dd.eval_raw(pt);
    });
    verdict(ok, || format!("{}# d = {d}\n", poly_text(&f)))
}

fn product_rule(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[5, 7]);
    let n = rng.gen_range(1..=3);
    let f = random::polynomial(spec, n, rng.gen_range(0..=3), rng);
    let g = random::polynomial(spec, n, rng.gen_range(0..=3), rng);
    let c = random::vector(spec, n, rng);
    let lhs = f.mul(&g)?.formal_derivative(&c)?;
    let rhs = f
        .mul(&g.formal_derivative(&c)?)?
        .add(&f.formal_derivative(&c)?.mul(&g)?)?;
    // Linearity in c.
    let c2 = random::vector(spec, n, rng);
    let sum: Vec<FieldElement> = c.iter().zip(&c2).map(|(&a, &b)| spec.add(a, b)).collect();
    let linear =
        f.formal_derivative(&sum)? == f.formal_derivative(&c)?.add(&f.formal_derivative(&c2)?)?;
    verdict(lhs == rhs && linear, || {
        format!("{}{}", poly_text(&f), with_c(poly_text(&g), &c))
    })
}

fn homogeneous_split(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[3, 5, 7]);
    let f = random::polynomial(spec, rng.gen_range(1..=3), rng.gen_range(0..=4), rng);
    let mut acc = Polynomial::zero(spec, f.nvars());
    for i in 0..=4 {
        acc = acc.add(f.homogeneous_component(i).poly())?;
    }
    verdict(acc == f, || poly_text(&f))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn polarization_symmetry(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[5, 7]);
    let k = rng.gen_range(1..=4);
    let g = random::form(spec, rng.gen_range(1..=3), k, rng);
    let t = polarize(&g);
    let mut ok = polarize_by_derivative(&g).poly() == t.poly();
    for perm in permutations(k as usize) {
        ok &= t.permute_blocks(&perm)?.poly() == t.poly();
    }
    verdict(ok, || poly_text(g.poly()))
}

fn polarization_diagonal(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[5, 7]);
    let k = rng.gen_range(1..=4);
    let g = random::form(spec, rng.gen_range(1..=3), k, rng);
    let ok = polarize(&g).diagonal() == g.poly().scale(spec.factorial(k as u64));
    verdict(ok, || poly_text(g.poly()))
}

fn delta_nabla(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[5, 7]);
    let n = rng.gen_range(1..=3);
    let g = random::form(spec, n, rng.gen_range(1..=4), rng);
    let c = random::vector(spec, n, rng);
    verdict(check_delta_nabla(&g, &c)?, || {
        with_c(poly_text(g.poly()), &c)
    })
}

fn derivative_polarization(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = FieldSpec::new(5)?;
    let n = 2;
    let d = rng.gen_range(1..=2);
    let g = random::form(spec, n, d as u32 + 1, rng);
    let via = DdViaPolarization::new(&g)?;
    let dd = g.poly().iterated_discrete_derivative(d).evaluator();
    let mut ok = true;
    crate::enumerate::for_each_point(spec.p(), n * (d + 1), |pt| {
        ok &= dd.eval_raw(pt) == via.eval_raw(&pt[..n * d], &pt[n * d..]);
    });
    verdict(ok, || poly_text(g.poly()))
}

fn multilinearity(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[3, 5, 7]);
    let n = rng.gen_range(1..=3);
    let blocks = rng.gen_range(1..=3);
    let t = random::multilinear(spec, n, blocks, rng);
    let mut pts: Vec<Vec<FieldElement>> =
        (0..blocks).map(|_| random::vector(spec, n, rng)).collect();
    let slot = rng.gen_range(0..blocks);
    let (a, b) = (random::element(spec, rng), random::element(spec, rng));
    let (u, w) = (random::vector(spec, n, rng), random::vector(spec, n, rng));
    let mix: Vec<FieldElement> = u
        .iter()
        .zip(&w)
        .map(|(&x, &y)| spec.add(spec.mul(a, x), spec.mul(b, y)))
        .collect();
    pts[slot] = mix;
    let lhs = t.evaluate(&pts)?;
    pts[slot] = u;
    let tu = t.evaluate(&pts)?;
    pts[slot] = w;
    let tw = t.evaluate(&pts)?;
    verdict(lhs == spec.add(spec.mul(a, tu), spec.mul(b, tw)), || {
        t.to_text()
    })
}

fn avg_cor(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[3, 5]);
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=2);
    let g = random::polynomial(spec, n, rng.gen_range(0..=3), rng);
    let a: Vec<Polynomial> = (0..m)
        .map(|_| random::polynomial(spec, n, rng.gen_range(0..=2), rng))
        .collect();
    let check = check_avg_correlation_identity(&g, &a, DEFAULT_BUDGET)?;
    verdict(check.holds(), || {
        let mut s = poly_text(&g);
        for ai in &a {
            s.push_str(&format!("# A: {}", poly_text(ai)));
        }
        s
    })
}

fn bias_chain(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[3, 5]);
    let nx = rng.gen_range(1..=2);
    let ny = rng.gen_range(1..=2);
    let n = nx + ny;
    // A = sum_i x_i a_i(y), B = B(y).
    let mut a = Polynomial::zero(spec, n);
    let ymap: Vec<usize> = (nx..n).collect();
    for i in 0..nx {
        let ai = random::polynomial(spec, ny, rng.gen_range(0..=2), rng).embed(n, &ymap);
        a = a.add(&Polynomial::var(spec, n, i).mul(&ai)?)?;
    }
    let b = random::polynomial(spec, ny, rng.gen_range(0..=3), rng).embed(n, &ymap);
    let check = check_bias_chain_rule(&a, &b, nx, DEFAULT_BUDGET)?;
    verdict(check.holds(), || {
        format!("# nx = {nx}\n{}# B: {}", poly_text(&a), poly_text(&b))
    })
}

fn gowers_two_path(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[3, 5]);
    let n = rng.gen_range(1..=2);
    let d = rng.gen_range(1..=2);
    let f = random::polynomial(spec, n, rng.gen_range(0..=3), rng);
    let report = gowers_norm(
        &f,
        d,
        Estimate::Exact {
            budget: DEFAULT_BUDGET,
        },
    )?;
    let direct = bias_exact_with_budget(&iterated_derivative_recursive(&f, d), DEFAULT_BUDGET)?;
    let ok = report.derivative.histogram == direct.histogram
        && (report.norm - direct.magnitude.powf(1.0 / (1u32 << d) as f64)).abs() <= TOLERANCE;
    verdict(ok, || format!("{}# d = {d}\n", poly_text(&f)))
}

fn histogram_bounds(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[2, 3, 5, 7, 11]);
    let counts: Vec<u64> = (0..spec.p()).map(|_| rng.gen_range(0..20)).collect();
    let mut h = ValueHistogram::from_counts(counts.clone());
    if h.total() == 0 {
        h.record(FieldElement::ZERO);
    }
    let b = histogram_to_bias(&h, spec)?;
    let level = rng.gen_range(1..5);
    let flat = ValueHistogram::from_counts(vec![level; spec.p() as usize]);
    let flat_zero = histogram_is_flat(&flat) && histogram_to_bias(&flat, spec)?.magnitude <= 1e-12;
    // Pooling a partition preserves the sum.
    let pooled = h.clone().merged(&flat);
    let lin = histogram_to_bias(&pooled, spec)?.value * pooled.total() as f64
        - (b.value * h.total() as f64);
    let ok = b.magnitude <= 1.0 + 1e-12 && flat_zero && lin.norm() <= 1e-9 * pooled.total() as f64;
    verdict(ok, || format!("# p = {}, counts = {counts:?}\n", spec.p()))
}

fn easy_direction(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = FieldSpec::new(3)?;
    let f = random::polynomial(spec, 2, 3, rng);
    verdict(check_easy_direction(&f, 2, DEFAULT_BUDGET)?.holds, || {
        poly_text(&f)
    })
}

fn derive_bias(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = FieldSpec::new(5)?;
    let f = random::polynomial(spec, 2, 3, rng);
    let r = derive_bias_bounds(&f, 2, DEFAULT_BUDGET)?;
    let ok = r.histograms_match
        && r.first_holds
        && r.second_holds
        && r.derivative_bias <= r.max_bound + TOLERANCE;
    verdict(ok, || poly_text(&f))
}

fn gowers_monotonicity(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[3, 5]);
    let n = rng.gen_range(1..=2);
    let d = rng.gen_range(1..=2);
    let f = random::polynomial(spec, n, rng.gen_range(0..=3), rng);
    let exact = Estimate::Exact {
        budget: DEFAULT_BUDGET,
    };
    let lo = gowers_norm(&f, d, exact)?.norm;
    let hi = gowers_norm(&f, d + 1, exact)?.norm;
    verdict(hi + TOLERANCE >= lo, || {
        format!("{}# d = {d}\n", poly_text(&f))
    })
}

fn warning(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[3, 5]);
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=3);
    let a: Vec<Polynomial> = (0..m)
        .map(|_| random::polynomial(spec, n, rng.gen_range(1..=2), rng))
        .collect();
    let check = check_warning(&a, n, spec, DEFAULT_BUDGET)?;
    verdict(check.holds, || a.iter().map(poly_text).collect())
}

fn ar_floor(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = FieldSpec::new(3)?;
    let d = rng.gen_range(1..=3);
    let n = rng.gen_range(1..=2);
    let t = random::nonzero_multilinear(spec, n, d, rng);
    let b = multilinear_bias(&t, DEFAULT_BUDGET)?.magnitude;
    let ar = -b.ln() / 3f64.ln();
    verdict(ar + TOLERANCE >= 0.5f64.powi(d as i32), || t.to_text())
}

fn random_decomposition(
    rng: &mut ChaCha8Rng,
    spec: FieldSpec,
    n: usize,
    k: u32,
    r: usize,
) -> DecompositionCert {
    loop {
        let factors: Vec<(HomogeneousForm, HomogeneousForm)> = (0..r)
            .map(|_| {
                let a = rng.gen_range(1..=k / 2);
                (
                    random::nonzero_form(spec, n, a, rng),
                    random::nonzero_form(spec, n, k - a, rng),
                )
            })
            .collect();
        let sum = factors
            .iter()
            .fold(Polynomial::zero(spec, n), |acc, (a, b)| {
                acc.add(&a.poly().mul(b.poly()).expect("ring"))
                    .expect("ring")
            });
        if !sum.is_zero() {
            return DecompositionCert {
                target: HomogeneousForm::new(sum, k).expect("homogeneous"),
                factors,
            };
        }
    }
}

fn rank_search(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[3, 5]);
    let n = rng.gen_range(1..=2);
    let k = rng.gen_range(2..=3);
    let g = random::form(spec, n, k, rng);
    let ok = match search_rank(&g, n, 1 << 20) {
        crate::rank::SearchOutcome::Found(c) => c.verify().is_valid() && c.len() <= n,
        _ => false,
    };
    verdict(ok, || poly_text(g.poly()))
}

fn compression(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[3, 5, 7]);
    let n = rng.gen_range(1..=3);
    let k = rng.gen_range(2..=4);
    let r = rng.gen_range(1..=4);
    let cert = random_decomposition(rng, spec, n, k, r);
    let out = compress_decomposition(&cert)?;
    let mut independent = true;
    for a in 1..k {
        let basis = monomials_of_degree(n, a);
        let vs: Vec<Vec<FieldElement>> = out
            .factors
            .iter()
            .filter(|(x, _)| x.degree() == a)
            .map(|(x, _)| x.poly().coefficient_vector(&basis).expect("homogeneous"))
            .collect();
        independent &= rank_of(spec, &vs) == vs.len();
    }
    let ok = independent
        && out.verify().is_valid()
        && out.target == cert.target
        && out.len() <= cert.len();
    verdict(ok, || CertFile::Decomposition(cert.clone()).to_text())
}

/// Rank by elimination on a dense matrix, independent of `linalg`.
fn elimination_rank(p: u64, mut rows: Vec<Vec<u64>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = (1..p)
            .find(|&x| x * rows[rank][col] % p == 1)
            .expect("field");
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let factor = rows[r][col] * inv % p;
                for c in 0..cols {
                    rows[r][c] = (rows[r][c] + p * p - factor * rows[rank][c] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn bilinear_rank(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = field(rng, &[3, 5, 7]);
    let p = spec.p();
    let n = rng.gen_range(1..=6);
    let target_rank = rng.gen_range(0..=n);
    // A product of random n x r and r x n matrices, so low ranks occur.
    let left: Vec<Vec<u64>> = (0..n)
        .map(|_| (0..target_rank).map(|_| rng.gen_range(0..p)).collect())
        .collect();
    let right: Vec<Vec<u64>> = (0..target_rank)
        .map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect())
        .collect();
    let m: Vec<Vec<u64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..target_rank)
                        .map(|t| left[i][t] * right[t][j])
                        .sum::<u64>()
                        % p
                })
                .collect()
        })
        .collect();
    let mut poly = Polynomial::zero(spec, 2 * n);
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            poly.add_term(
                Monomial::from_variable_tuple(2 * n, &[i, n + j]),
                FieldElement(v),
            );
        }
    }
    let t = MultilinearForm::with_support(poly, n, 2, [0, 1].into_iter().collect())?;
    let expected = elimination_rank(p, m.clone());
    let ok = match search_partition_rank(&t, n, 1 << 20) {
        crate::rank::SearchOutcome::Found(c) => {
            c.verify().is_valid()
                && c.len() == expected
                && check_ar_pr_inequality(&c, DEFAULT_BUDGET)?.holds
        }
        _ => false,
    };
    verdict(ok, || t.to_text())
}

fn random_compressed(rng: &mut ChaCha8Rng, min_k: u32) -> Result<DecompositionCert> {
    let spec = field(rng, &[5, 7]);
    let n = rng.gen_range(1..=3);
    let k = rng.gen_range(min_k..=4);
    let r = rng.gen_range(1..=2);
    loop {
        let c = compress_decomposition(&random_decomposition(rng, spec, n, k, r))?;
        if !c.is_empty() {
            return Ok(c);
        }
    }
}

fn derive_rkstar(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let cert = random_compressed(rng, 2)?;
    let spec = cert.target.spec();
    let c = random::vector(spec, cert.target.nvars(), rng);
    let out = derive_invariance_transform(&cert, &c)?;
    let g = cert.target.poly();
    let ok = out.verify().is_valid()
        && out.len() <= 2 * cert.len()
        && out.target == g.add(&g.formal_derivative(&c)?)?;
    verdict(ok, || {
        with_c(CertFile::Decomposition(cert.clone()).to_text(), &c)
    })
}

fn subadditivity(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let c1 = random_compressed(rng, 3)?;
    let spec = c1.target.spec();
    let n = c1.target.nvars();
    let k2 = rng.gen_range(2..c1.target.degree());
    let r2 = rng.gen_range(1..=2);
    let c2 = compress_decomposition(&random_decomposition(rng, spec, n, k2, r2))?;
    let (r1, r2) = (rkstar_from_homogeneous(&c1)?, rkstar_from_homogeneous(&c2)?);
    let out = combine_subadditive(&r1, &r2)?;
    let ok = out.verify().is_valid() && out.len() <= r1.len() + r2.len();
    verdict(ok, || {
        format!(
            "{}{}",
            CertFile::Decomposition(c1.clone()).to_text(),
            CertFile::Decomposition(c2.clone()).to_text()
        )
    })
}

fn chain_rule(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let g = random_compressed(rng, 3)?;
    let spec = g.target.spec();
    let n = g.target.nvars();
    let c = random::vector(spec, n, rng);
    let r2 = rng.gen_range(1..=2);
    let hc = compress_decomposition(&random_decomposition(
        rng,
        spec,
        n,
        g.target.degree() - 1,
        r2,
    ))?;
    let hc_rk = rkstar_from_homogeneous(&hc)?;
    let out = chain_rule_combine(&g, &hc_rk, &c)?;
    let ok = out.verify().is_valid() && out.len() <= 2 * g.len() + hc.len();
    verdict(ok, || {
        with_c(CertFile::Decomposition(g.clone()).to_text(), &c)
    })
}

const CORRELATION_BUDGET: u64 = 20_000_000;

fn perturbation_density(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let g = random_compressed(rng, 3)?;
    let spec = g.target.spec();
    let c = random::vector(spec, g.target.nvars(), rng);
    let rk = derive_invariance_transform(&g, &c)?;
    let pert = perturbation(&rk, DEFAULT_BUDGET)?;
    let k = rk.target.degree().finite().expect("nonzero");
    let mut ok = pert.verify(DEFAULT_BUDGET)?.is_valid() && pert.m() <= 2 * rk.len();
    // The exhaustive best combination costs p^(m+n) evaluations; past the
    // correlation budget only the zero-set density is checked.
    let cost = (spec.p() as f64).powi((pert.m() + g.target.nvars()) as i32);
    if cost <= CORRELATION_BUDGET as f64 {
        let corr = lower_degree_correlation(&pert, CORRELATION_BUDGET)?;
        ok &= corr.exact_bias() + TOLERANCE >= corr.claimed_floor
            && corr.correlator.degree().finite().is_none_or(|d| d + 2 <= k);
    }
    verdict(ok, || CertFile::RkStar(rk.clone()).to_text())
}

fn pipeline_homogeneous_sound(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = FieldSpec::new(5)?;
    let f = random::nonzero_form(spec, 2, 3, rng);
    let run = pipeline_homogeneous(&f, 2, None, Budgets::default())?;
    let ok = run.cert.verify(DEFAULT_BUDGET)?.is_ok() && run.cert.correlator.degree().is_below(2);
    verdict(ok, || poly_text(f.poly()))
}

fn pipeline_d1_sound(rng: &mut ChaCha8Rng, _: Option<Mutant>) -> Result<Outcome> {
    let spec = FieldSpec::new(5)?;
    let f = random::polynomial(spec, 2, 3, rng);
    let run = match pipeline_degree_d_plus_1(&f, 2, None, None, Budgets::default()) {
        Ok(run) => run,
        Err(e @ (Error::StageFailed { .. } | Error::Internal(_))) => {
            return Ok(Outcome::Fail(format!("# {e}\n{}", poly_text(&f))))
        }
        Err(e) => return Err(e),
    };
    let ok = run.cert.verify(DEFAULT_BUDGET)?.is_ok() && run.cert.correlator.degree().is_below(2);
    verdict(ok, || poly_text(&f))
}
