//! Correlation pipelines: from a polynomial (plus decomposition
//! certificates where needed) to a verified lower-degree correlator.

use crate::bias::{
    best_combination, bias_exact_with_budget, derive_bias_bounds, multilinear_bias, zero_set,
    BiasReport, TOLERANCE,
};
use crate::enumerate::{sweep_count, DEFAULT_BUDGET};
use crate::error::{Error, Result};
use crate::field::FieldElement;
use crate::multilinear::{polarize, MultilinearForm};
use crate::poly::{Degree, Evaluator, HomogeneousForm, Monomial, Polynomial};
use crate::rank::{
    compress_decomposition, search_partition_rank, search_rank, DecompositionCert,
    PartitionRankCert, SearchOutcome, Verdict,
};
use crate::rkstar::{chain_rule_combine, perturbation, PerturbationCert, RkStarCert};

/// A correlating polynomial with its exact bias and the floor the
/// construction guarantees.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCert {
    pub f: Polynomial,
    /// The correlator `P`.
    pub correlator: Polynomial,
    /// `deg(P)` is at most this.
    pub degree_bound: u32,
    /// `bias(f - P)`, exact.
    pub exact: BiasReport,
    pub claimed_floor: f64,
    /// Pipeline name followed by notes on intermediate artifacts.
    pub provenance: Vec<String>,
}

impl CorrelationCert {
    pub fn exact_bias(&self) -> f64 {
        self.exact.magnitude
    }

    /// Recomputes `bias(f - P)` from scratch and checks the histogram, the
    /// degree bound and the floor.
    pub fn verify(&self, budget: u64) -> Result<std::result::Result<(), String>> {
        if let Degree::Finite(k) = self.correlator.degree() {
            if k > self.degree_bound {
                return Ok(Err(format!(
                    "deg(P) = {k} exceeds the bound {}",
                    self.degree_bound
                )));
            }
        }
        let fresh = bias_exact_with_budget(&self.f.sub(&self.correlator)?, budget)?;
        if fresh.histogram != self.exact.histogram {
            return Ok(Err("recorded histogram differs from bias(f - P)".into()));
        }
        if fresh.magnitude + TOLERANCE < self.claimed_floor {
            return Ok(Err(format!(
                "bias {:.12} is below the claimed floor {:.12}",
                fresh.magnitude, self.claimed_floor
            )));
        }
        Ok(Ok(()))
    }

    /// One-line summary: `cor=<exact_bias> floor=<claimed_floor> degP=<deg>`.
    pub fn summary_line(&self) -> String {
        let deg = match self.correlator.degree() {
            Degree::Finite(k) => k.to_string(),
            Degree::NegInfinity => "-inf".into(),
        };
        format!(
            "cor={:.12} floor={:.12} degP={deg}",
            self.exact_bias(),
            self.claimed_floor
        )
    }
}

/// Evaluation and search budgets shared by the pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    /// Cap on point evaluations per exhaustive sweep.
    pub eval: u64,
    /// Cap on subspace choices per certificate search.
    pub search: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            eval: DEFAULT_BUDGET,
            search: 1_000_000,
        }
    }
}

/// `S_1, ..., S_m` on `d - 1` blocks whose joint zero set lies inside that
/// of the coefficient forms `T_i` of `Delta^d f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarietyCert {
    pub forms: Vec<MultilinearForm>,
}

impl VarietyCert {
    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    /// Checks shapes and degrees, then `Z(S) ⊆ Z(T)` by enumeration over
    /// `(F_p^n)^{d-1}`.
    pub fn verify(&self, t: &[Polynomial], n: usize, d: usize, budget: u64) -> Result<Verdict> {
        let Some(first) = t.first() else {
            return Ok(Verdict::Invalid("no coefficient forms".into()));
        };
        let spec = first.spec();
        let vars = n * d.saturating_sub(1);
        for (i, s) in self.forms.iter().enumerate() {
            if s.spec() != spec || s.n() != n || s.blocks() + 1 != d {
                return Ok(Verdict::Invalid(format!(
                    "form {} must live on {} blocks of {n} variables over F_{}",
                    i + 1,
                    d.saturating_sub(1),
                    spec.p()
                )));
            }
            if s.degree() == 0 || s.degree() + 1 > d {
                return Ok(Verdict::Invalid(format!(
                    "form {} has degree {} outside [1, {}]",
                    i + 1,
                    s.degree(),
                    d.saturating_sub(1)
                )));
            }
        }
        let s_ev: Vec<Evaluator> = self.forms.iter().map(MultilinearForm::evaluator).collect();
        let t_ev: Vec<Evaluator> = t.iter().map(Polynomial::evaluator).collect();
        let escapes = sweep_count(spec, vars, budget, |x| {
            s_ev.iter().all(|e| e.eval_raw(x) == 0) && t_ev.iter().any(|e| e.eval_raw(x) != 0)
        })?;
        Ok(if escapes == 0 {
            Verdict::Valid
        } else {
            Verdict::Invalid(format!("{escapes} points of Z(S) lie outside Z(T)"))
        })
    }
}

/// An intermediate result of a pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    Polynomial(Polynomial),
    Multilinear(MultilinearForm),
    Decomposition(DecompositionCert),
    PartitionRank(PartitionRankCert),
    Variety(VarietyCert),
    RkStar(RkStarCert),
    Perturbation(PerturbationCert),
    Correlation(CorrelationCert),
    Note(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub name: String,
    pub artifact: Artifact,
}

/// The numbers a run is judged by.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub pipeline: String,
    pub exact_bias: f64,
    pub claimed_floor: f64,
    /// Named certificate lengths such as `r`, `m` and `t`.
    pub lengths: Vec<(String, usize)>,
    pub c_star: Option<Vec<FieldElement>>,
}

impl RunSummary {
    pub fn length(&self, name: &str) -> Option<usize> {
        self.lengths
            .iter()
            .find(|(k, _)| k == name)
            .map(|&(_, v)| v)
    }

    pub fn to_record(&self) -> String {
        let mut out = format!(
            "pipeline={}\nexact_bias={:.12}\nclaimed_floor={:.12}\n",
            self.pipeline, self.exact_bias, self.claimed_floor
        );
        for (k, v) in &self.lengths {
            out.push_str(&format!("{k}={v}\n"));
        }
        if let Some(c) = &self.c_star {
            let parts: Vec<String> = c.iter().map(|x| x.value().to_string()).collect();
            out.push_str(&format!("c_star={}\n", parts.join(",")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub input: Polynomial,
    pub stages: Vec<Stage>,
    pub cert: CorrelationCert,
    pub summary: RunSummary,
}

struct Recorder {
    stages: Vec<Stage>,
}

impl Recorder {
    fn push(&mut self, name: &str, artifact: Artifact) {
        self.stages.push(Stage {
            name: name.into(),
            artifact,
        });
    }

    fn note(&mut self, name: &str, text: impl Into<String>) {
        self.push(name, Artifact::Note(text.into()));
    }

    fn provenance(&self, pipeline: &str) -> Vec<String> {
        std::iter::once(pipeline.to_string())
            .chain(self.stages.iter().map(|s| format!("stage {}", s.name)))
            .collect()
    }
}

fn check_stage(stage: &str, ok: bool, message: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::stage(stage, message()))
    }
}

fn require_char(p: u64, k: u64, what: &str) -> Result<()> {
    if p <= k {
        return Err(Error::precondition(format!(
            "characteristic too small: need p > {k} for {what}, got p={p}"
        )));
    }
    Ok(())
}

/// Reads `k! g = g~(x, ..., x) = sum_i R_i(x..x) Q_i(x..x)` as a
/// decomposition of `g`, dropping products that vanish on the diagonal.
pub fn depolarize_pr_cert(
    cert: &PartitionRankCert,
    g: &HomogeneousForm,
) -> Result<DecompositionCert> {
    let spec = g.spec();
    let k = g.degree();
    require_char(spec.p(), k as u64, "depolarization")?;
    if let Verdict::Invalid(why) = cert.verify() {
        return Err(Error::InvalidCertificate(why));
    }
    if cert.target.blocks() != k as usize
        || cert.target.n() != g.nvars()
        || cert.target.diagonal() != g.poly().scale(spec.factorial(k as u64))
    {
        return Err(Error::InvalidCertificate(
            "partition-rank certificate is not for the polarization of g".into(),
        ));
    }
    let inv = spec.inv(spec.factorial(k as u64)).expect("p > k");
    let mut factors = Vec::new();
    for f in &cert.factors {
        let (a, b) = (f.r.diagonal(), f.q.diagonal());
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let a = HomogeneousForm::new(a.scale(inv), f.r.degree() as u32)?;
        let b = HomogeneousForm::new(b, f.q.degree() as u32)?;
        factors.push((a, b));
    }
    let out = DecompositionCert {
        target: g.clone(),
        factors,
    };
    match out.verify() {
        Verdict::Valid => Ok(out),
        Verdict::Invalid(why) => Err(Error::Internal(format!("depolarized certificate: {why}"))),
    }
}

/// The sides of a partition-rank certificate for a `d`-linear form that
/// avoid the last block, restricted to the first `d - 1` blocks.
pub fn variety_from_pr_cert(cert: &PartitionRankCert) -> Result<VarietyCert> {
    let t = &cert.target;
    let d = t.blocks();
    if d < 2 {
        return Err(Error::precondition(
            "a variety certificate needs at least two blocks",
        ));
    }
    if let Verdict::Invalid(why) = cert.verify() {
        return Err(Error::InvalidCertificate(why));
    }
    let last = d - 1;
    let keep: Vec<usize> = (0..t.n() * last).collect();
    let forms = cert
        .factors
        .iter()
        .map(|f| {
            let side = if f.r.support().contains(&last) {
                &f.q
            } else {
                &f.r
            };
            let poly = side.poly().restrict_vars(&keep)?;
            MultilinearForm::with_support(poly, t.n(), last, side.support().clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VarietyCert { forms })
}

/// The coefficient forms `T_i` of `x^(d)_i` in `Delta^d f`, on the first
/// `d - 1` direction blocks.
pub fn coefficient_forms(f: &Polynomial, d: usize) -> Result<Vec<Polynomial>> {
    let n = f.nvars();
    let dd = f.iterated_discrete_derivative(d);
    let keep: Vec<usize> = (0..n * (d - 1)).collect();
    (0..n)
        .map(|i| {
            let var = (d - 1) * n + i;
            let mut coeff = Polynomial::zero(f.spec(), dd.nvars());
            for (m, c) in dd.terms() {
                if m.exps()[var] == 1 {
                    let mut e = m.exps().to_vec();
                    e[var] = 0;
                    coeff.add_term(Monomial::new(e), c);
                }
            }
            coeff.restrict_vars(&keep)
        })
        .collect()
}

fn finish(
    pipeline: &str,
    f: &Polynomial,
    correlator: Polynomial,
    degree_bound: u32,
    claimed_floor: f64,
    rec: Recorder,
    lengths: Vec<(String, usize)>,
    c_star: Option<Vec<FieldElement>>,
    budget: u64,
) -> Result<PipelineRun> {
    let exact = bias_exact_with_budget(&f.sub(&correlator)?, budget)?;
    let cert = CorrelationCert {
        f: f.clone(),
        correlator,
        degree_bound,
        exact,
        claimed_floor,
        provenance: rec.provenance(pipeline),
    };
    if let Err(why) = cert.verify(budget)? {
        return Err(Error::stage("final-certificate", why));
    }
    let summary = RunSummary {
        pipeline: pipeline.into(),
        exact_bias: cert.exact_bias(),
        claimed_floor,
        lengths,
        c_star,
    };
    Ok(PipelineRun {
        input: f.clone(),
        stages: rec.stages,
        cert,
        summary,
    })
}

fn derivative_bias(f: &Polynomial, d: usize, budget: u64) -> Result<f64> {
    Ok(bias_exact_with_budget(&f.iterated_discrete_derivative(d), budget)?.magnitude)
}

/// Homogeneous `f` of degree `k` with `d <= k < 2d`: the diagonals of the
/// small sides of a partition-rank certificate for `f~` generate an ideal
/// containing `f`, and the best combination of them correlates with `f`.
pub fn pipeline_homogeneous(
    f: &HomogeneousForm,
    d: usize,
    pr_cert: Option<&PartitionRankCert>,
    budgets: Budgets,
) -> Result<PipelineRun> {
    const NAME: &str = "homogeneous";
    let spec = f.spec();
    let n = f.nvars();
    let k = f.degree() as usize;
    if d == 0 {
        return Err(Error::precondition("order d must be at least 1"));
    }
    if f.is_zero() || k < d || k >= 2 * d {
        return Err(Error::precondition(format!(
            "need a nonzero form of degree k with d <= k < 2d; got k={k}, d={d}"
        )));
    }
    require_char(spec.p(), k as u64, "polarization")?;
    let mut rec = Recorder { stages: Vec::new() };
    rec.push("input", Artifact::Polynomial(f.poly().clone()));

    let polar = polarize(f);
    rec.push("polarization", Artifact::Multilinear(polar.clone()));
    let cert = match pr_cert {
        Some(c) => {
            if c.target != polar {
                return Err(Error::InvalidCertificate(
                    "partition-rank certificate is not for the polarization of f".into(),
                ));
            }
            if let Verdict::Invalid(why) = c.verify() {
                return Err(Error::InvalidCertificate(why));
            }
            c.clone()
        }
        None => match search_partition_rank(&polar, n, budgets.search) {
            SearchOutcome::Found(c) => c,
            SearchOutcome::Absent => return Err(Error::Internal("partition rank above n".into())),
            SearchOutcome::Inconclusive { explored } => {
                return Err(Error::NoDecomposition(format!(
                    "search inconclusive after {explored} nodes"
                )))
            }
        },
    };
    rec.push("partition-rank", Artifact::PartitionRank(cert.clone()));

    let delta = derivative_bias(f.poly(), d, budgets.eval)?;
    let polar_bias = multilinear_bias(&polar, budgets.eval)?.magnitude;
    let chain = delta.powi(1 << d);
    check_stage(
        "gowers-monotonicity",
        polar_bias + TOLERANCE >= chain,
        || format!("bias(f~) = {polar_bias:.12} < bias(Delta^d f)^(2^d) = {chain:.12}"),
    )?;
    rec.note(
        "gowers-monotonicity",
        format!("bias(Delta^d f)={delta:.12} bias(f~)={polar_bias:.12}"),
    );

    // Normalize so Q_i is the side with fewer blocks.
    let gens: Vec<Polynomial> = cert
        .factors
        .iter()
        .map(|fac| {
            if fac.r.degree() <= fac.q.degree() {
                fac.r.diagonal()
            } else {
                fac.q.diagonal()
            }
        })
        .filter(|a| !a.is_zero())
        .collect();
    let r = cert.len();
    let best = best_combination(
        f.poly(),
        &gens,
        budgets.eval,
        "p^(r+n) evaluations exceed the budget",
    )?;
    rec.note(
        "sweep",
        format!("generators={} c={}", gens.len(), join_values(&best.coeffs)),
    );
    let floor = (spec.p() as f64).powi(-((d * r) as i32));
    finish(
        NAME,
        f.poly(),
        best.combination,
        d as u32 - 1,
        floor,
        rec,
        vec![("r".into(), r), ("m".into(), gens.len())],
        None,
        budgets.eval,
    )
}

fn join_values(c: &[FieldElement]) -> String {
    c.iter()
        .map(|x| x.value().to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// `f` of degree at most `d`: a multilinear variety inside `Z(T)` yields
/// forms `A_i` of degree below `d` whose zero set lies in `Z(f_d)`.
pub fn pipeline_degree_d(
    f: &Polynomial,
    d: usize,
    variety: &VarietyCert,
    budgets: Budgets,
) -> Result<PipelineRun> {
    const NAME: &str = "degree-d";
    let spec = f.spec();
    let n = f.nvars();
    if d == 0 {
        return Err(Error::precondition("order d must be at least 1"));
    }
    require_char(spec.p(), d as u64, "the degree-d pipeline")?;
    if let Degree::Finite(k) = f.degree() {
        if k as usize > d {
            return Err(Error::precondition(format!("degree {k} exceeds d = {d}")));
        }
    }
    let mut rec = Recorder { stages: Vec::new() };
    rec.push("input", Artifact::Polynomial(f.clone()));
    let top = f.homogeneous_component(d as u32).into_poly();
    let below = f.below_degree(d as u32);

    if top.is_zero() {
        // Delta^d f = 0, so f itself has degree below d.
        rec.note("trivial", "Delta^d f = 0; the correlator is f");
        return finish(
            NAME,
            f,
            f.clone(),
            d as u32 - 1,
            1.0,
            rec,
            vec![("m".into(), 0)],
            None,
            budgets.eval,
        );
    }

    let t = coefficient_forms(f, d)?;
    for (i, ti) in t.iter().enumerate() {
        rec.push(
            &format!("coefficient-form-{}", i + 1),
            Artifact::Polynomial(ti.clone()),
        );
    }
    if let Verdict::Invalid(why) = variety.verify(&t, n, d, budgets.eval)? {
        return Err(Error::InvalidCertificate(format!(
            "invalid variety certificate: {why}"
        )));
    }
    rec.push("variety", Artifact::Variety(variety.clone()));

    let a: Vec<Polynomial> = variety
        .forms
        .iter()
        .map(MultilinearForm::diagonal)
        .collect();
    let report = zero_set(&a, &top, budgets.eval)?;
    check_stage(
        "diagonal-containment",
        report.conditional.counts().iter().skip(1).all(|&c| c == 0),
        || "f_d does not vanish on Z(A)".into(),
    )?;
    rec.note("diagonal-containment", format!("|Z(A)|={}", report.count));

    let gens: Vec<Polynomial> = a.into_iter().filter(|g| !g.is_zero()).collect();
    let best = best_combination(
        &top,
        &gens,
        budgets.eval,
        "p^(m+n) evaluations exceed the budget",
    )?;
    rec.note("sweep", format!("c={}", join_values(&best.coeffs)));
    let m = variety.len();
    let floor = (spec.p() as f64).powi(-((d * m) as i32));
    let correlator = best.combination.add(&below)?;
    finish(
        NAME,
        f,
        correlator,
        d as u32 - 1,
        floor,
        rec,
        vec![("m".into(), m)],
        None,
        budgets.eval,
    )
}

fn decomposition_for(
    g: &HomogeneousForm,
    supplied: Option<&DecompositionCert>,
    budgets: Budgets,
    what: &str,
) -> Result<(DecompositionCert, &'static str)> {
    if let Some(c) = supplied {
        if &c.target != g {
            return Err(Error::InvalidCertificate(format!(
                "{what}: certificate target differs"
            )));
        }
        if let Verdict::Invalid(why) = c.verify() {
            return Err(Error::InvalidCertificate(format!("{what}: {why}")));
        }
        return Ok((c.clone(), "supplied"));
    }
    if g.is_zero() {
        return Ok((
            DecompositionCert {
                target: g.clone(),
                factors: Vec::new(),
            },
            "zero",
        ));
    }
    let n = g.nvars();
    match search_rank(g, n, budgets.search) {
        SearchOutcome::Found(c) => return Ok((c, "rank search")),
        SearchOutcome::Absent => {
            return Err(Error::Internal(format!(
                "{what}: no decomposition of length <= n"
            )));
        }
        SearchOutcome::Inconclusive { .. } => {}
    }
    // rk(g) <= PR(g~)
    match search_partition_rank(&polarize(g), n, budgets.search) {
        SearchOutcome::Found(c) => Ok((depolarize_pr_cert(&c, g)?, "depolarized partition rank")),
        _ => Err(Error::NoDecomposition(format!(
            "{what}: both searches were inconclusive"
        ))),
    }
}

/// `f` of degree at most `d + 1`: extracts a correlator of degree below
/// `d` through the rk* chain rule and the perturbation step.
pub fn pipeline_degree_d_plus_1(
    f: &Polynomial,
    d: usize,
    g_cert: Option<&DecompositionCert>,
    hc_cert: Option<&DecompositionCert>,
    budgets: Budgets,
) -> Result<PipelineRun> {
    const NAME: &str = "degree-d1";
    let spec = f.spec();
    let p = spec.p();
    let n = f.nvars();
    if d == 0 {
        return Err(Error::precondition("order d must be at least 1"));
    }
    require_char(p, d as u64 + 1, "the degree-(d+1) pipeline")?;
    if let Degree::Finite(k) = f.degree() {
        if k as usize > d + 1 {
            return Err(Error::precondition(format!(
                "degree {k} exceeds d+1 = {}",
                d + 1
            )));
        }
    }
    let mut rec = Recorder { stages: Vec::new() };
    rec.push("input", Artifact::Polynomial(f.clone()));

    if d == 1 {
        // cor_{<1}(f) is bias(f) and its square is bias(Delta f).
        let delta = derivative_bias(f, 1, budgets.eval)?;
        let b = bias_exact_with_budget(f, budgets.eval)?.magnitude;
        check_stage(
            "constant-correlation",
            (b * b - delta).abs() <= TOLERANCE,
            || {
                format!(
                    "cor_<1(f)^2 = {:.12} differs from bias(Delta f) = {delta:.12}",
                    b * b
                )
            },
        )?;
        rec.note("constant-correlation", format!("bias(Delta f)={delta:.12}"));
        let zero = Polynomial::zero(spec, n);
        return finish(
            NAME,
            f,
            zero,
            0,
            delta.sqrt(),
            rec,
            Vec::new(),
            None,
            budgets.eval,
        );
    }

    // (1) f = g + h + f_{<d}
    let g = f.homogeneous_component(d as u32 + 1);
    let h = f.homogeneous_component(d as u32);
    let low = f.below_degree(d as u32);
    rec.push("split-g", Artifact::Polynomial(g.poly().clone()));
    rec.push("split-h", Artifact::Polynomial(h.poly().clone()));
    rec.push("split-low", Artifact::Polynomial(low.clone()));

    // (2) a derivative direction c*
    let bounds = derive_bias_bounds(f, d, budgets.eval)?;
    check_stage("derive-bias", bounds.histograms_match, || {
        "Delta^d f and g~(v, x) + h~(v) have different value histograms".into()
    })?;
    check_stage(
        "derive-bias",
        bounds.first_holds && bounds.max_bound + TOLERANCE >= bounds.derivative_bias,
        || {
            format!(
                "bias(Delta^d f) = {:.12} exceeds bias(h~ - d_c* g~) = {:.12}",
                bounds.derivative_bias, bounds.max_bound
            )
        },
    )?;
    check_stage("derive-bias", bounds.second_holds, || {
        format!(
            "bias(Delta^d f) = {:.12} exceeds bias(g~) = {:.12}",
            bounds.derivative_bias, bounds.polar_bias
        )
    })?;
    let c_star = bounds.c_star.clone();
    rec.note(
        "derive-bias",
        format!(
            "c*={} bias(Delta^d f)={:.12} bias(h~-d_c*g~)={:.12} bias(g~)={:.12}",
            join_values(&c_star),
            bounds.derivative_bias,
            bounds.max_bound,
            bounds.polar_bias
        ),
    );

    let gh = g.poly().add(h.poly())?;
    if gh.is_zero() {
        rec.note("trivial", "g + h = 0; the correlator is f");
        return finish(
            NAME,
            f,
            f.clone(),
            d as u32 - 1,
            1.0,
            rec,
            vec![("m".into(), 0)],
            Some(c_star),
            budgets.eval,
        );
    }

    // (3) decompositions of g and h - d_c* g
    let hc_poly = h.poly().sub(&g.poly().formal_derivative(&c_star)?)?;
    let hc = HomogeneousForm::new(hc_poly, d as u32)?;
    let (g_dec, g_src) = decomposition_for(&g, g_cert, budgets, "g")?;
    let (hc_dec, hc_src) = decomposition_for(&hc, hc_cert, budgets, "h - d_c g")?;
    rec.push("decomposition-g", Artifact::Decomposition(g_dec.clone()));
    rec.push("decomposition-hc", Artifact::Decomposition(hc_dec.clone()));
    rec.note(
        "decomposition-sources",
        format!("g: {g_src}; h - d_c g: {hc_src}"),
    );
    let (r_g, r_hc) = (g_dec.len(), hc_dec.len());
    let mut lengths = vec![("r_g".to_string(), r_g), ("r_hc".to_string(), r_hc)];

    let rk = if g.is_zero() {
        crate::rkstar::rkstar_from_homogeneous(&hc_dec)?
    } else {
        // (4) chain rule
        let g_comp = compress_decomposition(&g_dec)?;
        let hc_rk = if hc_dec.is_empty() {
            RkStarCert {
                target: hc.poly().clone(),
                factors: Vec::new(),
            }
        } else {
            crate::rkstar::rkstar_from_homogeneous(&hc_dec)?
        };
        let rk = chain_rule_combine(&g_comp, &hc_rk, &c_star)?;
        check_stage("chain-rule", rk.len() <= 2 * r_g + r_hc, || {
            format!(
                "rk* certificate of length {} exceeds 2*{r_g} + {r_hc}",
                rk.len()
            )
        })?;
        rk
    };
    rec.push("rkstar", Artifact::RkStar(rk.clone()));
    lengths.push(("r".into(), rk.len()));

    let generators: Vec<Polynomial> = if gh.degree() == Degree::Finite(2) {
        // A quadratic target already lies in the ideal of its linear left
        // factors; there is nothing to perturb.
        rk.factors.iter().map(|(a, _)| a.clone()).collect()
    } else {
        // (5) perturbation
        let pert = perturbation(&rk, budgets.eval)?;
        rec.push("perturbation", Artifact::Perturbation(pert.clone()));
        lengths.push(("t".into(), pert.t));
        pert.generators.clone()
    };
    let pcert_m = generators.len();
    lengths.push(("m".into(), pcert_m));

    // (6) best combination of the generators for g + h
    let best = best_combination(
        &gh,
        &generators,
        budgets.eval,
        "p^(m+n) evaluations exceed the budget",
    )?;
    let floor = (p as f64).powi(-(pcert_m as i32));
    check_stage(
        "lower-degree-correlation",
        best.report.magnitude + TOLERANCE >= floor,
        || {
            format!(
                "bias(g + h - P) = {:.12} below p^-{pcert_m}",
                best.report.magnitude
            )
        },
    )?;
    rec.note(
        "lower-degree-correlation",
        format!("c={}", join_values(&best.coeffs)),
    );

    // (7) f - (P + f_{<d}) = g + h - P
    let correlator = best.combination.add(&low)?;
    let run = finish(
        NAME,
        f,
        correlator,
        d as u32 - 1,
        floor,
        rec,
        lengths,
        Some(c_star),
        budgets.eval,
    )?;
    check_stage(
        "substitution",
        run.cert.exact.histogram == best.report.histogram,
        || "bias(f - (P + f_<d)) differs from bias(g + h - P)".into(),
    )?;
    let sandwich = run.cert.exact_bias().powi(1 << d);
    check_stage(
        "easy-direction",
        bounds.derivative_bias + TOLERANCE >= sandwich,
        || {
            format!(
                "bias(Delta^d f) = {:.12} < cor^(2^d) = {sandwich:.12}",
                bounds.derivative_bias
            )
        },
    )?;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::cor_below;
    use crate::poly::parse_polynomial;

    fn poly(s: &str) -> Polynomial {
        parse_polynomial(s).unwrap()
    }

    fn budgets() -> Budgets {
        Budgets::default()
    }

    fn check(run: &PipelineRun) {
        assert!(run.cert.verify(DEFAULT_BUDGET).unwrap().is_ok());
        assert!(run.cert.exact_bias() + TOLERANCE >= run.cert.claimed_floor);
    }

    #[test]
    fn homogeneous_product_of_three() {
        let f = HomogeneousForm::from_polynomial(poly("p=5; n=3; x1*x2*x3")).unwrap();
        let run = pipeline_homogeneous(&f, 2, None, budgets()).unwrap();
        check(&run);
        let r = run.summary.length("r").unwrap();
        assert_eq!(run.cert.claimed_floor, 5f64.powi(-2 * r as i32));
        assert!(run.cert.correlator.degree().is_below(2));
    }

    #[test]
    fn homogeneous_rejects_degenerate_input() {
        let low = HomogeneousForm::from_polynomial(poly("p=5; n=2; x1")).unwrap();
        assert!(matches!(
            pipeline_homogeneous(&low, 2, None, budgets()),
            Err(Error::Precondition(_))
        ));
        let high = HomogeneousForm::from_polynomial(poly("p=7; n=2; x1^2*x2^2")).unwrap();
        assert!(matches!(
            pipeline_homogeneous(&high, 2, None, budgets()),
            Err(Error::Precondition(_))
        ));
        let small_char = HomogeneousForm::from_polynomial(poly("p=3; n=2; x1^2*x2")).unwrap();
        assert!(matches!(
            pipeline_homogeneous(&small_char, 2, None, budgets()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn degree_d_from_partition_rank() {
        let f = poly("p=5; n=2; x1*x2 + 2*x2^2");
        let form = HomogeneousForm::from_polynomial(f.clone()).unwrap();
        let cert = search_partition_rank(&polarize(&form), 2, 1_000_000)
            .found()
            .unwrap();
        let variety = variety_from_pr_cert(&cert).unwrap();
        let run = pipeline_degree_d(&f, 2, &variety, budgets()).unwrap();
        check(&run);
        assert_eq!(run.cert.claimed_floor, 5f64.powi(-2 * variety.len() as i32));
    }

    #[test]
    fn degree_d_trivial_branch() {
        let f = poly("p=5; n=2; x1 + 3");
        let run = pipeline_degree_d(&f, 2, &VarietyCert { forms: Vec::new() }, budgets()).unwrap();
        assert!((run.cert.exact_bias() - 1.0).abs() < TOLERANCE);
    }

    #[test]
    fn degree_d_single_variable_power() {
        let f = poly("p=5; n=1; x1^3 + x1");
        let form =
            HomogeneousForm::from_polynomial(f.homogeneous_component(3).into_poly()).unwrap();
        let cert = search_partition_rank(&polarize(&form), 1, 1_000_000)
            .found()
            .unwrap();
        let variety = variety_from_pr_cert(&cert).unwrap();
        check(&pipeline_degree_d(&f, 3, &variety, budgets()).unwrap());
    }

    #[test]
    fn degree_d_rejects_bad_variety() {
        let f = poly("p=5; n=2; x1*x2");
        let spec = f.spec();
        // x1_1 alone does not force T = (x2_1, x1_1) to vanish.
        let bad = VarietyCert {
            forms: vec![MultilinearForm::linear(
                spec,
                2,
                1,
                0,
                &[FieldElement(1), FieldElement(0)],
            )],
        };
        let err = pipeline_degree_d(&f, 2, &bad, budgets()).unwrap_err();
        assert!(
            err.to_string().contains("invalid variety certificate"),
            "{err}"
        );
    }

    #[test]
    fn degree_d_plus_1_worked_example() {
        let f = poly("p=5; n=3; x1*x2*x3 + x1*x2");
        let run = pipeline_degree_d_plus_1(&f, 2, None, None, budgets()).unwrap();
        check(&run);
        let m = run.summary.length("m").unwrap();
        assert_eq!(run.cert.claimed_floor, 5f64.powi(-(m as i32)));
        assert!(run.cert.correlator.degree().is_below(2));
        assert!(run.summary.c_star.is_some());
    }

    #[test]
    fn degree_d_plus_1_fast_path() {
        let f = poly("p=5; n=2; x1^2 + x1*x2 + x2");
        let run = pipeline_degree_d_plus_1(&f, 1, None, None, budgets()).unwrap();
        check(&run);
        assert!(run.cert.correlator.is_zero());
    }

    #[test]
    fn degree_d_plus_1_quadratic_top() {
        let f = poly("p=5; n=2; x1^2 + 3*x1*x2 + x1 + 1");
        check(&pipeline_degree_d_plus_1(&f, 2, None, None, budgets()).unwrap());
    }

    #[test]
    fn degree_d_plus_1_never_overclaims() {
        for s in [
            "p=3; n=2; x1^2*x2 + x2^2",
            "p=5; n=2; x1^3 + 2*x1*x2 + x2",
            "p=5; n=2; x1*x2^2 + x1^2",
        ] {
            let f = poly(s);
            let Ok(run) = pipeline_degree_d_plus_1(&f, 2, None, None, budgets()) else {
                assert_eq!(f.spec().p(), 3, "only the p=3 case may be rejected");
                continue;
            };
            check(&run);
            let best = cor_below(&f, 2, DEFAULT_BUDGET).unwrap().value;
            assert!(run.cert.exact_bias() <= best + TOLERANCE);
        }
    }

    #[test]
    fn homogeneous_and_degree_d_plus_1_agree_on_overlap() {
        let f = poly("p=5; n=2; x1^2*x2 + 2*x2^3");
        let form = HomogeneousForm::from_polynomial(f.clone()).unwrap();
        let a = pipeline_homogeneous(&form, 2, None, budgets()).unwrap();
        let b = pipeline_degree_d_plus_1(&f, 2, None, None, budgets()).unwrap();
        let floor = a.cert.claimed_floor.max(b.cert.claimed_floor);
        assert!(a.cert.exact_bias() + TOLERANCE >= floor);
        assert!(b.cert.exact_bias() + TOLERANCE >= floor);
        check(&a);
        check(&b);
    }

    #[test]
    fn depolarized_certificate_decomposes_g() {
        let g = HomogeneousForm::from_polynomial(poly("p=7; n=2; x1^2*x2 + x2^3")).unwrap();
        let pr = search_partition_rank(&polarize(&g), 2, 1_000_000)
            .found()
            .unwrap();
        let dec = depolarize_pr_cert(&pr, &g).unwrap();
        assert!(dec.verify().is_valid());
        assert!(dec.len() <= pr.len());
    }
}
