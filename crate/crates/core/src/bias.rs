//! Biases, Gowers norms, analytic rank, zero sets and the bias identities.
//!
//! Everything exact goes through integer [`ValueHistogram`]s; identities
//! are first checked on counts and only then compared as complex numbers
//! with [`TOLERANCE`].

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::enumerate::{
    check_budget, domain_size, odometer_next, sweep_count, sweep_fold, sweep_histogram,
    DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::field::{histogram_is_flat, histogram_to_bias, FieldElement, FieldSpec, ValueHistogram};
use crate::multilinear::{polarize, MultilinearForm};
use crate::poly::{monomials_up_to_degree, Degree, Evaluator, Polynomial};

/// Slack for comparisons between biases computed from exact histograms.
pub const TOLERANCE: f64 = 1e-9;

/// Minimum sample count accepted by the Monte Carlo estimator.
pub const MIN_SAMPLES: u64 = 100;

const SAMPLE_CHUNK: u64 = 4096;

/// Hoeffding half-width at 95% confidence for the mean of a `[-1, 1]`
/// valued variable.
pub fn hoeffding_half_width(samples: u64) -> f64 {
    2.0 * ((2.0f64 / 0.05).ln() / (2.0 * samples as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Exact,
    Sampled {
        samples: u64,
        seed: u64,
        half_width: f64,
    },
}

/// How to evaluate a bias: exhaustively under a point budget, or by
/// seeded sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimate {
    Exact { budget: u64 },
    Sampled { samples: u64, seed: u64 },
}

impl Default for Estimate {
    fn default() -> Self {
        Estimate::Exact {
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasReport {
    pub histogram: ValueHistogram,
    pub value: Complex64,
    pub magnitude: f64,
    pub method: Method,
}

impl BiasReport {
    pub fn from_histogram(
        histogram: ValueHistogram,
        spec: FieldSpec,
        method: Method,
    ) -> Result<Self> {
        let b = histogram_to_bias(&histogram, spec)?;
        Ok(BiasReport {
            histogram,
            value: b.value,
            magnitude: b.magnitude,
            method,
        })
    }

    pub fn is_exact(&self) -> bool {
        self.method == Method::Exact
    }

    /// True when the histogram is flat, so the bias is exactly zero.
    pub fn is_exactly_zero(&self) -> bool {
        self.is_exact() && histogram_is_flat(&self.histogram)
    }

    pub fn half_width(&self) -> Option<f64> {
        match self.method {
            Method::Exact => None,
            Method::Sampled { half_width, .. } => Some(half_width),
        }
    }

    /// `key=value` lines.
    pub fn to_record(&self) -> String {
        let mut s = String::new();
        match self.method {
            Method::Exact => s.push_str("method=exact\n"),
            Method::Sampled {
                samples,
                seed,
                half_width,
            } => {
                let _ = writeln!(
                    s,
                    "method=sampled\nsamples={samples}\nseed={seed}\nhalf_width={half_width:.12}"
                );
            }
        }
        let counts: Vec<String> = self.histogram.counts().iter().map(u64::to_string).collect();
        let _ = writeln!(s, "p={}", self.histogram.counts().len());
        let _ = writeln!(s, "total={}", self.histogram.total());
        let _ = writeln!(s, "histogram={}", counts.join(","));
        let _ = writeln!(s, "bias_re={:.12}", self.value.re);
        let _ = writeln!(s, "bias_im={:.12}", self.value.im);
        let _ = writeln!(s, "bias={:.12}", self.magnitude);
        s
    }

    pub const CSV_HEADER: &'static str = "label,method,p,total,bias,bias_re,bias_im,half_width";

    pub fn to_csv_row(&self, label: &str) -> String {
        let (method, hw) = match self.method {
            Method::Exact => ("exact", String::new()),
            Method::Sampled { half_width, .. } => ("sampled", format!("{half_width:.12}")),
        };
        format!(
            "{label},{method},{},{},{:.12},{:.12},{:.12},{hw}",
            self.histogram.counts().len(),
            self.histogram.total(),
            self.magnitude,
            self.value.re,
            self.value.im
        )
    }
}

/// Exact value histogram of `f` over `F_p^n`.
pub fn histogram_exact(f: &Polynomial, budget: u64) -> Result<ValueHistogram> {
    let ev = f.evaluator();
    sweep_histogram(f.spec(), f.nvars(), budget, |x| ev.eval_raw(x))
}

pub fn bias_exact(f: &Polynomial) -> Result<BiasReport> {
    bias_exact_with_budget(f, DEFAULT_BUDGET)
}

pub fn bias_exact_with_budget(f: &Polynomial, budget: u64) -> Result<BiasReport> {
    let h = histogram_exact(f, budget).map_err(|e| match e {
        Error::Budget { needed, budget, .. } => Error::Budget {
            needed,
            budget,
            hint: "use bias_sampled (--samples) or raise the budget".into(),
        },
        other => other,
    })?;
    BiasReport::from_histogram(h, f.spec(), Method::Exact)
}

/// Histogram of `ev` at `samples` uniform points. Chunk `j` draws from
/// the ChaCha stream `j` of `seed`, so the result does not depend on the
/// thread schedule.
fn sample_histogram(ev: &Evaluator, spec: FieldSpec, samples: u64, seed: u64) -> ValueHistogram {
    let p = spec.p();
    let n = ev.nvars();
    let chunks = samples.div_ceil(SAMPLE_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|j| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(j);
            let count = SAMPLE_CHUNK.min(samples - j * SAMPLE_CHUNK);
            let mut h = ValueHistogram::new(spec);
            let mut x = vec![0u64; n];
            for _ in 0..count {
                for xi in x.iter_mut() {
                    *xi = rng.gen_range(0..p);
                }
                h.record(FieldElement(ev.eval_raw(&x)));
            }
            h
        })
        .reduce(|| ValueHistogram::new(spec), |a, b| a.merged(&b))
}

/// Monte Carlo estimate of `bias(f)` with a 95% Hoeffding half-width on
/// each of the real and imaginary parts.
pub fn bias_sampled(f: &Polynomial, samples: u64, seed: u64) -> Result<BiasReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::precondition(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let h = sample_histogram(&f.evaluator(), f.spec(), samples, seed);
    BiasReport::from_histogram(
        h,
        f.spec(),
        Method::Sampled {
            samples,
            seed,
            half_width: hoeffding_half_width(samples),
        },
    )
}

pub fn bias_with(f: &Polynomial, estimate: Estimate) -> Result<BiasReport> {
    match estimate {
        Estimate::Exact { budget } => bias_exact_with_budget(f, budget),
        Estimate::Sampled { samples, seed } => bias_sampled(f, samples, seed),
    }
}

/// `cor(f, P) = bias(f - P)`.
pub fn correlation(f: &Polynomial, p: &Polynomial) -> Result<BiasReport> {
    bias_exact(&f.sub(p)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GowersReport {
    pub order: usize,
    /// `bias(Delta^d f) = ||e(f)||_{U^d}^{2^d}`.
    pub derivative: BiasReport,
    pub norm: f64,
}

/// `||e(f)||_{U^d}` through the bias of the symbolic `Delta^d f` over
/// `n*(d+1)` variables.
pub fn gowers_norm(f: &Polynomial, d: usize, estimate: Estimate) -> Result<GowersReport> {
    if d == 0 {
        return Err(Error::precondition("Gowers norm order must be at least 1"));
    }
    if let Estimate::Exact { budget } = estimate {
        check_budget(
            f.spec().p(),
            f.nvars() * (d + 1),
            budget,
            "enumerating (v, x) exceeds the budget; use --samples",
        )?;
    }
    let dd = f.iterated_discrete_derivative(d);
    let derivative = bias_with(&dd, estimate)?;
    // The exact value is a nonnegative real; the magnitude discards the
    // roundoff (or sampling noise) in the imaginary part.
    let norm = derivative.magnitude.powf(1.0 / (1u64 << d) as f64);
    Ok(GowersReport {
        order: d,
        derivative,
        norm,
    })
}

/// `AR(T) = -log_p bias(T)`; `Infinite` when the bias vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticRank {
    Finite(f64),
    Infinite,
}

impl AnalyticRank {
    pub fn from_bias(bias: f64, p: u64) -> Self {
        if bias <= 0.0 {
            AnalyticRank::Infinite
        } else {
            AnalyticRank::Finite((-bias.ln() / (p as f64).ln()).max(0.0))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            AnalyticRank::Finite(v) => v,
            AnalyticRank::Infinite => f64::INFINITY,
        }
    }
}

/// Exact bias of a multilinear form over all of its blocks. Averaging the
/// last support block out leaves `P(L(x) = 0)` for the coefficient vector
/// `L` of that block, so only the other support blocks are enumerated.
pub fn multilinear_bias(t: &MultilinearForm, budget: u64) -> Result<BiasReport> {
    let spec = t.spec();
    let p = spec.p();
    let n = t.n();
    let total = domain_size(p, n * t.blocks()).ok_or_else(|| Error::Budget {
        needed: (p as f64).powi((n * t.blocks()) as i32),
        budget,
        hint: "histogram total overflows".into(),
    })?;
    let Some(&last) = t.support().iter().next_back() else {
        let mut h = ValueHistogram::new(spec);
        h.record_many(t.poly().constant_term(), total);
        return BiasReport::from_histogram(h, spec, Method::Exact);
    };
    let rest: Vec<usize> = t
        .support()
        .iter()
        .filter(|&&b| b != last)
        .flat_map(|&b| (b * n..(b + 1) * n).collect::<Vec<_>>())
        .collect();
    let coeffs: Vec<Evaluator> = (0..n)
        .map(|i| {
            t.poly()
                .partial(last * n + i)
                .restrict_vars(&rest)
                .map(|c| c.evaluator())
        })
        .collect::<Result<_>>()?;
    let zeros = sweep_count(spec, rest.len(), budget, |x| {
        coeffs.iter().all(|c| c.eval_raw(x) == 0)
    })?;
    let outer = domain_size(p, rest.len()).expect("within budget");
    let block = domain_size(p, n).expect("within total");
    let idle = total / (outer * block);
    let spread = (outer - zeros) * (block / p) * idle;
    let mut counts = vec![spread; p as usize];
    counts[0] += zeros * block * idle;
    BiasReport::from_histogram(ValueHistogram::from_counts(counts), spec, Method::Exact)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticRankReport {
    pub bias: BiasReport,
    pub rank: AnalyticRank,
}

pub fn analytic_rank(t: &MultilinearForm, budget: u64) -> Result<AnalyticRankReport> {
    let bias = multilinear_bias(t, budget)?;
    let rank = if bias.is_exactly_zero() {
        AnalyticRank::Infinite
    } else {
        AnalyticRank::from_bias(bias.magnitude, t.spec().p())
    };
    Ok(AnalyticRankReport { bias, rank })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroSetReport {
    pub count: u64,
    pub total: u64,
    /// Values of `g` on the joint zero set.
    pub conditional: ValueHistogram,
}

impl ZeroSetReport {
    pub fn density(&self) -> f64 {
        self.count as f64 / self.total as f64
    }

    /// `bi(g | Z)`, or `None` when `Z` is empty.
    pub fn conditional_bias(&self, spec: FieldSpec) -> Option<Complex64> {
        (self.count > 0).then(|| {
            histogram_to_bias(&self.conditional, spec)
                .expect("nonempty")
                .value
        })
    }

    pub fn to_record(&self) -> String {
        let counts: Vec<String> = self
            .conditional
            .counts()
            .iter()
            .map(u64::to_string)
            .collect();
        format!(
            "count={}\ntotal={}\ndensity={:.12}\nconditional_histogram={}\n",
            self.count,
            self.total,
            self.density(),
            counts.join(",")
        )
    }

    pub const CSV_HEADER: &'static str = "label,count,total,density";

    pub fn to_csv_row(&self, label: &str) -> String {
        format!(
            "{label},{},{},{:.12}",
            self.count,
            self.total,
            self.density()
        )
    }
}

fn same_ring(polys: &[&Polynomial]) -> Result<(FieldSpec, usize)> {
    let first = polys[0];
    for q in &polys[1..] {
        if q.spec() != first.spec() {
            return Err(Error::FieldMismatch {
                left: first.spec().p(),
                right: q.spec().p(),
            });
        }
        if q.nvars() != first.nvars() {
            return Err(Error::ArityMismatch {
                left: first.nvars(),
                right: q.nvars(),
            });
        }
    }
    Ok((first.spec(), first.nvars()))
}

/// Joint zero set of `a` and the histogram of `g` on it. An empty list
/// cuts out the whole space.
pub fn zero_set(a: &[Polynomial], g: &Polynomial, budget: u64) -> Result<ZeroSetReport> {
    let all: Vec<&Polynomial> = std::iter::once(g).chain(a).collect();
    let (spec, n) = same_ring(&all)?;
    let evs: Vec<Evaluator> = a.iter().map(Polynomial::evaluator).collect();
    let gev = g.evaluator();
    let (count, conditional) = sweep_fold(
        spec,
        n,
        budget,
        || (0u64, ValueHistogram::new(spec)),
        |(c, h), x| {
            if evs.iter().all(|e| e.eval_raw(x) == 0) {
                *c += 1;
                h.record(FieldElement(gev.eval_raw(x)));
            }
        },
        |(c1, h1), (c2, h2)| (c1 + c2, h1.merged(&h2)),
    )?;
    Ok(ZeroSetReport {
        count,
        total: domain_size(spec.p(), n).expect("within budget"),
        conditional,
    })
}

/// Outcome of an identity check: integer-level verdicts plus the two
/// complex sides.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    /// Every slice histogram had the predicted shape.
    pub slices_ok: bool,
    /// The difference of the two sides' histograms is flat.
    pub difference_flat: bool,
    pub lhs: Complex64,
    pub rhs: Complex64,
}

impl IdentityCheck {
    pub fn holds(&self) -> bool {
        self.slices_ok && self.difference_flat && (self.lhs - self.rhs).norm() <= TOLERANCE
    }
}

/// `E_c bi(g - sum_i c_i A_i) = P(Z(A)) bi(g | Z(A))`, checked on counts:
/// for each `x` the values `g(x) - sum c_i A_i(x)` over all `c` are flat
/// off `Z(A)` and constant on it.
pub fn check_avg_correlation_identity(
    g: &Polynomial,
    a: &[Polynomial],
    budget: u64,
) -> Result<IdentityCheck> {
    let all: Vec<&Polynomial> = std::iter::once(g).chain(a).collect();
    let (spec, n) = same_ring(&all)?;
    let m = a.len();
    let p = spec.p();
    check_budget(p, n + m, budget, "too many (x, c) pairs")?;
    let evs: Vec<Evaluator> = a.iter().map(Polynomial::evaluator).collect();
    let gev = g.evaluator();
    let pm = domain_size(p, m).expect("within budget");
    struct Acc {
        ok: bool,
        lhs: ValueHistogram,
        zero: ValueHistogram,
    }
    let acc = sweep_fold(
        spec,
        n,
        budget,
        || Acc {
            ok: true,
            lhs: ValueHistogram::new(spec),
            zero: ValueHistogram::new(spec),
        },
        |acc, x| {
            let gx = gev.eval_raw(x);
            let ax: Vec<u64> = evs.iter().map(|e| e.eval_raw(x)).collect();
            let mut slice = ValueHistogram::new(spec);
            let mut c = vec![0u64; m];
            loop {
                let s = c
                    .iter()
                    .zip(&ax)
                    .fold(0u64, |s, (ci, ai)| (s + ci * ai) % p);
                slice.record(spec.sub(FieldElement(gx), FieldElement(s)));
                if !odometer_next(&mut c, p) {
                    break;
                }
            }
            if ax.iter().all(|&v| v == 0) {
                acc.ok &= slice.count(FieldElement(gx)) == pm;
                acc.zero.record(FieldElement(gx));
            } else {
                acc.ok &= histogram_is_flat(&slice);
            }
            acc.lhs.merge(&slice);
        },
        |mut a1, a2| {
            a1.ok &= a2.ok;
            a1.lhs.merge(&a2.lhs);
            a1.zero.merge(&a2.zero);
            a1
        },
    )?;
    let difference_flat = acc
        .lhs
        .checked_sub(&acc.zero.scaled(pm))
        .is_some_and(|d| histogram_is_flat(&d));
    let lhs = histogram_to_bias(&acc.lhs, spec)?.value;
    let rhs = if acc.zero.total() == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        let density = acc.zero.total() as f64 / domain_size(p, n).expect("within budget") as f64;
        histogram_to_bias(&acc.zero, spec)?.value * density
    };
    Ok(IdentityCheck {
        slices_ok: acc.ok,
        difference_flat,
        lhs,
        rhs,
    })
}

/// `bi(A + B) = bi(A) bi(B | E)` with `E = {y : A(., y) = 0}`, where the
/// first `nx` variables form the `x` block, `A` is linear in `x` and `B`
/// does not involve `x`.
pub fn check_bias_chain_rule(
    a: &Polynomial,
    b: &Polynomial,
    nx: usize,
    budget: u64,
) -> Result<IdentityCheck> {
    let (spec, n) = same_ring(&[a, b])?;
    if nx > n {
        return Err(Error::precondition(format!(
            "x block of {nx} variables exceeds arity {n}"
        )));
    }
    for (mono, _) in a.terms() {
        let xdeg: u32 = mono.exps()[..nx].iter().sum();
        if xdeg != 1 {
            return Err(Error::precondition(format!(
                "A is not linear in the x block: a term has x-degree {xdeg}"
            )));
        }
    }
    if b.terms()
        .any(|(mono, _)| mono.exps()[..nx].iter().any(|&e| e > 0))
    {
        return Err(Error::precondition("B depends on the x block"));
    }
    let p = spec.p();
    let ny = n - nx;
    check_budget(p, n, budget, "too many (x, y) pairs")?;
    let pnx = domain_size(p, nx).expect("within budget");
    let (aev, bev) = (a.evaluator(), b.evaluator());
    struct Acc {
        ok: bool,
        sum: ValueHistogram,
        a: ValueHistogram,
        b_on_e: ValueHistogram,
    }
    let acc = sweep_fold(
        spec,
        ny,
        budget,
        || Acc {
            ok: true,
            sum: ValueHistogram::new(spec),
            a: ValueHistogram::new(spec),
            b_on_e: ValueHistogram::new(spec),
        },
        |acc, y| {
            let mut pt = vec![0u64; n];
            pt[nx..].copy_from_slice(y);
            let by = bev.eval_raw(&pt);
            let mut sum = ValueHistogram::new(spec);
            let mut av = ValueHistogram::new(spec);
            loop {
                let ax = aev.eval_raw(&pt);
                av.record(FieldElement(ax));
                sum.record(spec.add(FieldElement(ax), FieldElement(by)));
                if !odometer_next(&mut pt[..nx], p) {
                    break;
                }
            }
            if av.count(FieldElement::ZERO) == pnx {
                acc.b_on_e.record(FieldElement(by));
                acc.ok &= sum.count(FieldElement(by)) == pnx;
            } else {
                acc.ok &= histogram_is_flat(&sum) && histogram_is_flat(&av);
            }
            acc.sum.merge(&sum);
            acc.a.merge(&av);
        },
        |mut a1, a2| {
            a1.ok &= a2.ok;
            a1.sum.merge(&a2.sum);
            a1.a.merge(&a2.a);
            a1.b_on_e.merge(&a2.b_on_e);
            a1
        },
    )?;
    let e_count = acc.b_on_e.total();
    let mut e_delta = ValueHistogram::new(spec);
    e_delta.record_many(FieldElement::ZERO, e_count * pnx);
    let flat_after = |h: &ValueHistogram, sub: &ValueHistogram| {
        h.checked_sub(sub).is_some_and(|d| histogram_is_flat(&d))
    };
    let difference_flat =
        flat_after(&acc.sum, &acc.b_on_e.scaled(pnx)) && flat_after(&acc.a, &e_delta);
    let lhs = histogram_to_bias(&acc.sum, spec)?.value;
    let rhs = if e_count == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        histogram_to_bias(&acc.a, spec)?.value * histogram_to_bias(&acc.b_on_e, spec)?.value
    };
    Ok(IdentityCheck {
        slices_ok: acc.ok,
        difference_flat,
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorBelow {
    pub value: f64,
    pub argmax: Polynomial,
    pub report: BiasReport,
}

/// The best combination `P = sum_i c_i gens_i` for `bias(f - P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BestCombination {
    pub coeffs: Vec<FieldElement>,
    pub combination: Polynomial,
    pub report: BiasReport,
}

/// Maximizes `bias(f - sum_i c_i gens_i)` over all `c` in `F_p^m` by
/// exhaustion. Ties go to the lexicographically first `c`. `hint`
/// describes the feasible envelope for budget errors.
pub fn best_combination(
    f: &Polynomial,
    gens: &[Polynomial],
    budget: u64,
    hint: &str,
) -> Result<BestCombination> {
    let all: Vec<&Polynomial> = std::iter::once(f).chain(gens).collect();
    let (spec, n) = same_ring(&all)?;
    let p = spec.p();
    let m = gens.len();
    let candidates = domain_size(p, m)
        .filter(|&c| c <= budget)
        .ok_or_else(|| Error::Budget {
            needed: (p as f64).powi(m as i32),
            budget,
            hint: hint.into(),
        })?;
    let points = check_budget(p, n, budget, hint)?;
    if candidates.saturating_mul(points) > budget {
        return Err(Error::Budget {
            needed: candidates as f64 * points as f64,
            budget,
            hint: hint.into(),
        });
    }
    // Tabulate f and every generator once.
    let fev = f.evaluator();
    let gevs: Vec<Evaluator> = gens.iter().map(Polynomial::evaluator).collect();
    let mut table: Vec<(u64, Vec<u64>)> = Vec::with_capacity(points as usize);
    crate::enumerate::for_each_point(p, n, |x| {
        table.push((
            fev.eval_raw(x),
            gevs.iter().map(|e| e.eval_raw(x)).collect(),
        ));
    });
    let decode = |mut idx: u64| -> Vec<u64> {
        let mut c = vec![0u64; m];
        for ci in c.iter_mut().rev() {
            *ci = idx % p;
            idx /= p;
        }
        c
    };
    let score = |idx: u64| -> (f64, u64, ValueHistogram) {
        let c = decode(idx);
        let mut h = ValueHistogram::new(spec);
        for (fx, gs) in &table {
            let s = c.iter().zip(gs).fold(0u64, |s, (ci, gi)| (s + ci * gi) % p);
            h.record(spec.sub(FieldElement(*fx), FieldElement(s)));
        }
        let b = histogram_to_bias(&h, spec).expect("nonempty").magnitude;
        (b, idx, h)
    };
    let better = |a: (f64, u64, ValueHistogram), b: (f64, u64, ValueHistogram)| {
        if b.0 > a.0 + 1e-12 || ((b.0 - a.0).abs() <= 1e-12 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let (_, idx, hist) = (0..candidates)
        .into_par_iter()
        .map(score)
        .reduce_with(better)
        .expect("at least the zero combination");
    let coeffs: Vec<FieldElement> = decode(idx).into_iter().map(FieldElement).collect();
    let combination = gens
        .iter()
        .zip(&coeffs)
        .fold(Polynomial::zero(spec, n), |acc, (g, &c)| {
            acc.add(&g.scale(c)).expect("same ring")
        });
    Ok(BestCombination {
        coeffs,
        combination,
        report: BiasReport::from_histogram(hist, spec, Method::Exact)?,
    })
}

/// `cor_{<d}(f)` by exhausting `Poly_{<d}`, constants included. Ties go to
/// the lexicographically first coefficient vector over the increasing
/// graded-lex monomial basis.
pub fn cor_below(f: &Polynomial, d: u32, budget: u64) -> Result<CorBelow> {
    let spec = f.spec();
    let n = f.nvars();
    let basis: Vec<Polynomial> = if d == 0 {
        Vec::new()
    } else {
        monomials_up_to_degree(n, d - 1)
            .into_iter()
            .map(|m| Polynomial::monomial(spec, m, FieldElement::ONE))
            .collect()
    };
    let best = best_combination(
        f,
        &basis,
        budget,
        "exhaustive cor_{<d} is practical only for p <= 5, n <= 2, d <= 2",
    )?;
    Ok(CorBelow {
        value: best.report.magnitude,
        argmax: best.combination,
        report: best.report,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EasyDirection {
    /// `bias(Delta^d f)`.
    pub derivative_bias: f64,
    /// `cor_{<d}(f)`.
    pub correlation: f64,
    pub holds: bool,
}

/// `bias(Delta^d f) >= cor_{<d}(f)^{2^d}`.
pub fn check_easy_direction(f: &Polynomial, d: usize, budget: u64) -> Result<EasyDirection> {
    let derivative_bias = gowers_norm(f, d, Estimate::Exact { budget })?
        .derivative
        .magnitude;
    let correlation = cor_below(f, d as u32, budget)?.value;
    let holds = derivative_bias >= correlation.powi(1 << d) - TOLERANCE;
    Ok(EasyDirection {
        derivative_bias,
        correlation,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeriveBiasReport {
    /// A direction maximizing `bias(h~ - d_c g~)`, first in lexicographic order.
    pub c_star: Vec<FieldElement>,
    pub derivative_bias: f64,
    /// `E_c bias(h~ - d_c g~)`.
    pub mean_bound: f64,
    /// `bias(h~ - d_{c*} g~)`.
    pub max_bound: f64,
    /// `bias(g~)`.
    pub polar_bias: f64,
    /// `Delta^d f` and `g~(v, x) + h~(v)` have identical value histograms.
    pub histograms_match: bool,
    pub first_holds: bool,
    pub second_holds: bool,
}

/// Per-direction biases `bias(h~ - d_c g~)` for all `c` in row-major order,
/// with `g = f_{d+1}` and `h = f_d`.
pub fn derivative_direction_biases(
    g_tilde: &MultilinearForm,
    h_tilde: &MultilinearForm,
    budget: u64,
) -> Result<Vec<(Vec<FieldElement>, f64)>> {
    let spec = g_tilde.spec();
    let n = g_tilde.n();
    check_budget(spec.p(), n, budget, "too many directions")?;
    let mut dirs = Vec::new();
    crate::enumerate::for_each_point(spec.p(), n, |c| {
        dirs.push(c.iter().map(|&v| FieldElement(v)).collect::<Vec<_>>())
    });
    dirs.into_par_iter()
        .map(|c| {
            let form = h_tilde.sub(&g_tilde.block_derivative(&c)?)?;
            Ok((c, multilinear_bias(&form, budget)?.magnitude))
        })
        .collect()
}

/// Checks `bias(Delta^d f) <= E_c bias(h~ - d_c g~) <= ...` and
/// `bias(Delta^d f) <= bias(g~)` for `f` of degree at most `d + 1`.
pub fn derive_bias_bounds(f: &Polynomial, d: usize, budget: u64) -> Result<DeriveBiasReport> {
    let spec = f.spec();
    let p = spec.p();
    if d == 0 {
        return Err(Error::precondition("order d must be at least 1"));
    }
    if p == 2 || p <= d as u64 + 1 {
        return Err(Error::precondition(format!(
            "need odd p > d+1, got p={p}, d={d}"
        )));
    }
    if let Degree::Finite(k) = f.degree() {
        if k as usize > d + 1 {
            return Err(Error::precondition(format!(
                "degree {k} exceeds d+1 = {}",
                d + 1
            )));
        }
    }
    let n = f.nvars();
    let g_tilde = polarize(&f.homogeneous_component(d as u32 + 1));
    let h_tilde = polarize(&f.homogeneous_component(d as u32));
    let dd = f.iterated_discrete_derivative(d);
    let dd_hist = histogram_exact(&dd, budget)?;
    let derivative_bias = histogram_to_bias(&dd_hist, spec)?.magnitude;

    let combined = g_tilde.poly().add(
        &h_tilde
            .poly()
            .embed(n * (d + 1), &(0..n * d).collect::<Vec<_>>()),
    )?;
    let histograms_match = histogram_exact(&combined, budget)? == dd_hist;

    let per_dir = derivative_direction_biases(&g_tilde, &h_tilde, budget)?;
    let mean_bound = per_dir.iter().map(|(_, b)| b).sum::<f64>() / per_dir.len() as f64;
    let (c_star, max_bound) = per_dir
        .iter()
        .fold(
            None::<(&Vec<FieldElement>, f64)>,
            |best, (c, b)| match best {
                Some((_, bb)) if *b <= bb + 1e-12 => best,
                _ => Some((c, *b)),
            },
        )
        .map(|(c, b)| (c.clone(), b))
        .expect("at least one direction");
    let polar_bias = multilinear_bias(&g_tilde, budget)?.magnitude;
    Ok(DeriveBiasReport {
        c_star,
        derivative_bias,
        mean_bound,
        max_bound,
        polar_bias,
        histograms_match,
        first_holds: derivative_bias <= mean_bound + TOLERANCE,
        second_holds: derivative_bias <= polar_bias + TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarningCheck {
    pub count: u64,
    /// `n - sum deg A_i`, zero polynomials counted with degree 0.
    pub exponent: i64,
    pub holds: bool,
}

/// Warning's second theorem: a nonempty `Z(A)` has at least
/// `p^{n - sum deg A_i}` points.
pub fn check_warning(
    a: &[Polynomial],
    nvars: usize,
    spec: FieldSpec,
    budget: u64,
) -> Result<WarningCheck> {
    let zero = Polynomial::zero(spec, nvars);
    let report = zero_set(a, &zero, budget)?;
    let degsum: i64 = a
        .iter()
        .map(|q| q.degree().finite().unwrap_or(0) as i64)
        .sum();
    let exponent = nvars as i64 - degsum;
    let holds = report.count == 0
        || if exponent <= 0 {
            true
        } else {
            report.count >= domain_size(spec.p(), exponent as usize).unwrap_or(u64::MAX)
        };
    Ok(WarningCheck {
        count: report.count,
        exponent,
        holds,
    })
}
