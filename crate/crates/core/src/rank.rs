//! Rank and partition-rank certificates: verification, compression and
//! bounded exact search.
//!
//! Searches run by iterative deepening on the length `r`. For a fixed `r`
//! only the span of the left factors of each shape matters (the right
//! factors are then found by a linear solve), so left factors are
//! enumerated as subspaces through their reduced echelon bases. A search
//! that exhausts every subspace up to `r_max` proves that no certificate of
//! that length exists.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::ControlFlow;

use crate::bias::multilinear_bias;
use crate::enumerate::DEFAULT_BUDGET;
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::{express_in_span, for_each_subspace, Matrix};
use crate::multilinear::MultilinearForm;
use crate::poly::{monomials_of_degree, HomogeneousForm, Monomial, Polynomial};

/// Outcome of a certificate check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(String),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Verdict::Valid => None,
            Verdict::Invalid(r) => Some(r),
        }
    }
}

/// Three-valued result of a bounded search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<C> {
    Found(C),
    /// Every candidate up to the length bound was ruled out.
    Absent,
    /// The node budget ran out first.
    Inconclusive {
        explored: u64,
    },
}

impl<C> SearchOutcome<C> {
    pub fn found(self) -> Option<C> {
        match self {
            SearchOutcome::Found(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, SearchOutcome::Absent)
    }
}

/// `target = sum_i alpha_i beta_i` with both factors of positive degree
/// below `deg(target)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionCert {
    pub target: HomogeneousForm,
    pub factors: Vec<(HomogeneousForm, HomogeneousForm)>,
}

impl DecompositionCert {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn sum(&self) -> Result<Polynomial> {
        let mut acc = Polynomial::zero(self.target.spec(), self.target.nvars());
        for (a, b) in &self.factors {
            acc = acc.add(&a.poly().mul(b.poly())?)?;
        }
        Ok(acc)
    }

    pub fn verify(&self) -> Verdict {
        let k = self.target.degree();
        for (i, (a, b)) in self.factors.iter().enumerate() {
            let (da, db) = (a.degree(), b.degree());
            if da >= k || db >= k || da + db != k {
                return Verdict::Invalid(format!(
                    "factor {}: degrees ({da}, {db}) do not split degree {k}",
                    i + 1
                ));
            }
        }
        match self.sum() {
            Err(e) => Verdict::Invalid(format!("factor ring mismatch: {e}")),
            Ok(s) if &s != self.target.poly() => Verdict::Invalid("sum mismatch".into()),
            Ok(_) => Verdict::Valid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrFactor {
    /// The blocks of `r`; `q` lives on the rest of the target's support.
    pub blocks: BTreeSet<usize>,
    pub r: MultilinearForm,
    pub q: MultilinearForm,
}

/// `target = sum_i R_i(x_{I_i}) Q_i(x_{I_i^c})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionRankCert {
    pub target: MultilinearForm,
    pub factors: Vec<PrFactor>,
}

impl PartitionRankCert {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn verify(&self) -> Verdict {
        let support = self.target.support();
        let mut acc = Polynomial::zero(self.target.spec(), self.target.poly().nvars());
        for (i, f) in self.factors.iter().enumerate() {
            let tag = i + 1;
            if f.blocks.is_empty()
                || !f.blocks.is_subset(support)
                || f.blocks.len() == support.len()
            {
                return Verdict::Invalid(format!(
                    "factor {tag}: block set is not a proper nonempty subset"
                ));
            }
            let rest: BTreeSet<usize> = support.difference(&f.blocks).copied().collect();
            if f.r.support() != &f.blocks || f.q.support() != &rest {
                return Verdict::Invalid(format!(
                    "factor {tag}: factor supports do not match the partition"
                ));
            }
            if f.r.n() != self.target.n()
                || f.r.blocks() != self.target.blocks()
                || f.q.n() != self.target.n()
                || f.q.blocks() != self.target.blocks()
            {
                return Verdict::Invalid(format!(
                    "factor {tag}: block layout differs from the target"
                ));
            }
            match f.r.poly().mul(f.q.poly()).and_then(|prod| acc.add(&prod)) {
                Ok(s) => acc = s,
                Err(e) => return Verdict::Invalid(format!("factor {tag}: {e}")),
            }
        }
        if &acc != self.target.poly() {
            return Verdict::Invalid("sum mismatch".into());
        }
        Verdict::Valid
    }
}

/// Removes linear dependences among same-degree left factors: whenever
/// `alpha_r = sum_i c_i alpha_i`, the term is absorbed as
/// `alpha_i (beta_i + c_i beta_r)`. Zero left factors are dropped.
pub fn compress_decomposition(cert: &DecompositionCert) -> Result<DecompositionCert> {
    if let Verdict::Invalid(why) = cert.verify() {
        return Err(Error::InvalidCertificate(why));
    }
    let spec = cert.target.spec();
    let n = cert.target.nvars();
    let mut out: Vec<(HomogeneousForm, HomogeneousForm)> = Vec::new();
    // Indices into `out` of the kept factors, per left degree.
    let mut kept: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (a, b) in &cert.factors {
        let basis = monomials_of_degree(n, a.degree());
        let coords =
            |f: &HomogeneousForm| f.poly().coefficient_vector(&basis).expect("homogeneous");
        let group = kept.entry(a.degree()).or_default();
        let span: Vec<Vec<FieldElement>> = group.iter().map(|&i| coords(&out[i].0)).collect();
        match express_in_span(spec, &span, &coords(a)) {
            Some(c) => {
                for (&i, ci) in group.iter().zip(c) {
                    if ci.is_zero() {
                        continue;
                    }
                    let beta = out[i].1.poly().add(&b.poly().scale(ci))?;
                    out[i].1 = HomogeneousForm::new(beta, b.degree())?;
                }
            }
            None => {
                group.push(out.len());
                out.push((a.clone(), b.clone()));
            }
        }
    }
    let result = DecompositionCert {
        target: cert.target.clone(),
        factors: out,
    };
    debug_assert!(result.verify().is_valid());
    Ok(result)
}

/// One factor shape: left factors range over the span of `left`, right
/// factors over the span of `right`.
struct Shape {
    left: Vec<Polynomial>,
    right: Vec<Polynomial>,
}

struct Engine<'a> {
    spec: FieldSpec,
    shapes: &'a [Shape],
    /// `products[s][l][m]`: coordinates of `left_l * right_m`.
    products: Vec<Vec<Vec<Vec<FieldElement>>>>,
    target: Vec<FieldElement>,
    nodes: u64,
    budget: u64,
}

/// Left factor coefficient rows and right factors per chosen shape.
type Solution = Vec<(usize, Vec<FieldElement>, Polynomial)>;

enum Stop {
    Found(Solution),
    Budget,
}

impl<'a> Engine<'a> {
    fn new(spec: FieldSpec, shapes: &'a [Shape], target: &Polynomial, budget: u64) -> Self {
        let mut index: BTreeMap<Monomial, usize> = BTreeMap::new();
        let mut raw: Vec<Vec<Vec<Polynomial>>> = Vec::new();
        for s in shapes {
            let table: Vec<Vec<Polynomial>> = s
                .left
                .iter()
                .map(|l| {
                    s.right
                        .iter()
                        .map(|r| l.mul(r).expect("same ring"))
                        .collect()
                })
                .collect();
            for row in &table {
                for prod in row {
                    for (m, _) in prod.terms() {
                        let next = index.len();
                        index.entry(m.clone()).or_insert(next);
                    }
                }
            }
            raw.push(table);
        }
        for (m, _) in target.terms() {
            let next = index.len();
            index.entry(m.clone()).or_insert(next);
        }
        let dense = |f: &Polynomial| {
            let mut v = vec![FieldElement::ZERO; index.len()];
            for (m, c) in f.terms() {
                v[index[m]] = c;
            }
            v
        };
        let products = raw
            .iter()
            .map(|t| {
                t.iter()
                    .map(|row| row.iter().map(&dense).collect())
                    .collect()
            })
            .collect();
        Engine {
            spec,
            shapes,
            products,
            target: dense(target),
            nodes: 0,
            budget,
        }
    }

    /// Tries every choice of subspaces with dimensions `dims`.
    fn run(&mut self, dims: &[usize]) -> ControlFlow<Stop> {
        let mut chosen: Vec<Vec<Vec<FieldElement>>> = Vec::new();
        self.recurse(dims, &mut chosen)
    }

    fn recurse(
        &mut self,
        dims: &[usize],
        chosen: &mut Vec<Vec<Vec<FieldElement>>>,
    ) -> ControlFlow<Stop> {
        let s = chosen.len();
        if s == dims.len() {
            self.nodes += 1;
            if self.nodes > self.budget {
                return ControlFlow::Break(Stop::Budget);
            }
            return match self.solve(chosen) {
                Some(sol) => ControlFlow::Break(Stop::Found(sol)),
                None => ControlFlow::Continue(()),
            };
        }
        let ambient = self.shapes[s].left.len();
        let spec = self.spec;
        for_each_subspace(spec, ambient, dims[s], |basis| {
            chosen.push(basis.to_vec());
            let r = self.recurse(dims, chosen);
            chosen.pop();
            r
        })
    }

    fn solve(&self, chosen: &[Vec<Vec<FieldElement>>]) -> Option<Solution> {
        let k = self.spec;
        let rows = self.target.len();
        let mut cols: Vec<Vec<FieldElement>> = Vec::new();
        let mut layout: Vec<(usize, usize)> = Vec::new();
        for (s, basis) in chosen.iter().enumerate() {
            for (j, coeffs) in basis.iter().enumerate() {
                for m in 0..self.shapes[s].right.len() {
                    let mut col = vec![FieldElement::ZERO; rows];
                    for (l, &c) in coeffs.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        for (dst, &v) in col.iter_mut().zip(&self.products[s][l][m]) {
                            *dst = k.add(*dst, k.mul(c, v));
                        }
                    }
                    cols.push(col);
                    layout.push((s, j));
                }
            }
        }
        if cols.is_empty() {
            return self.target.iter().all(|v| v.is_zero()).then(Vec::new);
        }
        let x = Matrix::from_rows(k, &cols)
            .transpose()
            .solve(&self.target)?;
        let mut out: Solution = Vec::new();
        let mut pos = 0;
        for (s, basis) in chosen.iter().enumerate() {
            let shape = &self.shapes[s];
            for coeffs in basis {
                let mut right = Polynomial::zero(k, shape.right[0].nvars());
                for r in &shape.right {
                    right = right.add(&r.scale(x[pos])).expect("same ring");
                    pos += 1;
                }
                out.push((s, coeffs.clone(), right));
            }
        }
        debug_assert_eq!(pos, layout.len());
        Some(out)
    }
}

/// All `dims` with `sum = r` and `dims[s] <= caps[s]`, lexicographically.
fn compositions(r: usize, caps: &[usize]) -> Vec<Vec<usize>> {
    fn rec(left: usize, caps: &[usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == caps.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for m in 0..=left.min(caps[cur.len()]) {
            cur.push(m);
            rec(left - m, caps, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, caps, &mut Vec::new(), &mut out);
    out
}

/// Iterative deepening over `r_start..=r_max`.
fn deepen(
    spec: FieldSpec,
    shapes: &[Shape],
    target: &Polynomial,
    r_start: usize,
    r_max: usize,
    budget: u64,
) -> SearchOutcome<Solution> {
    let mut engine = Engine::new(spec, shapes, target, budget);
    let caps: Vec<usize> = shapes.iter().map(|s| s.left.len()).collect();
    for r in r_start..=r_max {
        for dims in compositions(r, &caps) {
            match engine.run(&dims) {
                ControlFlow::Continue(()) => {}
                ControlFlow::Break(Stop::Found(sol)) => return SearchOutcome::Found(sol),
                ControlFlow::Break(Stop::Budget) => {
                    return SearchOutcome::Inconclusive {
                        explored: engine.nodes - 1,
                    }
                }
            }
        }
    }
    SearchOutcome::Absent
}

fn combine(spec: FieldSpec, basis: &[Polynomial], coeffs: &[FieldElement]) -> Polynomial {
    basis
        .iter()
        .zip(coeffs)
        .fold(Polynomial::zero(spec, basis[0].nvars()), |acc, (b, &c)| {
            acc.add(&b.scale(c)).expect("same ring")
        })
}

/// Searches for a decomposition of `g` of length at most `r_max`, trying
/// at most `budget` subspace choices. The first certificate found has
/// minimal length.
pub fn search_rank(
    g: &HomogeneousForm,
    r_max: usize,
    budget: u64,
) -> SearchOutcome<DecompositionCert> {
    let spec = g.spec();
    let n = g.nvars();
    let k = g.degree();
    let mono = |d: u32| -> Vec<Polynomial> {
        monomials_of_degree(n, d)
            .into_iter()
            .map(|m| Polynomial::monomial(spec, m, FieldElement::ONE))
            .collect()
    };
    // The left factor is the one of smaller degree.
    let shapes: Vec<Shape> = (1..=k / 2)
        .filter(|&a| a < k)
        .map(|a| Shape {
            left: mono(a),
            right: mono(k - a),
        })
        .collect();
    let degrees: Vec<u32> = (1..=k / 2).filter(|&a| a < k).collect();
    match deepen(spec, &shapes, g.poly(), 0, r_max, budget) {
        SearchOutcome::Found(sol) => {
            let factors = sol
                .into_iter()
                .map(|(s, coeffs, right)| {
                    let a = degrees[s];
                    let alpha = HomogeneousForm::new(combine(spec, &shapes[s].left, &coeffs), a)
                        .expect("degree a");
                    let beta = HomogeneousForm::new(right, k - a).expect("degree k-a");
                    (alpha, beta)
                })
                .collect();
            let cert = DecompositionCert {
                target: g.clone(),
                factors,
            };
            debug_assert!(cert.verify().is_valid());
            SearchOutcome::Found(cert)
        }
        SearchOutcome::Absent => SearchOutcome::Absent,
        SearchOutcome::Inconclusive { explored } => SearchOutcome::Inconclusive { explored },
    }
}

/// The multilinear monomials with one variable from each block of `blocks`.
fn multilinear_monomials(
    spec: FieldSpec,
    n: usize,
    nblocks: usize,
    blocks: &BTreeSet<usize>,
) -> Vec<Polynomial> {
    let mut out = vec![vec![0u32; n * nblocks]];
    for &b in blocks {
        out = out
            .into_iter()
            .flat_map(|e| {
                (0..n).map(move |i| {
                    let mut e = e.clone();
                    e[b * n + i] = 1;
                    e
                })
            })
            .collect();
    }
    let mut polys: Vec<Polynomial> = out
        .into_iter()
        .map(|e| Polynomial::monomial(spec, Monomial::new(e), FieldElement::ONE))
        .collect();
    polys.sort_by(|a, b| {
        a.terms()
            .next()
            .map(|t| t.0)
            .cmp(&b.terms().next().map(|t| t.0))
    });
    polys
}

/// Exact partition rank of a bilinear form: the rank of its coefficient
/// matrix, with rank-one terms read off the echelon form.
fn bilinear_partition_rank(t: &MultilinearForm) -> PartitionRankCert {
    let spec = t.spec();
    let n = t.n();
    let mut it = t.support().iter();
    let (a, b) = (*it.next().expect("degree 2"), *it.next().expect("degree 2"));
    let mut m = Matrix::zeros(spec, n, n);
    for (mono, c) in t.poly().terms() {
        let e = mono.exps();
        let i = (0..n).find(|&i| e[a * n + i] == 1).expect("multilinear");
        let j = (0..n).find(|&j| e[b * n + j] == 1).expect("multilinear");
        m.set(i, j, c);
    }
    // M = C R with R the nonzero echelon rows and C the pivot columns of M.
    let ech = m.rref();
    let factors = ech
        .pivots
        .iter()
        .enumerate()
        .map(|(row, &pc)| {
            let left: Vec<FieldElement> = (0..n).map(|i| m.get(i, pc)).collect();
            let right: Vec<FieldElement> = ech.matrix.row(row).to_vec();
            PrFactor {
                blocks: [a].into_iter().collect(),
                r: MultilinearForm::linear(spec, n, t.blocks(), a, &left),
                q: MultilinearForm::linear(spec, n, t.blocks(), b, &right),
            }
        })
        .collect();
    PartitionRankCert {
        target: t.clone(),
        factors,
    }
}

/// Matrix rank of a bilinear form's coefficient matrix.
pub fn bilinear_rank(t: &MultilinearForm) -> Result<usize> {
    if t.degree() != 2 {
        return Err(Error::precondition(format!(
            "expected a bilinear form, got degree {}",
            t.degree()
        )));
    }
    Ok(bilinear_partition_rank(t).len())
}

/// Searches for a partition-rank certificate of length at most `r_max`.
/// Degree 2 is solved exactly by elimination. Otherwise lengths below
/// `AR(T)` are skipped, since `AR <= PR`.
pub fn search_partition_rank(
    t: &MultilinearForm,
    r_max: usize,
    budget: u64,
) -> SearchOutcome<PartitionRankCert> {
    let spec = t.spec();
    if t.is_zero() {
        return SearchOutcome::Found(PartitionRankCert {
            target: t.clone(),
            factors: Vec::new(),
        });
    }
    let support: Vec<usize> = t.support().iter().copied().collect();
    let d = support.len();
    if d < 2 {
        return SearchOutcome::Absent;
    }
    if d == 2 {
        let cert = bilinear_partition_rank(t);
        return if cert.len() <= r_max {
            SearchOutcome::Found(cert)
        } else {
            SearchOutcome::Absent
        };
    }
    // Unordered partitions {I, I^c}; the left side is the smaller part,
    // or the one holding the first support block on a tie.
    let mut parts: Vec<BTreeSet<usize>> = Vec::new();
    for mask in 1u64..(1 << d) - 1 {
        let set: BTreeSet<usize> = (0..d)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| support[i])
            .collect();
        let size = set.len();
        if 2 * size < d || (2 * size == d && set.contains(&support[0])) {
            parts.push(set);
        }
    }
    let shapes: Vec<Shape> = parts
        .iter()
        .map(|i| {
            let rest: BTreeSet<usize> = t.support().difference(i).copied().collect();
            Shape {
                left: multilinear_monomials(spec, t.n(), t.blocks(), i),
                right: multilinear_monomials(spec, t.n(), t.blocks(), &rest),
            }
        })
        .collect();
    let r_start = match multilinear_bias(t, DEFAULT_BUDGET) {
        Ok(b) if b.magnitude > 0.0 => {
            let ar = -b.magnitude.ln() / (spec.p() as f64).ln();
            (ar - 1e-9).ceil().max(0.0) as usize
        }
        _ => 0,
    };
    match deepen(spec, &shapes, t.poly(), r_start, r_max, budget) {
        SearchOutcome::Found(sol) => {
            let factors = sol
                .into_iter()
                .map(|(s, coeffs, right)| {
                    let blocks = parts[s].clone();
                    let rest: BTreeSet<usize> = t.support().difference(&blocks).copied().collect();
                    let r = MultilinearForm::with_support(
                        combine(spec, &shapes[s].left, &coeffs),
                        t.n(),
                        t.blocks(),
                        blocks.clone(),
                    )
                    .expect("spanned by multilinear monomials");
                    let q = MultilinearForm::with_support(right, t.n(), t.blocks(), rest)
                        .expect("spanned by multilinear monomials");
                    PrFactor { blocks, r, q }
                })
                .collect();
            let cert = PartitionRankCert {
                target: t.clone(),
                factors,
            };
            debug_assert!(cert.verify().is_valid());
            SearchOutcome::Found(cert)
        }
        SearchOutcome::Absent => SearchOutcome::Absent,
        SearchOutcome::Inconclusive { explored } => SearchOutcome::Inconclusive { explored },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArPrCheck {
    pub analytic_rank: f64,
    pub length: usize,
    pub holds: bool,
}

/// `AR(T) <= |cert|`, i.e. `bias(T) >= p^{-|cert|}`.
pub fn check_ar_pr_inequality(cert: &PartitionRankCert, budget: u64) -> Result<ArPrCheck> {
    let ar = crate::bias::analytic_rank(&cert.target, budget)?
        .rank
        .value();
    Ok(ArPrCheck {
        analytic_rank: ar,
        length: cert.len(),
        holds: ar <= cert.len() as f64 + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    fn form(s: &str) -> HomogeneousForm {
        HomogeneousForm::from_polynomial(parse_polynomial(s).unwrap()).unwrap()
    }

    fn ml(s: &str) -> MultilinearForm {
        MultilinearForm::parse(s).unwrap()
    }

    #[test]
    fn verify_examples() {
        let t = form("p=5; n=4; x1*x2 + x3*x4");
        let pair = |a: &str, b: &str| (form(a), form(b));
        let good = DecompositionCert {
            target: t.clone(),
            factors: vec![
                pair("p=5; n=4; x1", "p=5; n=4; x2"),
                pair("p=5; n=4; x3", "p=5; n=4; x4"),
            ],
        };
        assert!(good.verify().is_valid());
        let short = DecompositionCert {
            target: t,
            factors: vec![pair("p=5; n=4; x1", "p=5; n=4; x2")],
        };
        assert_eq!(short.verify().reason(), Some("sum mismatch"));
        let lin = DecompositionCert {
            target: form("p=5; n=2; x1*x2"),
            factors: vec![pair("p=5; n=2; x1*x2", "p=5; n=2; 1")],
        };
        assert!(!lin.verify().is_valid());
    }

    #[test]
    fn pr_verify_example() {
        let spec = FieldSpec::new(5).unwrap();
        let t = ml("blocks=2; p=5; n=2; x1_1*x2_2 + x1_2*x2_1");
        let e = |i: usize| {
            let mut v = vec![FieldElement::ZERO; 2];
            v[i] = FieldElement::ONE;
            v
        };
        let f = |i: usize, j: usize| PrFactor {
            blocks: [0].into_iter().collect(),
            r: MultilinearForm::linear(spec, 2, 2, 0, &e(i)),
            q: MultilinearForm::linear(spec, 2, 2, 1, &e(j)),
        };
        let cert = PartitionRankCert {
            target: t.clone(),
            factors: vec![f(0, 1), f(1, 0)],
        };
        assert!(cert.verify().is_valid());
        let bad = PartitionRankCert {
            target: t,
            factors: vec![f(0, 1)],
        };
        assert!(!bad.verify().is_valid());
    }

    #[test]
    fn compression_examples() {
        let pair = |a: &str, b: &str| (form(a), form(b));
        let cert = DecompositionCert {
            target: form("p=5; n=3; x1*x2 + x1*x3"),
            factors: vec![
                pair("p=5; n=3; x1", "p=5; n=3; x2"),
                pair("p=5; n=3; x1", "p=5; n=3; x3"),
            ],
        };
        let c = compress_decomposition(&cert).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.factors[0].1, form("p=5; n=3; x2 + x3"));

        let cert = DecompositionCert {
            target: form("p=5; n=4; x1*x4 + x2*x4 + x1*x3 + x2*x3"),
            factors: vec![
                pair("p=5; n=4; x1", "p=5; n=4; x4"),
                pair("p=5; n=4; x2", "p=5; n=4; x4"),
                pair("p=5; n=4; x1 + x2", "p=5; n=4; x3"),
            ],
        };
        let c = compress_decomposition(&cert).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.verify().is_valid());

        let indep = DecompositionCert {
            target: form("p=5; n=4; x1*x2 + x3*x4"),
            factors: vec![
                pair("p=5; n=4; x1", "p=5; n=4; x2"),
                pair("p=5; n=4; x3", "p=5; n=4; x4"),
            ],
        };
        assert_eq!(compress_decomposition(&indep).unwrap(), indep);
    }

    #[test]
    fn rank_search_examples() {
        let c = search_rank(&form("p=5; n=2; x1*x2"), 3, 1_000_000)
            .found()
            .unwrap();
        assert_eq!(c.len(), 1);
        let g = form("p=3; n=4; x1*x2 + x3*x4");
        assert!(search_rank(&g, 1, 10_000_000).is_absent());
        assert_eq!(search_rank(&g, 2, 10_000_000).found().unwrap().len(), 2);
        let c = search_rank(&form("p=5; n=3; x1*x2*x3"), 2, 1_000_000)
            .found()
            .unwrap();
        assert_eq!(c.len(), 1);
        assert!(search_rank(&form("p=5; n=2; x1"), 3, 1000).is_absent());
        assert!(matches!(
            search_rank(&g, 2, 3),
            SearchOutcome::Inconclusive { .. }
        ));
        let zero = HomogeneousForm::zero(FieldSpec::new(5).unwrap(), 2, 2);
        assert!(search_rank(&zero, 0, 10).found().unwrap().is_empty());
    }

    #[test]
    fn partition_rank_examples() {
        let t = ml("blocks=2; p=5; n=2; x1_1*x2_2 + x1_2*x2_1");
        let c = search_partition_rank(&t, 5, 1000).found().unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.verify().is_valid());
        let t = ml("blocks=3; p=5; n=1; x1_1*x2_1*x3_1");
        assert_eq!(search_partition_rank(&t, 3, 1000).found().unwrap().len(), 1);
        let z = MultilinearForm::zero(FieldSpec::new(5).unwrap(), 2, 3, (0..3).collect());
        assert!(search_partition_rank(&z, 0, 10).found().unwrap().is_empty());
        // x y z + x' y' z' has partition rank 2 over any field.
        let t = ml("blocks=3; p=3; n=2; x1_1*x2_1*x3_1 + x1_2*x2_2*x3_2");
        assert!(search_partition_rank(&t, 1, 1_000_000).is_absent());
        let c = search_partition_rank(&t, 2, 1_000_000).found().unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.verify().is_valid());
    }

    #[test]
    fn ar_pr_examples() {
        let t = ml("blocks=2; p=5; n=1; x1_1*x2_1");
        let c = search_partition_rank(&t, 2, 10).found().unwrap();
        let chk = check_ar_pr_inequality(&c, DEFAULT_BUDGET).unwrap();
        assert!(chk.holds && (chk.analytic_rank - 1.0).abs() < 1e-12);
        let z = MultilinearForm::zero(FieldSpec::new(5).unwrap(), 1, 2, (0..2).collect());
        let c = search_partition_rank(&z, 0, 10).found().unwrap();
        assert!(check_ar_pr_inequality(&c, DEFAULT_BUDGET).unwrap().holds);
    }

    #[test]
    fn compositions_enumerate_bounded_parts() {
        assert_eq!(compositions(2, &[1, 2]), vec![vec![0, 2], vec![1, 1]]);
        assert!(compositions(4, &[1, 2]).is_empty());
    }
}
