//! rk* certificates and their constructive transforms.
//!
//! An rk* certificate writes `f = sum_i alpha_i beta_i` with
//! `deg alpha_i <= deg beta_i < deg f`, where the degree-1 left factors of
//! full-degree terms have linearly independent linear parts. Terms of
//! degree at most `deg f - 2` may have a constant left factor; the
//! derivation-invariance identity produces such terms.

use std::collections::BTreeMap;

use crate::bias::best_combination;
use crate::enumerate::{sweep_count, sweep_fold};
use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::linalg::rank_of;
use crate::pipeline::CorrelationCert;
use crate::poly::{Degree, HomogeneousForm, Monomial, Polynomial};
use crate::rank::{DecompositionCert, Verdict};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RkStarCert {
    pub target: Polynomial,
    pub factors: Vec<(Polynomial, Polynomial)>,
}

fn deg(f: &Polynomial) -> Option<u32> {
    f.degree().finite()
}

/// Coordinates of the degree-1 part of `f`.
fn linear_part(f: &Polynomial) -> Vec<FieldElement> {
    let n = f.nvars();
    (0..n)
        .map(|i| f.coefficient(&Monomial::var(n, i)))
        .collect()
}

impl RkStarCert {
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// A homogeneous decomposition read as an rk* certificate, factors
    /// ordered so the left one has the smaller degree.
    pub fn from_decomposition(cert: &DecompositionCert) -> Self {
        RkStarCert {
            target: cert.target.poly().clone(),
            factors: cert
                .factors
                .iter()
                .map(|(a, b)| {
                    if a.degree() <= b.degree() {
                        (a.poly().clone(), b.poly().clone())
                    } else {
                        (b.poly().clone(), a.poly().clone())
                    }
                })
                .collect(),
        }
    }

    /// Indices of the terms whose left factor has degree 1 and whose
    /// product has full degree; these are the ones the affine condition
    /// constrains.
    pub fn constrained_terms(&self) -> Vec<usize> {
        let Some(k) = deg(&self.target) else {
            return Vec::new();
        };
        self.factors
            .iter()
            .enumerate()
            .filter(|(_, (a, b))| {
                deg(a) == Some(1) && deg(a).zip(deg(b)).map(|(x, y)| x + y) == Some(k)
            })
            .map(|(i, _)| i)
            .collect()
    }

    pub fn verify(&self) -> Verdict {
        let k = deg(&self.target);
        for (i, (a, b)) in self.factors.iter().enumerate() {
            let tag = i + 1;
            let (Some(da), Some(db), Some(k)) = (deg(a), deg(b), k) else {
                return Verdict::Invalid(format!(
                    "degree violation: term {tag} has a zero factor or the target is zero"
                ));
            };
            let ok = da <= db && db < k && da + db <= k && (da >= 1 || da + db + 2 <= k);
            if !ok {
                return Verdict::Invalid(format!(
                    "degree violation: term {tag} has factor degrees ({da}, {db}) against degree {k}"
                ));
            }
        }
        let mut acc = Polynomial::zero(self.target.spec(), self.target.nvars());
        for (a, b) in &self.factors {
            match a.mul(b).and_then(|prod| acc.add(&prod)) {
                Ok(s) => acc = s,
                Err(e) => return Verdict::Invalid(format!("sum mismatch: {e}")),
            }
        }
        if acc != self.target {
            return Verdict::Invalid("sum mismatch".into());
        }
        let lin: Vec<Vec<FieldElement>> = self
            .constrained_terms()
            .into_iter()
            .map(|i| linear_part(&self.factors[i].0))
            .collect();
        if rank_of(self.target.spec(), &lin) < lin.len() {
            return Verdict::Invalid("affine dependence".into());
        }
        Verdict::Valid
    }
}

/// `validate_rkstar`: sum, degree and affine-independence checks.
pub fn validate_rkstar(cert: &RkStarCert) -> Verdict {
    cert.verify()
}

fn require_valid(cert: &RkStarCert, what: &str) -> Result<()> {
    match cert.verify() {
        Verdict::Valid => Ok(()),
        Verdict::Invalid(why) => Err(Error::InvalidCertificate(format!("{what}: {why}"))),
    }
}

/// Concatenates certificates for `g` and `h` of different degrees into one
/// for `g + h`.
pub fn combine_subadditive(c1: &RkStarCert, c2: &RkStarCert) -> Result<RkStarCert> {
    if c1.target.degree() == c2.target.degree() {
        return Err(Error::precondition(
            "subadditivity requires distinct degrees",
        ));
    }
    require_valid(c1, "first certificate")?;
    require_valid(c2, "second certificate")?;
    let out = RkStarCert {
        target: c1.target.add(&c2.target)?,
        factors: c1.factors.iter().chain(&c2.factors).cloned().collect(),
    };
    require_valid(&out, "combined certificate").map_err(|e| Error::Internal(e.to_string()))?;
    Ok(out)
}

/// From `g = sum alpha_i beta_i`, the certificate
/// `g + d_c g = sum (alpha_i + d_c alpha_i)(beta_i + d_c beta_i) - sum (d_c alpha_i)(d_c beta_i)`,
/// dropping vanishing products. The input must have linearly independent
/// same-degree left factors (see `compress_decomposition`).
pub fn derive_invariance_transform(
    cert: &DecompositionCert,
    c: &[FieldElement],
) -> Result<RkStarCert> {
    if let Verdict::Invalid(why) = cert.verify() {
        return Err(Error::InvalidCertificate(why));
    }
    let mut base = RkStarCert::from_decomposition(cert);
    base.factors.retain(|(a, b)| !a.is_zero() && !b.is_zero());
    let spec = cert.target.spec();
    let n = cert.target.nvars();
    let mut by_degree: BTreeMap<u32, Vec<Vec<FieldElement>>> = BTreeMap::new();
    for (a, _) in &base.factors {
        let d = deg(a).expect("valid decomposition factors are nonzero");
        let basis = crate::poly::monomials_of_degree(n, d);
        by_degree
            .entry(d)
            .or_default()
            .push(a.coefficient_vector(&basis).expect("homogeneous"));
    }
    if by_degree.values().any(|vs| rank_of(spec, vs) < vs.len()) {
        return Err(Error::precondition(
            "left factors are linearly dependent; compress the decomposition first",
        ));
    }
    let g = cert.target.poly();
    let target = g.add(&g.formal_derivative(c)?)?;
    let mut factors = Vec::new();
    let mut corrections = Vec::new();
    for (a, b) in &base.factors {
        let (da, db) = (a.formal_derivative(c)?, b.formal_derivative(c)?);
        factors.push((a.add(&da)?, b.add(&db)?));
        if !da.is_zero() && !db.is_zero() {
            corrections.push((da.neg(), db));
        }
    }
    factors.extend(corrections);
    let out = RkStarCert { target, factors };
    require_valid(&out, "derivation-invariance certificate")
        .map_err(|e| Error::Internal(e.to_string()))?;
    Ok(out)
}

/// `rk*(g + h) <= 2 rk(g) + rk*(h - d_c g)`: transforms the certificate for
/// `g` and appends the one for `h - d_c g`.
pub fn chain_rule_combine(
    g_cert: &DecompositionCert,
    hc_cert: &RkStarCert,
    c: &[FieldElement],
) -> Result<RkStarCert> {
    let k = g_cert.target.degree();
    if let Some(dh) = deg(&hc_cert.target) {
        if dh >= k {
            return Err(Error::precondition(format!(
                "degree clash: deg(h - d_c g) = {dh} is not below deg(g) = {k}"
            )));
        }
    }
    let lifted = derive_invariance_transform(g_cert, c)?;
    combine_subadditive(&lifted, hc_cert)
}

/// Output of the perturbation step: `f - c0 = sum_i lambda_i A_i` with
/// `1 <= deg A_i <= deg f - 2` and `|Z(A)| >= p^{n-m}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationCert {
    pub source: RkStarCert,
    /// Source term indices: the `t` unconstrained terms first, then the
    /// constrained ones, each group in source order.
    pub order: Vec<usize>,
    pub t: usize,
    /// Values `y^1` of the unconstrained left factors.
    pub y: Vec<FieldElement>,
    /// Values `z^1` of the unconstrained right factors.
    pub z: Vec<FieldElement>,
    pub generators: Vec<Polynomial>,
    pub witnesses: Vec<Polynomial>,
    pub c0: FieldElement,
    /// `|Z(A)|`, counted exactly.
    pub zero_count: u64,
}

impl PerturbationCert {
    pub fn m(&self) -> usize {
        self.generators.len()
    }

    /// Re-checks the ideal membership, the degree window, `m <= 2r` and the
    /// zero-set count.
    pub fn verify(&self, budget: u64) -> Result<Verdict> {
        let f = &self.source.target;
        let spec = f.spec();
        let Some(k) = deg(f) else {
            return Ok(Verdict::Invalid("zero target".into()));
        };
        if self.generators.len() != self.witnesses.len() {
            return Ok(Verdict::Invalid(
                "generator and witness counts differ".into(),
            ));
        }
        if self.m() > 2 * self.source.len() {
            return Ok(Verdict::Invalid(format!(
                "m = {} exceeds 2r = {}",
                self.m(),
                2 * self.source.len()
            )));
        }
        for (i, a) in self.generators.iter().enumerate() {
            match deg(a) {
                Some(d) if d >= 1 && d + 2 <= k => {}
                _ => {
                    return Ok(Verdict::Invalid(format!(
                        "generator {} has degree outside [1, {}]",
                        i + 1,
                        k - 2
                    )))
                }
            }
        }
        let mut acc = Polynomial::constant(spec, f.nvars(), self.c0);
        for (l, a) in self.witnesses.iter().zip(&self.generators) {
            acc = acc.add(&l.mul(a)?)?;
        }
        if &acc != f {
            return Ok(Verdict::Invalid("ideal membership witness mismatch".into()));
        }
        let count = zero_count(&self.generators, spec, f.nvars(), budget)?;
        if count != self.zero_count {
            return Ok(Verdict::Invalid(format!(
                "zero count {count} differs from recorded {}",
                self.zero_count
            )));
        }
        let n = f.nvars();
        // |Z| * p^m >= p^n
        let lhs =
            (count as u128).saturating_mul((spec.p() as u128).saturating_pow(self.m() as u32));
        let rhs = (spec.p() as u128).saturating_pow(n as u32);
        if lhs < rhs {
            return Ok(Verdict::Invalid("zero set is smaller than p^(n-m)".into()));
        }
        Ok(Verdict::Valid)
    }
}

fn zero_count(gens: &[Polynomial], spec: FieldSpec, n: usize, budget: u64) -> Result<u64> {
    let evs: Vec<_> = gens.iter().map(Polynomial::evaluator).collect();
    sweep_count(spec, n, budget, |x| evs.iter().all(|e| e.eval_raw(x) == 0))
}

/// Builds the generators `A_i = alpha_i - y_i`, `A_{r+i} = beta_i - z_i`
/// from an rk* certificate of a polynomial of degree at least 3, choosing
/// `(y^1, z^1)` as the most popular value of the unconstrained factors on
/// the zero set of the constrained ones.
pub fn perturbation(cert: &RkStarCert, budget: u64) -> Result<PerturbationCert> {
    let f = &cert.target;
    let k = match f.degree() {
        Degree::Finite(k) if k >= 3 => k,
        _ => return Err(Error::precondition("perturbation requires degree >= 3")),
    };
    require_valid(cert, "source certificate")?;
    let spec = f.spec();
    let p = spec.p();
    let n = f.nvars();
    let constrained = cert.constrained_terms();
    let free: Vec<usize> = (0..cert.len())
        .filter(|i| !constrained.contains(i))
        .collect();
    let t = free.len();
    let order: Vec<usize> = free.iter().chain(&constrained).copied().collect();

    let a2: Vec<_> = constrained
        .iter()
        .map(|&i| cert.factors[i].0.evaluator())
        .collect();
    let a1: Vec<_> = free
        .iter()
        .map(|&i| cert.factors[i].0.evaluator())
        .collect();
    let b1: Vec<_> = free
        .iter()
        .map(|&i| cert.factors[i].1.evaluator())
        .collect();
    // Joint value counts of (A^1, B^1) on {A^2 = 0}.
    let counts: BTreeMap<Vec<u64>, u64> = sweep_fold(
        spec,
        n,
        budget,
        BTreeMap::new,
        |map: &mut BTreeMap<Vec<u64>, u64>, x| {
            if a2.iter().all(|e| e.eval_raw(x) == 0) {
                let key: Vec<u64> = a1.iter().chain(&b1).map(|e| e.eval_raw(x)).collect();
                *map.entry(key).or_insert(0) += 1;
            }
        },
        |mut m1, m2| {
            for (key, c) in m2 {
                *m1.entry(key).or_insert(0) += c;
            }
            m1
        },
    )?;
    let conditioned: u64 = counts.values().sum();
    assert!(
        conditioned > 0,
        "affinely independent linear forms have a common zero"
    );
    // Lexicographically first among the most popular values.
    let (key, best) = counts
        .iter()
        .fold(None::<(&Vec<u64>, u64)>, |acc, (key, &c)| match acc {
            Some((_, bc)) if bc >= c => acc,
            _ => Some((key, c)),
        })
        .expect("nonempty");
    // best / conditioned >= p^{-2t}
    let popular = (best as u128).saturating_mul((p as u128).saturating_pow(2 * t as u32));
    if popular < conditioned as u128 {
        return Err(Error::Internal(
            "pigeonhole bound on the popular value failed".into(),
        ));
    }
    let y: Vec<FieldElement> = key[..t].iter().map(|&v| FieldElement(v)).collect();
    let z: Vec<FieldElement> = key[t..].iter().map(|&v| FieldElement(v)).collect();

    let mut generators = Vec::new();
    let mut witnesses = Vec::new();
    let mut push = |gen: Polynomial, wit: Polynomial| {
        if !gen.is_zero() {
            generators.push(gen);
            witnesses.push(wit);
        }
    };
    for (j, &i) in free.iter().enumerate() {
        let (a, b) = &cert.factors[i];
        push(a.sub(&Polynomial::constant(spec, n, y[j]))?, b.clone());
    }
    for &i in &constrained {
        let (a, b) = &cert.factors[i];
        push(a.clone(), b.clone());
    }
    for (j, &i) in free.iter().enumerate() {
        let b = &cert.factors[i].1;
        push(
            b.sub(&Polynomial::constant(spec, n, z[j]))?,
            Polynomial::constant(spec, n, y[j]),
        );
    }
    let c0 = y.iter().zip(&z).fold(FieldElement::ZERO, |s, (&a, &b)| {
        spec.add(s, spec.mul(a, b))
    });
    for (i, g) in generators.iter().enumerate() {
        let d = deg(g).expect("nonzero");
        if d == 0 || d + 2 > k {
            return Err(Error::Internal(format!(
                "generator {} has degree {d} outside [1, {}]",
                i + 1,
                k - 2
            )));
        }
    }
    let zero_count = zero_count(&generators, spec, n, budget)?;
    let out = PerturbationCert {
        source: cert.clone(),
        order,
        t,
        y,
        z,
        generators,
        witnesses,
        c0,
        zero_count,
    };
    match out.verify(budget)? {
        Verdict::Valid => Ok(out),
        Verdict::Invalid(why) => Err(Error::Internal(format!("perturbation certificate: {why}"))),
    }
}

/// Sweeps `c` over `F_p^m` for the `P = sum c_i A_i` of degree at most
/// `deg f - 2` maximizing `bias(f - P)`; the floor is `p^{-m}`.
pub fn lower_degree_correlation(pcert: &PerturbationCert, budget: u64) -> Result<CorrelationCert> {
    let f = &pcert.source.target;
    let spec = f.spec();
    let k = deg(f).ok_or_else(|| Error::precondition("zero target"))?;
    let best = best_combination(
        f,
        &pcert.generators,
        budget,
        "p^(m+n) evaluations exceed the budget",
    )?;
    let m = pcert.m();
    let floor = (spec.p() as f64).powi(-(m as i32));
    if best.report.magnitude + crate::bias::TOLERANCE < floor {
        return Err(Error::Internal(format!(
            "bias {:.12} fell below the floor p^-{m}",
            best.report.magnitude
        )));
    }
    if let Some(d) = deg(&best.combination) {
        debug_assert!(d + 2 <= k);
    }
    Ok(CorrelationCert {
        f: f.clone(),
        correlator: best.combination,
        degree_bound: k - 2,
        exact: best.report,
        claimed_floor: floor,
        provenance: vec![
            "lower-degree-correlation".into(),
            format!(
                "rk* length r={}, t={}, m={m}, c0={}",
                pcert.source.len(),
                pcert.t,
                pcert.c0
            ),
        ],
    })
}

/// Wraps a homogeneous form's decomposition as an rk* certificate after
/// compression, so the affine condition holds.
pub fn rkstar_from_homogeneous(cert: &DecompositionCert) -> Result<RkStarCert> {
    let compressed = crate::rank::compress_decomposition(cert)?;
    let out = RkStarCert::from_decomposition(&compressed);
    require_valid(&out, "compressed decomposition").map_err(|e| Error::Internal(e.to_string()))?;
    Ok(out)
}

/// Decomposition certificate for a single product form `alpha * beta`.
pub fn single_product(alpha: HomogeneousForm, beta: HomogeneousForm) -> Result<DecompositionCert> {
    let target = HomogeneousForm::new(
        alpha.poly().mul(beta.poly())?,
        alpha.degree() + beta.degree(),
    )?;
    Ok(DecompositionCert {
        target,
        factors: vec![(alpha, beta)],
    })
}
