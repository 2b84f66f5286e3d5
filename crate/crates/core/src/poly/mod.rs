//! Sparse multivariate polynomials over `F_p`.
//!
//! Polynomials are formal objects: they are never reduced modulo
//! `x^p - x`. Exponent vectors are stored densely and ordered graded
//! lexicographically.

mod derivative;
mod eval;
pub(crate) mod text;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

pub use derivative::{iterated_derivative_recursive, iterated_derivative_semisurjection};
pub use eval::Evaluator;
pub use text::{format_body, parse_polynomial, parse_polynomial_body, VarNaming};

/// Total degree of a polynomial. The zero polynomial has degree
/// `NegInfinity`, which compares below every finite degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Degree {
    NegInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(self) -> Option<u32> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(d),
        }
    }

    pub fn is_below(self, d: u32) -> bool {
        self < Degree::Finite(d)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => write!(f, "-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Exponent vector of a monomial, ordered graded lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Box<[u32]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars].into_boxed_slice())
    }

    pub fn new(exps: Vec<u32>) -> Self {
        Monomial(exps.into_boxed_slice())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial::new(e)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(other.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Variables with multiplicity, in increasing index order.
    pub fn variable_tuple(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, &e)| std::iter::repeat(i).take(e as usize))
            .collect()
    }

    pub fn from_variable_tuple(nvars: usize, vars: &[usize]) -> Monomial {
        let mut e = vec![0u32; nvars];
        for &v in vars {
            e[v] += 1;
        }
        Monomial::new(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials of total degree exactly `k` in `nvars` variables, in
/// increasing graded-lex order.
pub fn monomials_of_degree(nvars: usize, k: u32) -> Vec<Monomial> {
    fn rec(nvars: usize, pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if pos + 1 == nvars {
            cur.push(left);
            out.push(Monomial::new(cur.clone()));
            cur.pop();
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(nvars, pos + 1, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if k == 0 {
            out.push(Monomial::one(0));
        }
        return out;
    }
    rec(nvars, 0, k, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All monomials of total degree at most `k`, increasing graded-lex order.
pub fn monomials_up_to_degree(nvars: usize, k: u32) -> Vec<Monomial> {
    (0..=k)
        .flat_map(|d| monomials_of_degree(nvars, d))
        .collect()
}

/// A sparse polynomial over `F_p` in `nvars` variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    spec: FieldSpec,
    nvars: usize,
    terms: BTreeMap<Monomial, FieldElement>,
}

impl Polynomial {
    pub fn zero(spec: FieldSpec, nvars: usize) -> Self {
        Polynomial {
            spec,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(spec: FieldSpec, nvars: usize, c: FieldElement) -> Self {
        let mut p = Polynomial::zero(spec, nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    /// The variable `x_{i+1}` (indices are zero-based internally).
    pub fn var(spec: FieldSpec, nvars: usize, i: usize) -> Self {
        assert!(
            i < nvars,
            "variable index {i} out of range for {nvars} variables"
        );
        let mut p = Polynomial::zero(spec, nvars);
        p.add_term(Monomial::var(nvars, i), FieldElement::ONE);
        p
    }

    pub fn monomial(spec: FieldSpec, m: Monomial, c: FieldElement) -> Self {
        let mut p = Polynomial::zero(spec, m.exps().len());
        p.add_term(m, c);
        p
    }

    /// Linear form `sum_i coeffs[i] * x_{offset+i}`.
    pub fn linear(spec: FieldSpec, nvars: usize, offset: usize, coeffs: &[FieldElement]) -> Self {
        let mut p = Polynomial::zero(spec, nvars);
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::var(nvars, offset + i), c);
        }
        p
    }

    pub fn from_terms(
        spec: FieldSpec,
        nvars: usize,
        terms: impl IntoIterator<Item = (Monomial, FieldElement)>,
    ) -> Self {
        let mut p = Polynomial::zero(spec, nvars);
        for (m, c) in terms {
            assert_eq!(m.exps().len(), nvars, "monomial arity");
            p.add_term(m, c);
        }
        p
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in increasing graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, FieldElement)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coefficient(&self, m: &Monomial) -> FieldElement {
        self.terms.get(m).copied().unwrap_or(FieldElement::ZERO)
    }

    pub fn constant_term(&self) -> FieldElement {
        self.coefficient(&Monomial::one(self.nvars))
    }

    /// Adds `c * m` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: FieldElement) {
        if c.is_zero() {
            return;
        }
        let k = self.spec;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = k.add(*e.get(), c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn degree(&self) -> Degree {
        self.terms
            .keys()
            .next_back()
            .map_or(Degree::NegInfinity, |m| Degree::Finite(m.degree()))
    }

    /// Highest exponent of any single variable.
    pub fn max_exponent(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|m| m.exps().iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// Indices of variables that occur in some term.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&i| self.terms.keys().any(|m| m.exps()[i] > 0))
            .collect()
    }

    fn check_compatible(&self, other: &Polynomial) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::FieldMismatch {
                left: self.spec.p(),
                right: other.spec.p(),
            });
        }
        if self.nvars != other.nvars {
            return Err(Error::ArityMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), self.spec.neg(c));
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_compatible(other)?;
        let k = self.spec;
        let mut out = Polynomial::zero(k, self.nvars);
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                out.add_term(ma.mul(mb), k.mul(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(self.spec.neg(FieldElement::ONE))
    }

    pub fn scale(&self, c: FieldElement) -> Polynomial {
        let k = self.spec;
        if c.is_zero() {
            return Polynomial::zero(k, self.nvars);
        }
        Polynomial {
            spec: k,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, &v)| (m.clone(), k.mul(v, c)))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.spec, self.nvars, FieldElement::ONE);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn evaluate(&self, x: &[FieldElement]) -> Result<FieldElement> {
        if x.len() != self.nvars {
            return Err(Error::ArityMismatch {
                left: self.nvars,
                right: x.len(),
            });
        }
        let k = self.spec;
        Ok(self.terms().fold(FieldElement::ZERO, |acc, (m, c)| {
            let v = m.exps().iter().zip(x).fold(c, |t, (&e, &xi)| {
                if e == 0 {
                    t
                } else {
                    k.mul(t, k.pow(xi, e as u64))
                }
            });
            k.add(acc, v)
        }))
    }

    /// The degree-`i` part `f_i`.
    pub fn homogeneous_component(&self, i: u32) -> HomogeneousForm {
        let poly = Polynomial {
            spec: self.spec,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == i)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        };
        HomogeneousForm { poly, degree: i }
    }

    /// `f_{<d} = sum_{i<d} f_i`.
    pub fn below_degree(&self, d: u32) -> Polynomial {
        Polynomial {
            spec: self.spec,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() < d)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    /// Substitutes `images[i]` for `x_i`. All images must share a field and
    /// variable count, which becomes the variable count of the result.
    pub fn compose(&self, images: &[Polynomial]) -> Result<Polynomial> {
        if images.len() != self.nvars {
            return Err(Error::ArityMismatch {
                left: self.nvars,
                right: images.len(),
            });
        }
        let k = self.spec;
        let out_vars = images.first().map_or(0, Polynomial::nvars);
        for im in images {
            if im.spec != k {
                return Err(Error::FieldMismatch {
                    left: k.p(),
                    right: im.spec.p(),
                });
            }
            if im.nvars != out_vars {
                return Err(Error::ArityMismatch {
                    left: out_vars,
                    right: im.nvars,
                });
            }
        }
        let mut powers: Vec<Vec<Polynomial>> = images
            .iter()
            .map(|im| {
                vec![
                    Polynomial::constant(k, out_vars, FieldElement::ONE),
                    im.clone(),
                ]
            })
            .collect();
        let mut out = Polynomial::zero(k, out_vars);
        for (m, c) in self.terms() {
            let mut t = Polynomial::constant(k, out_vars, c);
            for (i, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = &powers[i][powers[i].len() - 1] * &images[i];
                    powers[i].push(next);
                }
                t = &t * &powers[i][e as usize];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Re-indexes variables: `x_i` becomes `x_{map[i]}` in a ring with
    /// `new_nvars` variables.
    pub fn embed(&self, new_nvars: usize, map: &[usize]) -> Polynomial {
        assert_eq!(map.len(), self.nvars, "embedding map arity");
        let mut out = Polynomial::zero(self.spec, new_nvars);
        for (m, c) in self.terms() {
            let mut e = vec![0u32; new_nvars];
            for (i, &ei) in m.exps().iter().enumerate() {
                e[map[i]] += ei;
            }
            out.add_term(Monomial::new(e), c);
        }
        out
    }

    /// Substitutes field values for the listed variables, keeping the
    /// variable count.
    pub fn substitute_values(&self, assignments: &[(usize, FieldElement)]) -> Polynomial {
        let k = self.spec;
        let mut out = Polynomial::zero(k, self.nvars);
        for (m, c) in self.terms() {
            let mut e = m.exps().to_vec();
            let mut coef = c;
            for &(v, val) in assignments {
                if e[v] > 0 {
                    coef = k.mul(coef, k.pow(val, e[v] as u64));
                    e[v] = 0;
                }
            }
            out.add_term(Monomial::new(e), coef);
        }
        out
    }

    /// Keeps only the listed variables (in the given order). Fails if a
    /// dropped variable occurs in some term.
    pub fn restrict_vars(&self, keep: &[usize]) -> Result<Polynomial> {
        let mut out = Polynomial::zero(self.spec, keep.len());
        for (m, c) in self.terms() {
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 && !keep.contains(&i) {
                    return Err(Error::precondition(format!(
                        "variable x{} still occurs after restriction",
                        i + 1
                    )));
                }
            }
            let e: Vec<u32> = keep.iter().map(|&i| m.exps()[i]).collect();
            out.add_term(Monomial::new(e), c);
        }
        Ok(out)
    }

    /// Coordinates with respect to a list of monomials. Fails if `self`
    /// has a term outside the list.
    pub fn coefficient_vector(&self, basis: &[Monomial]) -> Option<Vec<FieldElement>> {
        let v: Vec<FieldElement> = basis.iter().map(|m| self.coefficient(m)).collect();
        let covered = v.iter().filter(|c| !c.is_zero()).count();
        (covered == self.terms.len()).then_some(v)
    }

    pub fn from_coefficient_vector(
        spec: FieldSpec,
        nvars: usize,
        basis: &[Monomial],
        coeffs: &[FieldElement],
    ) -> Polynomial {
        Polynomial::from_terms(
            spec,
            nvars,
            basis.iter().cloned().zip(coeffs.iter().copied()),
        )
    }

    pub fn evaluator(&self) -> Evaluator {
        Evaluator::new(self)
    }
}

impl std::ops::Add for &Polynomial {
    type Output = Polynomial;
    /// Panics on mismatched rings; use [`Polynomial::add`] for a checked sum.
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::add(self, rhs).expect("polynomial ring mismatch")
    }
}

impl std::ops::Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::sub(self, rhs).expect("polynomial ring mismatch")
    }
}

impl std::ops::Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::mul(self, rhs).expect("polynomial ring mismatch")
    }
}

impl std::ops::Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::neg(self)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={}; n={}; ", self.spec.p(), self.nvars)?;
        f.write_str(&text::format_body(self, &VarNaming::Flat))
    }
}

/// A polynomial all of whose monomials have the same total degree. The
/// degree is stored explicitly so that the zero form still has one.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HomogeneousForm {
    poly: Polynomial,
    degree: u32,
}

impl HomogeneousForm {
    pub fn new(poly: Polynomial, degree: u32) -> Result<Self> {
        if let Some((m, _)) = poly.terms().find(|(m, _)| m.degree() != degree) {
            return Err(Error::precondition(format!(
                "not homogeneous of degree {degree}: monomial of degree {}",
                m.degree()
            )));
        }
        Ok(HomogeneousForm { poly, degree })
    }

    /// Infers the degree; the zero polynomial is rejected because its
    /// degree is ambiguous.
    pub fn from_polynomial(poly: Polynomial) -> Result<Self> {
        let d = poly
            .degree()
            .finite()
            .ok_or_else(|| Error::precondition("zero polynomial has no form degree"))?;
        HomogeneousForm::new(poly, d)
    }

    pub fn zero(spec: FieldSpec, nvars: usize, degree: u32) -> Self {
        HomogeneousForm {
            poly: Polynomial::zero(spec, nvars),
            degree,
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn into_poly(self) -> Polynomial {
        self.poly
    }

    pub fn spec(&self) -> FieldSpec {
        self.poly.spec()
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }
}

impl fmt::Display for HomogeneousForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    fn x(spec: FieldSpec, n: usize, i: usize) -> Polynomial {
        Polynomial::var(spec, n, i)
    }

    #[test]
    fn difference_of_squares() {
        let f = k(5);
        let a = &x(f, 2, 0) + &x(f, 2, 1);
        let b = &x(f, 2, 0) - &x(f, 2, 1);
        let prod = &a * &b;
        let expected = parse_polynomial("p=5; n=2; x1^2 + 4*x2^2").unwrap();
        assert_eq!(prod, expected);
    }

    #[test]
    fn ring_identities() {
        let f = parse_polynomial("p=7; n=3; 3*x1*x2^2 + 4*x3 + 1").unwrap();
        let zero = Polynomial::zero(k(7), 3);
        assert!((&f * &zero).is_zero());
        assert!((&f + &f.neg()).is_zero());
        assert_eq!(f.scale(FieldElement::ZERO), zero);
    }

    #[test]
    fn mismatched_rings_are_errors() {
        let a = Polynomial::var(k(5), 2, 0);
        let b = Polynomial::var(k(7), 2, 0);
        let c = Polynomial::var(k(5), 3, 0);
        assert!(matches!(a.add(&b), Err(Error::FieldMismatch { .. })));
        assert!(matches!(a.mul(&c), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn evaluation_examples() {
        let f = k(5);
        let xy = &x(f, 2, 0) * &x(f, 2, 1);
        assert_eq!(
            xy.evaluate(&[f.elem(2), f.elem(3)]).unwrap(),
            FieldElement(1)
        );
        let g = parse_polynomial("p=5; n=1; x1^2 + x1").unwrap();
        assert_eq!(g.evaluate(&[f.elem(2)]).unwrap(), FieldElement(1));
        let h = parse_polynomial("p=5; n=3; 3*x1*x2^2 + 4*x3 + 2").unwrap();
        assert_eq!(
            h.evaluate(&[FieldElement::ZERO; 3]).unwrap(),
            FieldElement(2)
        );
        assert!(h.evaluate(&[FieldElement::ZERO; 2]).is_err());
    }

    #[test]
    fn degree_sentinel() {
        let z = Polynomial::zero(k(3), 2);
        assert_eq!(z.degree(), Degree::NegInfinity);
        assert!(Degree::NegInfinity < Degree::Finite(0));
        assert_eq!(
            Polynomial::constant(k(3), 2, FieldElement(1)).degree(),
            Degree::Finite(0)
        );
    }

    #[test]
    fn homogeneous_components() {
        let f = parse_polynomial("p=11; n=3; x1*x2*x3 + x1*x2 + 7").unwrap();
        assert_eq!(
            f.homogeneous_component(3).poly(),
            &parse_polynomial("p=11; n=3; x1*x2*x3").unwrap()
        );
        assert!(f.homogeneous_component(1).is_zero());
        let top = f.homogeneous_component(3).into_poly();
        assert_eq!(&top + &f.below_degree(3), f);
        let sum = (0..=3).fold(Polynomial::zero(k(11), 3), |acc, i| {
            &acc + f.homogeneous_component(i).poly()
        });
        assert_eq!(sum, f);
    }

    #[test]
    fn homogeneous_form_rejects_mixed_degrees() {
        let f = parse_polynomial("p=5; n=2; x1*x2 + x1").unwrap();
        assert!(HomogeneousForm::from_polynomial(f).is_err());
        assert!(HomogeneousForm::from_polynomial(Polynomial::zero(k(5), 2)).is_err());
        assert_eq!(HomogeneousForm::zero(k(5), 2, 3).degree(), 3);
    }

    #[test]
    fn grlex_enumeration() {
        let ms = monomials_of_degree(3, 2);
        assert_eq!(ms.len(), 6);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(monomials_up_to_degree(2, 1).len(), 3);
        assert_eq!(monomials_of_degree(0, 0).len(), 1);
    }

    #[test]
    fn composition_shifts_variables() {
        let f = k(7);
        let g = parse_polynomial("p=7; n=1; x1^2").unwrap();
        // x -> x + y in two variables
        let img = &x(f, 2, 0) + &x(f, 2, 1);
        let shifted = g.compose(&[img]).unwrap();
        assert_eq!(
            shifted,
            parse_polynomial("p=7; n=2; x1^2 + 2*x1*x2 + x2^2").unwrap()
        );
    }
}
