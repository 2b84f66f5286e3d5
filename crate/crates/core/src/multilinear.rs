//! Multilinear forms over blocks of variables, polarization and the
//! polarization identities.
//!
//! A form over `d` blocks of `n` variables is stored as a flat polynomial
//! in `n*d` variables (block `b`, index `i` is variable `b*n + i`) together
//! with its support: the set of blocks it actually depends on.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};
use crate::poly::text::{field_and_arity, format_body, split_document};
use crate::poly::{
    iterated_derivative_semisurjection, parse_polynomial_body, Evaluator, HomogeneousForm,
    Monomial, Polynomial, VarNaming,
};

/// Degree at or below which polarization uses the explicit permutation sum.
pub const PERMUTATION_SUM_MAX_DEGREE: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultilinearForm {
    n: usize,
    blocks: usize,
    support: BTreeSet<usize>,
    poly: Polynomial,
}

/// Checks that every monomial takes exactly one variable, with exponent 1,
/// from each block of `support` and nothing else.
fn check_multilinear(
    poly: &Polynomial,
    n: usize,
    blocks: usize,
    support: &BTreeSet<usize>,
) -> Result<()> {
    if poly.nvars() != n * blocks {
        return Err(Error::ArityMismatch {
            left: n * blocks,
            right: poly.nvars(),
        });
    }
    for (m, _) in poly.terms() {
        for b in 0..blocks {
            let slice = &m.exps()[b * n..(b + 1) * n];
            let deg: u32 = slice.iter().sum();
            let want = u32::from(support.contains(&b));
            if deg != want || slice.iter().any(|&e| e > 1) {
                return Err(Error::precondition(format!(
                    "not multilinear on blocks {:?}: block {} has degree {deg}",
                    support.iter().map(|b| b + 1).collect::<Vec<_>>(),
                    b + 1
                )));
            }
        }
    }
    Ok(())
}

impl MultilinearForm {
    /// Builds a form with an explicit support (zero-based block indices).
    pub fn with_support(
        poly: Polynomial,
        n: usize,
        blocks: usize,
        support: BTreeSet<usize>,
    ) -> Result<Self> {
        if let Some(&b) = support.iter().find(|&&b| b >= blocks) {
            return Err(Error::precondition(format!(
                "support block {} out of range",
                b + 1
            )));
        }
        check_multilinear(&poly, n, blocks, &support)?;
        Ok(MultilinearForm {
            n,
            blocks,
            support,
            poly,
        })
    }

    /// Infers the support from the terms; the zero polynomial gets the
    /// full support.
    pub fn new(poly: Polynomial, n: usize, blocks: usize) -> Result<Self> {
        let support: BTreeSet<usize> = match poly.terms().next() {
            None => (0..blocks).collect(),
            Some((m, _)) => (0..blocks)
                .filter(|&b| m.exps()[b * n..(b + 1) * n].iter().any(|&e| e > 0))
                .collect(),
        };
        MultilinearForm::with_support(poly, n, blocks, support)
    }

    pub fn zero(spec: FieldSpec, n: usize, blocks: usize, support: BTreeSet<usize>) -> Self {
        MultilinearForm {
            n,
            blocks,
            support,
            poly: Polynomial::zero(spec, n * blocks),
        }
    }

    /// The linear form `sum_i coeffs[i] * x^(block)_i`.
    pub fn linear(
        spec: FieldSpec,
        n: usize,
        blocks: usize,
        block: usize,
        coeffs: &[FieldElement],
    ) -> Self {
        MultilinearForm {
            n,
            blocks,
            support: [block].into_iter().collect(),
            poly: Polynomial::linear(spec, n * blocks, block * n, coeffs),
        }
    }

    pub fn spec(&self) -> FieldSpec {
        self.poly.spec()
    }

    /// Variables per block.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn support(&self) -> &BTreeSet<usize> {
        &self.support
    }

    pub fn degree(&self) -> usize {
        self.support.len()
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn var_index(&self, block: usize, i: usize) -> usize {
        block * self.n + i
    }

    fn same_shape(&self, other: &MultilinearForm) -> Result<()> {
        if self.n != other.n || self.blocks != other.blocks {
            return Err(Error::precondition(format!(
                "block shapes differ: {}x{} vs {}x{}",
                self.blocks, self.n, other.blocks, other.n
            )));
        }
        Ok(())
    }

    /// Sum of two forms on the same support. A zero summand adopts the
    /// other's support.
    pub fn add(&self, other: &MultilinearForm) -> Result<MultilinearForm> {
        self.same_shape(other)?;
        let support = if self.is_zero() {
            other.support.clone()
        } else if other.is_zero() || self.support == other.support {
            self.support.clone()
        } else {
            return Err(Error::precondition(
                "adding multilinear forms with different supports",
            ));
        };
        MultilinearForm::with_support(self.poly.add(&other.poly)?, self.n, self.blocks, support)
    }

    pub fn sub(&self, other: &MultilinearForm) -> Result<MultilinearForm> {
        self.add(&other.scale(self.spec().neg(FieldElement::ONE)))
    }

    pub fn scale(&self, c: FieldElement) -> MultilinearForm {
        MultilinearForm {
            poly: self.poly.scale(c),
            ..self.clone()
        }
    }

    /// Product of forms on disjoint supports.
    pub fn mul(&self, other: &MultilinearForm) -> Result<MultilinearForm> {
        self.same_shape(other)?;
        if !self.support.is_disjoint(&other.support) {
            return Err(Error::precondition(
                "product of multilinear forms with overlapping supports",
            ));
        }
        let support = self.support.union(&other.support).copied().collect();
        MultilinearForm::with_support(self.poly.mul(&other.poly)?, self.n, self.blocks, support)
    }

    /// Evaluates at one point per block.
    pub fn evaluate(&self, points: &[Vec<FieldElement>]) -> Result<FieldElement> {
        if points.len() != self.blocks || points.iter().any(|x| x.len() != self.n) {
            return Err(Error::precondition(format!(
                "expected {} block points of length {}",
                self.blocks, self.n
            )));
        }
        let flat: Vec<FieldElement> = points.iter().flatten().copied().collect();
        self.poly.evaluate(&flat)
    }

    /// The polynomial in `n` variables obtained by identifying all blocks.
    pub fn diagonal(&self) -> Polynomial {
        let map: Vec<usize> = (0..self.n * self.blocks).map(|v| v % self.n).collect();
        self.poly.embed(self.n, &map)
    }

    /// `T(., c)`: substitutes `c` into the last block and drops it.
    pub fn block_derivative(&self, c: &[FieldElement]) -> Result<MultilinearForm> {
        if self.blocks == 0 {
            return Err(Error::precondition("form has no blocks"));
        }
        if c.len() != self.n {
            return Err(Error::ArityMismatch {
                left: self.n,
                right: c.len(),
            });
        }
        let last = self.blocks - 1;
        if !self.support.contains(&last) {
            return Err(Error::precondition("last block is not in the support"));
        }
        let assignments: Vec<(usize, FieldElement)> = c
            .iter()
            .enumerate()
            .map(|(i, &ci)| (last * self.n + i, ci))
            .collect();
        let keep: Vec<usize> = (0..last * self.n).collect();
        let poly = self
            .poly
            .substitute_values(&assignments)
            .restrict_vars(&keep)?;
        let mut support = self.support.clone();
        support.remove(&last);
        MultilinearForm::with_support(poly, self.n, last, support)
    }

    /// `(T(., e_i))_i`, the gradient with respect to the last block.
    pub fn gradient(&self) -> Result<Vec<MultilinearForm>> {
        let spec = self.spec();
        (0..self.n)
            .map(|i| {
                let mut e = vec![FieldElement::ZERO; self.n];
                e[i] = FieldElement::ONE;
                let _ = spec;
                self.block_derivative(&e)
            })
            .collect()
    }

    /// Reorders blocks: block `b` of `self` becomes block `perm[b]`.
    pub fn permute_blocks(&self, perm: &[usize]) -> Result<MultilinearForm> {
        let mut sorted = perm.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.blocks).collect::<Vec<_>>() {
            return Err(Error::precondition("not a permutation of the blocks"));
        }
        let map: Vec<usize> = (0..self.n * self.blocks)
            .map(|v| perm[v / self.n] * self.n + v % self.n)
            .collect();
        let support = self.support.iter().map(|&b| perm[b]).collect();
        MultilinearForm::with_support(
            self.poly.embed(self.n * self.blocks, &map),
            self.n,
            self.blocks,
            support,
        )
    }

    /// Re-embeds the form into a larger block layout: block `b` moves to
    /// `map[b]` among `new_blocks` blocks.
    pub fn embed_blocks(&self, new_blocks: usize, map: &[usize]) -> Result<MultilinearForm> {
        assert_eq!(map.len(), self.blocks, "block map arity");
        let vmap: Vec<usize> = (0..self.n * self.blocks)
            .map(|v| map[v / self.n] * self.n + v % self.n)
            .collect();
        let support = self.support.iter().map(|&b| map[b]).collect();
        MultilinearForm::with_support(
            self.poly.embed(self.n * new_blocks, &vmap),
            self.n,
            new_blocks,
            support,
        )
    }

    pub fn evaluator(&self) -> Evaluator {
        self.poly.evaluator()
    }

    /// Serialized form: `blocks=`, `support=` and `p=`/`n=` headers, then
    /// the body with `x<block>_<index>` names.
    pub fn to_text(&self) -> String {
        let support: Vec<String> = self.support.iter().map(|b| (b + 1).to_string()).collect();
        format!(
            "blocks={}; support={}; p={}; n={}; {}",
            self.blocks,
            support.join(","),
            self.spec().p(),
            self.n,
            format_body(&self.poly, &VarNaming::Blocks { per_block: self.n })
        )
    }

    pub fn parse(text: &str) -> Result<MultilinearForm> {
        let doc = split_document(text)?;
        let (spec, n) = field_and_arity(&doc)?;
        let blocks = doc
            .header_usize("blocks")?
            .ok_or_else(|| Error::parse(1, 1, "missing `blocks=<d>` header"))?;
        let (body, pos) = doc
            .body
            .as_ref()
            .ok_or_else(|| Error::parse(1, 1, "missing form body"))?;
        let poly = parse_polynomial_body(
            spec,
            n * blocks,
            VarNaming::Blocks { per_block: n },
            body,
            pos.line,
            pos.column,
        )?;
        match doc.header("support") {
            None => MultilinearForm::new(poly, n, blocks),
            Some((s, spos)) => {
                let support = parse_block_set(s, blocks, spos.line, spos.column)?;
                MultilinearForm::with_support(poly, n, blocks, support)
            }
        }
    }
}

/// Parses a comma-separated list of one-based block indices.
pub(crate) fn parse_block_set(
    s: &str,
    blocks: usize,
    line: usize,
    column: usize,
) -> Result<BTreeSet<usize>> {
    let s = s.trim().trim_start_matches('{').trim_end_matches('}');
    if s.trim().is_empty() {
        return Ok(BTreeSet::new());
    }
    s.split(',')
        .map(|t| {
            let b: usize = t.trim().parse().map_err(|_| {
                Error::parse(line, column, format!("bad block index `{}`", t.trim()))
            })?;
            if b == 0 || b > blocks {
                return Err(Error::parse(
                    line,
                    column,
                    format!("block {b} outside 1..{blocks}"),
                ));
            }
            Ok(b - 1)
        })
        .collect()
}

impl fmt::Display for MultilinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Polarization by the permutation sum
/// `sum_{pi in S_k} prod_j x^{(pi(j))}_{i_j}` for each monomial.
pub fn polarize_by_permutations(g: &HomogeneousForm) -> MultilinearForm {
    let k = g.degree() as usize;
    let n = g.nvars();
    let spec = g.spec();
    let perms = permutations(k);
    let mut poly = Polynomial::zero(spec, n * k);
    for (m, c) in g.poly().terms() {
        let vars = m.variable_tuple();
        for pi in &perms {
            let mut exps = vec![0u32; n * k];
            for (j, &v) in vars.iter().enumerate() {
                exps[pi[j] * n + v] += 1;
            }
            poly.add_term(Monomial::new(exps), c);
        }
    }
    MultilinearForm::with_support(poly, n, k, (0..k).collect())
        .expect("permutation sum is multilinear")
}

/// Polarization as the order-k discrete derivative `Delta^k g`, which does
/// not depend on the base point.
pub fn polarize_by_derivative(g: &HomogeneousForm) -> MultilinearForm {
    let k = g.degree() as usize;
    let n = g.nvars();
    let dd = iterated_derivative_semisurjection(g.poly(), k);
    let keep: Vec<usize> = (0..n * k).collect();
    let poly = dd
        .restrict_vars(&keep)
        .expect("top-degree derivative is independent of the base point");
    MultilinearForm::with_support(poly, n, k, (0..k).collect())
        .expect("Delta^k of a form is multilinear")
}

/// The symmetric multilinear form `g~` with `g~(x, .., x) = k! g(x)`.
pub fn polarize(g: &HomogeneousForm) -> MultilinearForm {
    if g.degree() <= PERMUTATION_SUM_MAX_DEGREE {
        polarize_by_permutations(g)
    } else {
        polarize_by_derivative(g)
    }
}

/// Inverts polarization on the diagonal: `diagonal(T) / k!`.
pub fn depolarize(t: &MultilinearForm, k: u32) -> Result<HomogeneousForm> {
    let spec = t.spec();
    if spec.p() <= k as u64 {
        return Err(Error::precondition(format!(
            "characteristic too small for degree: p={} <= k={k}",
            spec.p()
        )));
    }
    if !t.is_zero() && t.degree() != k as usize {
        return Err(Error::precondition(format!(
            "form has degree {} but depolarization degree is {k}",
            t.degree()
        )));
    }
    let inv = spec
        .inv(spec.factorial(k as u64))
        .expect("k! invertible for p > k");
    HomogeneousForm::new(t.diagonal().scale(inv), k)
}

/// Checks `d_c g~ = (d_c g)~` as an exact polynomial identity.
pub fn check_delta_nabla(g: &HomogeneousForm, c: &[FieldElement]) -> Result<bool> {
    if g.degree() == 0 {
        return Err(Error::precondition("form must have degree at least 1"));
    }
    let lhs = polarize(g).block_derivative(c)?;
    let dg = HomogeneousForm::new(g.poly().formal_derivative(c)?, g.degree() - 1)?;
    let rhs = polarize(&dg);
    Ok(lhs.poly() == rhs.poly())
}

/// Evaluates `Delta^d_v g(x)` through the polarization of `g`:
/// `g~(v, x + (1/2) sum_t v^(t))`, for `g` of degree `d + 1`.
#[derive(Debug, Clone)]
pub struct DdViaPolarization {
    spec: FieldSpec,
    n: usize,
    d: usize,
    half: FieldElement,
    polar: Evaluator,
}

impl DdViaPolarization {
    pub fn new(g: &HomogeneousForm) -> Result<Self> {
        let spec = g.spec();
        if spec.p() == 2 {
            return Err(Error::precondition(
                "characteristic 2 has no 1/2 for the shifted point",
            ));
        }
        if g.degree() == 0 {
            return Err(Error::precondition("form must have degree d+1 >= 1"));
        }
        Ok(DdViaPolarization {
            spec,
            n: g.nvars(),
            d: g.degree() as usize - 1,
            half: spec.half().expect("odd characteristic"),
            polar: polarize(g).evaluator(),
        })
    }

    /// Number of directions `d`.
    pub fn order(&self) -> usize {
        self.d
    }

    pub fn eval(
        &self,
        directions: &[Vec<FieldElement>],
        x: &[FieldElement],
    ) -> Result<FieldElement> {
        if directions.len() != self.d
            || directions.iter().any(|v| v.len() != self.n)
            || x.len() != self.n
        {
            return Err(Error::precondition(format!(
                "expected {} directions and a point, all of length {}",
                self.d, self.n
            )));
        }
        let raw: Vec<Vec<u64>> = directions
            .iter()
            .map(|v| v.iter().map(|e| e.value()).collect())
            .collect();
        let xr: Vec<u64> = x.iter().map(|e| e.value()).collect();
        Ok(FieldElement(self.eval_raw(&raw.concat(), &xr)))
    }

    /// Fast path: `directions` is the concatenation of the `d` direction
    /// vectors as raw residues.
    pub fn eval_raw(&self, directions: &[u64], x: &[u64]) -> u64 {
        let k = self.spec;
        let mut pt = Vec::with_capacity(self.n * (self.d + 1));
        pt.extend_from_slice(directions);
        for i in 0..self.n {
            let s = (0..self.d).fold(0u64, |acc, t| (acc + directions[t * self.n + i]) % k.p());
            let shifted = k.add(FieldElement(x[i]), k.mul(self.half, FieldElement(s)));
            pt.push(shifted.value());
        }
        self.polar.eval_raw(&pt)
    }
}

/// One-shot form of [`DdViaPolarization::eval`].
pub fn dd_via_polarization(
    g: &HomogeneousForm,
    directions: &[Vec<FieldElement>],
    x: &[FieldElement],
) -> Result<FieldElement> {
    let dd = DdViaPolarization::new(g)?;
    if directions.len() != dd.order() {
        return Err(Error::precondition(format!(
            "form of degree {} needs {} directions, got {}",
            g.degree(),
            dd.order(),
            directions.len()
        )));
    }
    dd.eval(directions, x)
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
    fn polarization_examples() {
        let t = polarize(&form("p=5; n=2; x1*x2"));
        assert_eq!(t, ml("blocks=2; p=5; n=2; x1_1*x2_2 + x2_1*x1_2"));
        let t = polarize(&form("p=5; n=2; x1^2"));
        assert_eq!(t, ml("blocks=2; p=5; n=2; 2*x1_1*x2_1"));
    }

    #[test]
    fn cubic_polarization_is_the_full_symmetrization() {
        let t = polarize(&form("p=7; n=3; x1*x2*x3"));
        assert_eq!(t.poly().num_terms(), 6);
        assert_eq!(t, polarize_by_derivative(&form("p=7; n=3; x1*x2*x3")));
    }

    #[test]
    fn diagonal_examples() {
        let g = form("p=7; n=3; x1*x2*x3");
        assert_eq!(
            polarize(&g).diagonal(),
            parse_polynomial("p=7; n=3; 6*x1*x2*x3").unwrap()
        );
        let t = ml("blocks=2; p=5; n=2; x1_1*x2_2 + x2_1*x1_2");
        assert_eq!(t.diagonal(), parse_polynomial("p=5; n=2; 2*x1*x2").unwrap());
        let z = MultilinearForm::zero(
            FieldSpec::new(5).unwrap(),
            2,
            2,
            [0, 1].into_iter().collect(),
        );
        assert!(z.diagonal().is_zero());
    }

    #[test]
    fn depolarization() {
        let g = form("p=5; n=3; x1*x2*x3");
        assert_eq!(depolarize(&polarize(&g), 3).unwrap(), g);
        let t = ml("blocks=2; p=5; n=1; 2*x1_1*x2_1");
        assert_eq!(depolarize(&t, 2).unwrap(), form("p=5; n=1; x1^2"));
        let g3 = form("p=3; n=3; x1*x2*x3");
        assert!(matches!(
            depolarize(&polarize(&g3), 3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn block_derivative_examples() {
        let spec = FieldSpec::new(5).unwrap();
        let t = ml("blocks=2; p=5; n=2; x1_1*x2_2 + x2_1*x1_2");
        let e1 = [FieldElement::ONE, FieldElement::ZERO];
        // T(v, e1) = v2
        assert_eq!(
            t.block_derivative(&e1).unwrap(),
            MultilinearForm::linear(spec, 2, 1, 0, &[FieldElement::ZERO, FieldElement::ONE])
        );
        assert!(t
            .block_derivative(&[FieldElement::ZERO; 2])
            .unwrap()
            .is_zero());
        let c = [spec.elem(3), spec.elem(4)];
        let grad = t.gradient().unwrap();
        let assembled = grad[0].scale(c[0]).add(&grad[1].scale(c[1])).unwrap();
        assert_eq!(t.block_derivative(&c).unwrap(), assembled);
        let first_only = MultilinearForm::linear(spec, 2, 2, 0, &e1);
        assert!(first_only.block_derivative(&e1).is_err());
    }

    #[test]
    fn delta_nabla_on_the_worked_example() {
        let spec = FieldSpec::new(7).unwrap();
        let g = form("p=7; n=2; x1*x2^2");
        for a in 0..7 {
            for b in 0..7 {
                assert!(check_delta_nabla(&g, &[spec.elem(a), spec.elem(b)]).unwrap());
            }
        }
        let c = [spec.elem(2), spec.elem(5)];
        // c . (2 x2 y2, 2 x1 y2 + 2 x2 y1)
        let expected = ml(
            "blocks=2; p=7; n=2; 4*x1_2*x2_2 + 10*x1_1*x2_2 + 10*x1_2*x2_1"
                .replace("10", "3")
                .as_str(),
        );
        assert_eq!(polarize(&g).block_derivative(&c).unwrap(), expected);
        let lin = form("p=7; n=2; 3*x1 + x2");
        assert!(check_delta_nabla(&lin, &c).unwrap());
    }

    #[test]
    fn dd_matches_the_grouped_expression() {
        let g = form("p=5; n=3; x1*x2*x3");
        let spec = g.spec();
        let dd = DdViaPolarization::new(&g).unwrap();
        let sym = g.poly().iterated_discrete_derivative(2);
        let e = |v: &[u64]| v.iter().map(|&a| spec.elem(a)).collect::<Vec<_>>();
        for (u, v, x) in [
            ([1, 2, 3], [4, 0, 1], [2, 2, 2]),
            ([0, 0, 1], [3, 1, 4], [1, 0, 3]),
        ] {
            let lhs = dd.eval(&[e(&u), e(&v)], &e(&x)).unwrap();
            let flat: Vec<FieldElement> = [e(&u), e(&v), e(&x)].concat();
            assert_eq!(lhs, sym.evaluate(&flat).unwrap());
        }
        let zero_dir = dd
            .eval(&[e(&[0, 0, 0]), e(&[1, 2, 3])], &e(&[4, 4, 4]))
            .unwrap();
        assert_eq!(zero_dir, FieldElement::ZERO);
        let g2 = form("p=2; n=2; x1*x2");
        assert!(DdViaPolarization::new(&g2).is_err());
    }

    #[test]
    fn multilinearity_is_enforced() {
        let spec = FieldSpec::new(5).unwrap();
        let bad = parse_polynomial("p=5; n=4; x1*x2").unwrap();
        assert!(MultilinearForm::new(bad, 2, 2).is_err());
        let sq = parse_polynomial("p=5; n=2; x1^2").unwrap();
        assert!(MultilinearForm::new(sq, 1, 2).is_err());
        let a = MultilinearForm::linear(spec, 2, 2, 0, &[FieldElement::ONE, FieldElement::ZERO]);
        let b = MultilinearForm::linear(spec, 2, 2, 1, &[FieldElement::ZERO, FieldElement::ONE]);
        assert!(a.add(&b).is_err());
        assert!(a.mul(&a).is_err());
        assert_eq!(a.mul(&b).unwrap().degree(), 2);
    }

    #[test]
    fn text_round_trip_and_permutation() {
        let t = ml("blocks=3; p=5; n=2; x1_1*x2_2*x3_1 + 3*x1_2*x2_1*x3_2");
        assert_eq!(MultilinearForm::parse(&t.to_text()).unwrap(), t);
        let swapped = t.permute_blocks(&[2, 1, 0]).unwrap();
        assert_eq!(swapped.permute_blocks(&[2, 1, 0]).unwrap(), t);
        let partial = ml("blocks=3; support=1,3; p=5; n=2; 0");
        assert_eq!(partial.degree(), 2);
        assert!(MultilinearForm::parse("blocks=2; p=5; n=2; x3_1").is_err());
    }
}
