//! Seeded random instances for property suites and experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{FieldElement, FieldSpec};
use crate::multilinear::MultilinearForm;
use crate::poly::{
    monomials_of_degree, monomials_up_to_degree, HomogeneousForm, Monomial, Polynomial,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn element<R: Rng>(spec: FieldSpec, rng: &mut R) -> FieldElement {
    FieldElement(rng.gen_range(0..spec.p()))
}

pub fn vector<R: Rng>(spec: FieldSpec, len: usize, rng: &mut R) -> Vec<FieldElement> {
    (0..len).map(|_| element(spec, rng)).collect()
}

fn from_basis<R: Rng>(spec: FieldSpec, n: usize, basis: Vec<Monomial>, rng: &mut R) -> Polynomial {
    let mut f = Polynomial::zero(spec, n);
    for m in basis {
        f.add_term(m, element(spec, rng));
    }
    f
}

/// Uniform over polynomials of degree at most `d`.
pub fn polynomial<R: Rng>(spec: FieldSpec, n: usize, d: u32, rng: &mut R) -> Polynomial {
    from_basis(spec, n, monomials_up_to_degree(n, d), rng)
}

/// Uniform over forms of degree `k`, zero included.
pub fn form<R: Rng>(spec: FieldSpec, n: usize, k: u32, rng: &mut R) -> HomogeneousForm {
    HomogeneousForm::new(from_basis(spec, n, monomials_of_degree(n, k), rng), k)
        .expect("homogeneous basis")
}

/// Uniform over nonzero forms of degree `k`.
pub fn nonzero_form<R: Rng>(spec: FieldSpec, n: usize, k: u32, rng: &mut R) -> HomogeneousForm {
    loop {
        let g = form(spec, n, k, rng);
        if !g.is_zero() {
            return g;
        }
    }
}

/// Uniform over multilinear forms on `blocks` blocks with full support.
pub fn multilinear<R: Rng>(
    spec: FieldSpec,
    n: usize,
    blocks: usize,
    rng: &mut R,
) -> MultilinearForm {
    let mut poly = Polynomial::zero(spec, n * blocks);
    let mut idx = vec![0usize; blocks];
    loop {
        let vars: Vec<usize> = idx.iter().enumerate().map(|(b, &i)| b * n + i).collect();
        poly.add_term(
            Monomial::from_variable_tuple(n * blocks, &vars),
            element(spec, rng),
        );
        // Odometer over (F_n)^blocks.
        let mut j = blocks;
        loop {
            if j == 0 {
                return MultilinearForm::with_support(poly, n, blocks, (0..blocks).collect())
                    .expect("multilinear");
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < n {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Uniform over nonzero multilinear forms with full support.
pub fn nonzero_multilinear<R: Rng>(
    spec: FieldSpec,
    n: usize,
    blocks: usize,
    rng: &mut R,
) -> MultilinearForm {
    loop {
        let t = multilinear(spec, n, blocks, rng);
        if !t.is_zero() {
            return t;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Degree;

    #[test]
    fn generators_are_deterministic_and_in_range() {
        let spec = FieldSpec::new(5).unwrap();
        let a = polynomial(spec, 3, 3, &mut rng(11));
        let b = polynomial(spec, 3, 3, &mut rng(11));
        assert_eq!(a, b);
        assert!(a.degree().is_below(4));
        let g = nonzero_form(spec, 2, 4, &mut rng(2));
        assert_eq!(g.poly().degree(), Degree::Finite(4));
        let t = nonzero_multilinear(spec, 2, 3, &mut rng(3));
        assert_eq!(t.degree(), 3);
        assert!(t.poly().terms().all(|(m, _)| m.degree() == 3));
    }
}
