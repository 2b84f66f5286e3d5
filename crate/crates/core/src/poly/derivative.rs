//! Formal and discrete derivatives.
//!
//! Iterated discrete derivatives are returned as polynomials in `n*(d+1)`
//! variables laid out as blocks: directions `v^(1) .. v^(d)` in blocks
//! `0 .. d-1` and the base point `x` in block `d`. Variable `i` of block `b`
//! has index `b*n + i`.

use crate::error::{Error, Result};
use crate::field::FieldElement;

use super::{Monomial, Polynomial};

impl Polynomial {
    /// `df/dx_j` by the power rule, coefficients reduced mod p.
    pub fn partial(&self, j: usize) -> Polynomial {
        let k = self.spec();
        let mut out = Polynomial::zero(k, self.nvars());
        for (m, c) in self.terms() {
            let e = m.exps()[j];
            if e == 0 {
                continue;
            }
            let mut exps = m.exps().to_vec();
            exps[j] -= 1;
            out.add_term(Monomial::new(exps), k.mul(c, k.elem(e as u64)));
        }
        out
    }

    /// `d_c f = sum_i c_i df/dx_i`.
    pub fn formal_derivative(&self, c: &[FieldElement]) -> Result<Polynomial> {
        if c.len() != self.nvars() {
            return Err(Error::ArityMismatch {
                left: self.nvars(),
                right: c.len(),
            });
        }
        let mut out = Polynomial::zero(self.spec(), self.nvars());
        for (j, &cj) in c.iter().enumerate() {
            if !cj.is_zero() {
                out = &out + &self.partial(j).scale(cj);
            }
        }
        Ok(out)
    }

    /// The formal gradient `(df/dx_i)_i`.
    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.nvars()).map(|j| self.partial(j)).collect()
    }

    /// The polynomial `x -> f(x + v) - f(x)`.
    pub fn discrete_derivative_at(&self, v: &[FieldElement]) -> Result<Polynomial> {
        if v.len() != self.nvars() {
            return Err(Error::ArityMismatch {
                left: self.nvars(),
                right: v.len(),
            });
        }
        let k = self.spec();
        let n = self.nvars();
        let images: Vec<Polynomial> = (0..n)
            .map(|i| &Polynomial::var(k, n, i) + &Polynomial::constant(k, n, v[i]))
            .collect();
        Ok(&self.compose(&images)? - self)
    }

    /// Symbolic `Delta^d_{v} f(x)` over `n*(d+1)` variables, computed by
    /// the semi-surjection expansion.
    pub fn iterated_discrete_derivative(&self, d: usize) -> Polynomial {
        iterated_derivative_semisurjection(self, d)
    }
}

/// `Delta^d f` by unfolding the definition: starting from `f` in the point
/// block, repeatedly replace `F` by `F(x + v^(j)) - F(x)`.
pub fn iterated_derivative_recursive(f: &Polynomial, d: usize) -> Polynomial {
    let k = f.spec();
    let n = f.nvars();
    let total = n * (d + 1);
    let point_block: Vec<usize> = (0..n).map(|i| d * n + i).collect();
    let mut acc = f.embed(total, &point_block);
    for j in 0..d {
        let images: Vec<Polynomial> = (0..total)
            .map(|var| {
                let x = Polynomial::var(k, total, var);
                if var >= d * n {
                    &x + &Polynomial::var(k, total, j * n + (var - d * n))
                } else {
                    x
                }
            })
            .collect();
        let shifted = acc.compose(&images).expect("images share the ring");
        acc = &shifted - &acc;
    }
    acc
}

/// `Delta^d f` as `sum_I c_I sum_{phi} prod_j x^{(phi(j))}_{I_j}` where `phi`
/// ranges over maps `[k] -> [d+1]` whose image contains `[d]`.
pub fn iterated_derivative_semisurjection(f: &Polynomial, d: usize) -> Polynomial {
    let k = f.spec();
    let n = f.nvars();
    let total = n * (d + 1);
    let mut out = Polynomial::zero(k, total);
    for (m, c) in f.terms() {
        let vars = m.variable_tuple();
        let deg = vars.len();
        if deg < d {
            continue;
        }
        let mut phi = vec![0usize; deg];
        loop {
            let mut hit = vec![false; d + 1];
            for &b in &phi {
                hit[b] = true;
            }
            if hit[..d].iter().all(|&h| h) {
                let mut exps = vec![0u32; total];
                for (j, &b) in phi.iter().enumerate() {
                    exps[b * n + vars[j]] += 1;
                }
                out.add_term(Monomial::new(exps), c);
            }
            // Odometer over [d+1]^deg.
            let mut pos = 0;
            while pos < deg {
                phi[pos] += 1;
                if phi[pos] == d + 1 {
                    phi[pos] = 0;
                    pos += 1;
                } else {
                    break;
                }
            }
            if pos == deg {
                break;
            }
        }
    }
    out
}
