use crate::field::{FieldElement, FieldSpec};

use super::Polynomial;

/// A polynomial flattened for repeated evaluation in enumeration sweeps.
#[derive(Debug, Clone)]
pub struct Evaluator {
    p: u64,
    nvars: usize,
    terms: Vec<(u64, Vec<(usize, u32)>)>,
}

impl Evaluator {
    pub fn new(f: &Polynomial) -> Self {
        let terms = f
            .terms()
            .map(|(m, c)| {
                let factors = m
                    .exps()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (i, e))
                    .collect();
                (c.value(), factors)
            })
            .collect();
        Evaluator {
            p: f.spec().p(),
            nvars: f.nvars(),
            terms,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Evaluates at a point given as raw residues in `[0, p)`. The point
    /// length is not checked beyond the indices the polynomial uses.
    #[inline]
    pub fn eval_raw(&self, x: &[u64]) -> u64 {
        let p = self.p;
        let mut acc = 0u64;
        for (c, factors) in &self.terms {
            let mut t = *c;
            for &(i, e) in factors {
                let xi = x[i];
                for _ in 0..e {
                    t = t * xi % p;
                }
            }
            acc += t;
            if acc >= p {
                acc -= p;
            }
        }
        acc
    }

    pub fn eval(&self, x: &[FieldElement]) -> FieldElement {
        let raw: Vec<u64> = x.iter().map(|v| v.value()).collect();
        FieldElement(self.eval_raw(&raw))
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec::new(self.p).expect("evaluator built from a valid field")
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_polynomial;

    #[test]
    fn matches_direct_evaluation() {
        let f = parse_polynomial("p=7; n=3; 3*x1*x2^2 + 4*x3^3 + 5").unwrap();
        let ev = f.evaluator();
        let k = f.spec();
        for a in 0..7 {
            for b in 0..7 {
                let pt = [k.elem(a), k.elem(b), k.elem(a + b)];
                assert_eq!(ev.eval(&pt), f.evaluate(&pt).unwrap());
            }
        }
    }
}
