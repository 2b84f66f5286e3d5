//! Dense linear algebra over `F_p`: echelon forms, rank, linear solves and
//! enumeration of subspaces by their reduced echelon bases.

use std::ops::ControlFlow;

use crate::field::{FieldElement, FieldSpec};

/// Row-major dense matrix over a prime field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    spec: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

/// Result of row reduction.
#[derive(Debug, Clone)]
pub struct Echelon {
    /// Reduced matrix; the first `pivots.len()` rows are the nonzero rows.
    pub matrix: Matrix,
    /// Pivot column of each nonzero row, increasing.
    pub pivots: Vec<usize>,
}

impl Matrix {
    pub fn zeros(spec: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            spec,
            rows,
            cols,
            data: vec![FieldElement::ZERO; rows * cols],
        }
    }

    pub fn from_rows(spec: FieldSpec, rows: &[Vec<FieldElement>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(spec, rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            m.data[i * cols..(i + 1) * cols].copy_from_slice(r);
        }
        m
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> FieldElement {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: FieldElement) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[FieldElement] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Gauss-Jordan elimination, pivoting on the lowest available column.
    pub fn rref(&self) -> Echelon {
        let k = self.spec;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(src) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, src);
            let inv = k.inv(m.get(row, col)).expect("nonzero pivot");
            for c in col..m.cols {
                let v = k.mul(m.get(row, c), inv);
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                for c in col..m.cols {
                    let v = k.sub(m.get(r, c), k.mul(factor, m.get(row, c)));
                    m.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    /// Some solution `x` of `self * x = b`, with free variables set to zero.
    pub fn solve(&self, b: &[FieldElement]) -> Option<Vec<FieldElement>> {
        assert_eq!(b.len(), self.rows, "right-hand side length");
        let mut aug = Matrix::zeros(self.spec, self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols, b[r]);
        }
        let ech = aug.rref();
        if ech.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![FieldElement::ZERO; self.cols];
        for (i, &pc) in ech.pivots.iter().enumerate() {
            x[pc] = ech.matrix.get(i, self.cols);
        }
        Some(x)
    }

    /// Basis of the right null space.
    pub fn nullspace(&self) -> Vec<Vec<FieldElement>> {
        let k = self.spec;
        let ech = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !ech.pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![FieldElement::ZERO; self.cols];
                v[fc] = FieldElement::ONE;
                for (i, &pc) in ech.pivots.iter().enumerate() {
                    v[pc] = k.neg(ech.matrix.get(i, fc));
                }
                v
            })
            .collect()
    }

    pub fn mul_vec(&self, x: &[FieldElement]) -> Vec<FieldElement> {
        let k = self.spec;
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(FieldElement::ZERO, |acc, (&a, &b)| k.add(acc, k.mul(a, b)))
            })
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.spec, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }
}

/// Rank of a list of vectors of equal length.
pub fn rank_of(spec: FieldSpec, vectors: &[Vec<FieldElement>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_rows(spec, vectors).rank()
}

/// Coefficients `c` with `target = sum_i c_i basis_i`, if `target` lies in
/// the span.
pub fn express_in_span(
    spec: FieldSpec,
    basis: &[Vec<FieldElement>],
    target: &[FieldElement],
) -> Option<Vec<FieldElement>> {
    if basis.is_empty() {
        return target.iter().all(|v| v.is_zero()).then(Vec::new);
    }
    Matrix::from_rows(spec, basis).transpose().solve(target)
}

/// Number of `dim`-dimensional subspaces of `F_p^ambient` (Gaussian binomial),
/// saturating at `u128::MAX`.
pub fn subspace_count(p: u64, ambient: usize, dim: usize) -> u128 {
    if dim > ambient {
        return 0;
    }
    let p = p as u128;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..dim {
        let a = p.saturating_pow((ambient - i) as u32).saturating_sub(1);
        let b = p.saturating_pow((i + 1) as u32) - 1;
        num = num.saturating_mul(a);
        den = den.saturating_mul(b);
    }
    if num == u128::MAX {
        u128::MAX
    } else {
        num / den
    }
}

/// Calls `visit` once per `dim`-dimensional subspace of `F_p^ambient`,
/// passing its reduced row echelon basis. Subspaces are visited in a fixed
/// order: pivot sets lexicographically, then free entries as a base-p
/// odometer.
pub fn for_each_subspace<B>(
    spec: FieldSpec,
    ambient: usize,
    dim: usize,
    mut visit: impl FnMut(&[Vec<FieldElement>]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    if dim > ambient {
        return ControlFlow::Continue(());
    }
    if dim == 0 {
        return visit(&[]);
    }
    let p = spec.p();
    let mut pivots: Vec<usize> = (0..dim).collect();
    loop {
        // Free slots: (row, column) with column > pivot and not itself a pivot.
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(i, &pc)| {
                let pivots = &pivots;
                (pc + 1..ambient)
                    .filter(move |c| !pivots.contains(c))
                    .map(move |c| (i, c))
            })
            .collect();
        let mut basis: Vec<Vec<FieldElement>> = pivots
            .iter()
            .map(|&pc| {
                let mut row = vec![FieldElement::ZERO; ambient];
                row[pc] = FieldElement::ONE;
                row
            })
            .collect();
        let mut digits = vec![0u64; free.len()];
        loop {
            visit(&basis)?;
            // Odometer increment over the free entries.
            let mut pos = 0;
            loop {
                if pos == digits.len() {
                    break;
                }
                digits[pos] += 1;
                if digits[pos] == p {
                    digits[pos] = 0;
                    let (r, c) = free[pos];
                    basis[r][c] = FieldElement::ZERO;
                    pos += 1;
                } else {
                    let (r, c) = free[pos];
                    basis[r][c] = FieldElement(digits[pos]);
                    break;
                }
            }
            if pos == digits.len() {
                break;
            }
        }
        // Next pivot combination.
        let mut i = dim;
        loop {
            if i == 0 {
                return ControlFlow::Continue(());
            }
            i -= 1;
            if pivots[i] < ambient - dim + i {
                pivots[i] += 1;
                for j in i + 1..dim {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u64) -> FieldSpec {
        FieldSpec::new(p).unwrap()
    }

    fn m(spec: FieldSpec, rows: &[&[u64]]) -> Matrix {
        let rows: Vec<Vec<FieldElement>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| spec.elem(v)).collect())
            .collect();
        Matrix::from_rows(spec, &rows)
    }

    #[test]
    fn rank_and_rref() {
        let f = k(5);
        let a = m(f, &[&[1, 2, 3], &[0, 1, 1], &[1, 3, 4]]);
        // row3 = row1 + row2 mod 5
        assert_eq!(a.rank(), 2);
        let swap = m(f, &[&[0, 1], &[1, 0]]);
        assert_eq!(swap.rank(), 2);
        assert_eq!(m(f, &[&[0, 0], &[0, 0]]).rank(), 0);
    }

    #[test]
    fn solve_and_nullspace() {
        let f = k(7);
        let a = m(f, &[&[1, 1, 0], &[0, 1, 1]]);
        let b = vec![f.elem(3), f.elem(5)];
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul_vec(&x), b);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(a.mul_vec(&ns[0]).iter().all(|v| v.is_zero()));
        let inconsistent = m(f, &[&[1, 1], &[1, 1]]);
        assert!(inconsistent.solve(&[f.elem(1), f.elem(2)]).is_none());
    }

    #[test]
    fn span_membership() {
        let f = k(3);
        let basis = vec![
            vec![f.elem(1), f.elem(0), f.elem(1)],
            vec![f.elem(0), f.elem(1), f.elem(1)],
        ];
        let t = vec![f.elem(2), f.elem(1), f.elem(0)];
        let c = express_in_span(f, &basis, &t).unwrap();
        assert_eq!(c, vec![f.elem(2), f.elem(1)]);
        assert!(express_in_span(f, &basis, &[f.elem(1), f.elem(0), f.elem(0)]).is_none());
        assert_eq!(express_in_span(f, &[], &[FieldElement::ZERO]), Some(vec![]));
    }

    #[test]
    fn subspace_enumeration_matches_gaussian_binomial() {
        for (p, n) in [(2u64, 4usize), (3, 3), (5, 2)] {
            let f = k(p);
            for d in 0..=n {
                let mut seen = std::collections::HashSet::new();
                let _ = for_each_subspace::<()>(f, n, d, |b| {
                    assert_eq!(rank_of(f, b), d);
                    seen.insert(b.to_vec());
                    ControlFlow::Continue(())
                });
                assert_eq!(
                    seen.len() as u128,
                    subspace_count(p, n, d),
                    "p={p} n={n} d={d}"
                );
            }
        }
    }
}
