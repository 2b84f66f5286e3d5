//! Reference computations that share nothing with the library beyond
//! reading a polynomial's terms.

#![allow(dead_code)]

use std::f64::consts::TAU;

use hofa_core::Polynomial;
use num_complex::Complex64;

pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    acc
}

/// Term-by-term evaluation.
pub fn eval(f: &Polynomial, x: &[u64]) -> u64 {
    let p = f.spec().p();
    f.terms().fold(0, |acc, (m, c)| {
        let v = m
            .exps()
            .iter()
            .zip(x)
            .fold(c.value(), |v, (&e, &xi)| v * pow_mod(xi, e as u64, p) % p);
        (acc + v) % p
    })
}

/// Every point of `F_p^n` in odometer order.
pub fn points(p: u64, n: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::with_capacity(n)];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|pt| {
                (0..p).map(move |a| {
                    let mut q = pt.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn character(a: u64, p: u64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * a as f64 / p as f64)
}

/// `E_x e(f(x)/p)` with cos/sin summed directly.
pub fn bias_value(f: &Polynomial) -> Complex64 {
    let p = f.spec().p();
    let pts = points(p, f.nvars());
    let sum: Complex64 = pts.iter().map(|x| character(eval(f, x), p)).sum();
    sum / pts.len() as f64
}

pub fn bias(f: &Polynomial) -> f64 {
    bias_value(f).norm()
}

/// `sum_xi |f^(xi)|^4` with `f^(xi) = E_x e((f(x) - xi.x)/p)`.
pub fn fourier_l4(f: &Polynomial) -> f64 {
    let p = f.spec().p();
    let n = f.nvars();
    let pts = points(p, n);
    let values: Vec<u64> = pts.iter().map(|x| eval(f, x)).collect();
    pts.iter()
        .map(|xi| {
            let s: Complex64 = pts
                .iter()
                .zip(&values)
                .map(|(x, &fx)| {
                    let dot = x.iter().zip(xi).map(|(a, b)| a * b).sum::<u64>() % p;
                    character((fx + p - dot) % p, p)
                })
                .sum();
            (s / pts.len() as f64).norm().powi(4)
        })
        .sum()
}

/// `Delta_{v_1..v_d} f(x) = sum_S (-1)^{d-|S|} f(x + sum_{t in S} v_t)`.
pub fn nested_difference(f: &Polynomial, dirs: &[Vec<u64>], x: &[u64]) -> u64 {
    let p = f.spec().p();
    let d = dirs.len();
    let mut acc = 0u64;
    for mask in 0u32..(1 << d) {
        let pt: Vec<u64> = (0..x.len())
            .map(|i| {
                (0..d)
                    .filter(|t| mask >> t & 1 == 1)
                    .fold(x[i], |s, t| (s + dirs[t][i]) % p)
            })
            .collect();
        let v = eval(f, &pt);
        if (d as u32 - mask.count_ones()) % 2 == 0 {
            acc = (acc + v) % p;
        } else {
            acc = (acc + p - v) % p;
        }
    }
    acc
}

/// Rank of a dense matrix by Gauss-Jordan elimination.
pub fn elimination_rank(p: u64, mut rows: Vec<Vec<u64>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = pow_mod(rows[rank][col], p - 2, p);
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let factor = rows[r][col] * inv % p;
                for c in 0..cols {
                    rows[r][c] = (rows[r][c] + p - factor * rows[rank][c] % p) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// `max_P bias(f - P)` over every `P` of degree at most 1.
pub fn affine_correlation(f: &Polynomial) -> f64 {
    let p = f.spec().p();
    let n = f.nvars();
    let pts = points(p, n);
    let values: Vec<u64> = pts.iter().map(|x| eval(f, x)).collect();
    points(p, n + 1)
        .iter()
        .map(|coef| {
            let s: Complex64 = pts
                .iter()
                .zip(&values)
                .map(|(x, &fx)| {
                    let l = x.iter().zip(&coef[1..]).map(|(a, b)| a * b).sum::<u64>() + coef[0];
                    character((fx + p - l % p) % p, p)
                })
                .sum();
            (s / pts.len() as f64).norm()
        })
        .fold(0.0, f64::max)
}

/// Number of common zeros of `gens` in `F_p^n`.
pub fn common_zeros(gens: &[Polynomial], p: u64, n: usize) -> u64 {
    points(p, n)
        .iter()
        .filter(|x| gens.iter().all(|g| eval(g, x) == 0))
        .count() as u64
}
