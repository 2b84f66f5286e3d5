//! Exhaustive sweeps over `F_p^n`.
//!
//! Points are visited row-major with an odometer increment (last
//! coordinate fastest). Parallel sweeps split on the first coordinate and
//! merge integer histograms, so results never depend on the schedule.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec, ValueHistogram};

/// Default cap on the number of evaluated points for exact sweeps.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// `p^n`, or `None` when it overflows `u64`.
pub fn domain_size(p: u64, n: usize) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..n {
        acc = acc.checked_mul(p)?;
    }
    Some(acc)
}

/// Fails with a budget error unless `p^n <= budget`.
pub fn check_budget(p: u64, n: usize, budget: u64, hint: &str) -> Result<u64> {
    match domain_size(p, n) {
        Some(size) if size <= budget => Ok(size),
        other => Err(Error::Budget {
            needed: other.map_or((p as f64).powi(n as i32), |s| s as f64),
            budget,
            hint: hint.to_string(),
        }),
    }
}

/// Advances `x` to the next point of `F_p^n`; returns false after the last.
#[inline]
pub fn odometer_next(x: &mut [u64], p: u64) -> bool {
    for xi in x.iter_mut().rev() {
        *xi += 1;
        if *xi < p {
            return true;
        }
        *xi = 0;
    }
    false
}

/// Visits every point of `F_p^n` in row-major order.
pub fn for_each_point(p: u64, n: usize, mut visit: impl FnMut(&[u64])) {
    let mut x = vec![0u64; n];
    loop {
        visit(&x);
        if !odometer_next(&mut x, p) {
            break;
        }
    }
}

/// All points of `F_p^n` as field elements, row-major.
pub fn all_points(spec: FieldSpec, n: usize) -> Vec<Vec<FieldElement>> {
    let mut out = Vec::new();
    for_each_point(spec.p(), n, |x| {
        out.push(x.iter().map(|&v| FieldElement(v)).collect())
    });
    out
}

/// Folds `visit` over all of `F_p^n` in parallel. Each first-coordinate
/// slice starts from `init()`; slices are merged in coordinate order.
pub fn sweep_fold<T, I, V, M>(
    spec: FieldSpec,
    n: usize,
    budget: u64,
    init: I,
    visit: V,
    merge: M,
) -> Result<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    V: Fn(&mut T, &[u64]) + Sync,
    M: Fn(T, T) -> T,
{
    check_budget(spec.p(), n, budget, "reduce n or use a sampled estimate")?;
    let p = spec.p();
    if n == 0 {
        let mut acc = init();
        visit(&mut acc, &[]);
        return Ok(acc);
    }
    let partials: Vec<T> = (0..p)
        .into_par_iter()
        .map(|first| {
            let mut acc = init();
            let mut x = vec![0u64; n];
            x[0] = first;
            loop {
                visit(&mut acc, &x);
                if !odometer_next(&mut x[1..], p) {
                    break;
                }
            }
            acc
        })
        .collect();
    Ok(partials.into_iter().fold(init(), merge))
}

/// Histogram of `value(x)` over all of `F_p^n`, swept in parallel.
pub fn sweep_histogram<F>(
    spec: FieldSpec,
    n: usize,
    budget: u64,
    value: F,
) -> Result<ValueHistogram>
where
    F: Fn(&[u64]) -> u64 + Sync,
{
    sweep_fold(
        spec,
        n,
        budget,
        || ValueHistogram::new(spec),
        |h, x| h.record(FieldElement(value(x))),
        |a, b| a.merged(&b),
    )
}

/// Counts points satisfying `pred`, swept in parallel.
pub fn sweep_count<F>(spec: FieldSpec, n: usize, budget: u64, pred: F) -> Result<u64>
where
    F: Fn(&[u64]) -> bool + Sync,
{
    check_budget(spec.p(), n, budget, "reduce n")?;
    let p = spec.p();
    if n == 0 {
        return Ok(u64::from(pred(&[])));
    }
    Ok((0..p)
        .into_par_iter()
        .map(|first| {
            let mut c = 0u64;
            let mut x = vec![0u64; n];
            x[0] = first;
            loop {
                if pred(&x) {
                    c += 1;
                }
                if !odometer_next(&mut x[1..], p) {
                    break;
                }
            }
            c
        })
        .sum())
}
