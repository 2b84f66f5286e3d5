//! Prime-field arithmetic and exact value histograms.
//!
//! Every bias computed in this crate is first accumulated as a
//! [`ValueHistogram`]: the integer count of inputs taking each field value.
//! Identities between biases are checked on these counts; the complex
//! character sum is only formed at the very end by [`histogram_to_bias`].

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported modulus. Keeps every product of two reduced elements
/// below 2^62, so `u64` multiplication never overflows.
pub const MAX_PRIME: u64 = 1 << 31;

/// Tolerance used when clamping floating bias magnitudes into `[0, 1]`.
pub const BIAS_EPS: f64 = 1e-12;

/// The prime field `F_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u64,
}

/// A canonical representative in `[0, p)`. The modulus lives in the
/// surrounding [`FieldSpec`], so elements are plain integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(pub u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

impl FieldSpec {
    /// Checks primality by trial division.
    pub fn new(p: u64) -> Result<Self> {
        if p > MAX_PRIME || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(FieldSpec { p })
    }

    #[inline]
    pub fn p(self) -> u64 {
        self.p
    }

    #[inline]
    pub fn elem(self, v: u64) -> FieldElement {
        FieldElement(v % self.p)
    }

    pub fn from_i64(self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.p as i64) as u64)
    }

    #[inline]
    pub fn add(self, a: FieldElement, b: FieldElement) -> FieldElement {
        let s = a.0 + b.0;
        FieldElement(if s >= self.p { s - self.p } else { s })
    }

    #[inline]
    pub fn sub(self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(if a.0 >= b.0 {
            a.0 - b.0
        } else {
            a.0 + self.p - b.0
        })
    }

    #[inline]
    pub fn neg(self, a: FieldElement) -> FieldElement {
        FieldElement(if a.0 == 0 { 0 } else { self.p - a.0 })
    }

    #[inline]
    pub fn mul(self, a: FieldElement, b: FieldElement) -> FieldElement {
        FieldElement(a.0 * b.0 % self.p)
    }

    pub fn pow(self, a: FieldElement, mut e: u64) -> FieldElement {
        let mut base = a;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self, a: FieldElement) -> Option<FieldElement> {
        if a.is_zero() {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    /// `k!` reduced mod p.
    pub fn factorial(self, k: u64) -> FieldElement {
        (1..=k).fold(FieldElement::ONE, |acc, i| self.mul(acc, self.elem(i)))
    }

    /// The inverse of 2, defined for odd p.
    pub fn half(self) -> Option<FieldElement> {
        self.inv(self.elem(2))
    }

    /// Iterator over all field elements in increasing order.
    pub fn elements(self) -> impl Iterator<Item = FieldElement> {
        (0..self.p).map(FieldElement)
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

/// Integer counts `N_a = #{inputs : value = a}` for every `a` in `F_p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValueHistogram {
    counts: Vec<u64>,
    total: u64,
}

impl ValueHistogram {
    pub fn new(spec: FieldSpec) -> Self {
        ValueHistogram {
            counts: vec![0; spec.p() as usize],
            total: 0,
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        ValueHistogram { counts, total }
    }

    #[inline]
    pub fn record(&mut self, v: FieldElement) {
        self.counts[v.0 as usize] += 1;
        self.total += 1;
    }

    #[inline]
    pub fn record_many(&mut self, v: FieldElement, times: u64) {
        self.counts[v.0 as usize] += times;
        self.total += times;
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, v: FieldElement) -> u64 {
        self.counts[v.0 as usize]
    }

    /// Componentwise sum. Merging is associative and commutative, so partial
    /// histograms from a partitioned sweep can be combined in any order.
    pub fn merge(&mut self, other: &ValueHistogram) {
        assert_eq!(
            self.counts.len(),
            other.counts.len(),
            "histogram field mismatch"
        );
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += *b;
        }
        self.total += other.total;
    }

    pub fn merged(mut self, other: &ValueHistogram) -> Self {
        self.merge(other);
        self
    }

    /// Histogram of `a + shift` for every recorded value `a`.
    pub fn shifted(&self, spec: FieldSpec, shift: FieldElement) -> Self {
        let p = spec.p() as usize;
        let mut counts = vec![0; p];
        for (a, &c) in self.counts.iter().enumerate() {
            counts[(a + shift.0 as usize) % p] += c;
        }
        ValueHistogram {
            counts,
            total: self.total,
        }
    }

    /// Histogram with every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        ValueHistogram {
            counts: self.counts.iter().map(|c| c * factor).collect(),
            total: self.total * factor,
        }
    }

    /// Componentwise difference `self - other`, or `None` when some entry
    /// would go negative.
    pub fn checked_sub(&self, other: &ValueHistogram) -> Option<ValueHistogram> {
        if self.counts.len() != other.counts.len() {
            return None;
        }
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()?;
        Some(ValueHistogram::from_counts(counts))
    }
}

/// The complex bias `(1/total) * sum_a N_a e^{2 pi i a / p}` and its modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bias {
    pub value: Complex64,
    pub magnitude: f64,
}

pub fn histogram_to_bias(h: &ValueHistogram, spec: FieldSpec) -> Result<Bias> {
    if h.total == 0 {
        return Err(Error::EmptyDomain);
    }
    // All counts equal is exactly the vanishing of the character sum for
    // prime p, so report a clean zero instead of roundoff.
    if histogram_is_flat(h) {
        return Ok(Bias {
            value: Complex64::new(0.0, 0.0),
            magnitude: 0.0,
        });
    }
    let p = spec.p() as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, &c) in h.counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let theta = std::f64::consts::TAU * (a as f64) / p;
        acc += Complex64::new(theta.cos(), theta.sin()) * (c as f64);
    }
    let value = acc / (h.total as f64);
    let raw = value.norm();
    debug_assert!(raw <= 1.0 + BIAS_EPS, "bias magnitude {raw} exceeds 1");
    Ok(Bias {
        value,
        magnitude: raw.clamp(0.0, 1.0),
    })
}

/// True iff all `p` counts are equal, i.e. the character sum vanishes exactly.
pub fn histogram_is_flat(h: &ValueHistogram) -> bool {
    h.counts.windows(2).all(|w| w[0] == w[1])
}
