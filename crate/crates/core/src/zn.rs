//! Arithmetic and analysis primitives on `Z_N`: complex-valued functions,
//! the normalized Fourier transform, convolution, characteristic measures,
//! and subsets with exact densities.
//!
//! Conventions, used everywhere downstream:
//! * `omega = e(1/N)` and `e(t) = exp(2*pi*i*t)`;
//! * the transform is `hat f(r) = E_x f(x) omega^{-rx}` (an average, not a
//!   sum), inverted by `f(x) = sum_r hat f(r) omega^{rx}`;
//! * convolution is normalized: `(f*g)(x) = E_d f(x-d) g(d)`, so that
//!   `hat(f*g) = hat f * hat g` pointwise.
//!
//! Quadratic machinery elsewhere in the crate requires odd `N` (so that 2 is
//! invertible); the primitives here work for any `N >= 2`.

use crate::sum::{pairwise_mean, pairwise_sum};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// `e(t) = exp(2 pi i t)`.
pub fn e(t: f64) -> Complex64 {
    let (s, c) = (2.0 * std::f64::consts::PI * t).sin_cos();
    Complex64::new(c, s)
}

/// Table of the N-th roots of unity: `omega_table(n)[k] = e(k/n)`.
pub fn omega_table(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| e(k as f64 / n as f64)).collect()
}

/// `|omega^k - 1| = 2 |sin(pi k / N)|`, evaluated trigonometrically.
pub fn chord(n: usize, k: u64) -> f64 {
    let k = (k % n as u64) as f64;
    2.0 * (std::f64::consts::PI * k / n as f64).sin().abs()
}

/// A complex-valued function on `Z_N`, the universal carrier for test
/// functions, phases, and measures.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFn {
    n: usize,
    values: Vec<Complex64>,
}

impl GroupFn {
    pub fn new(n: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != n {
            return Err(Error::Precondition(format!(
                "expected {} values, got {}",
                n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Precondition("non-finite value".into()));
        }
        Ok(GroupFn { n, values })
    }

    pub fn from_fn<F: FnMut(usize) -> Complex64>(n: usize, mut f: F) -> Self {
        GroupFn {
            n,
            values: (0..n).map(|x| f(x)).collect(),
        }
    }

    pub fn zero(n: usize) -> Self {
        GroupFn {
            n,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        GroupFn {
            n,
            values: vec![c; n],
        }
    }

    /// The phase function `x -> omega^{a x^2 + b x + c}`.
    pub fn quad_phase(n: usize, a: u64, b: u64, c: u64) -> Self {
        let w = omega_table(n);
        let nn = n as u64;
        GroupFn::from_fn(n, |x| {
            let x = x as u64;
            let k = (a % nn * (x * x % nn) % nn + b % nn * x % nn + c % nn) % nn;
            w[k as usize]
        })
    }

    /// The character `x -> omega^{r x}`.
    pub fn character(n: usize, r: u64) -> Self {
        GroupFn::quad_phase(n, 0, r, 0)
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, x: usize) -> Complex64 {
        self.values[x % self.n]
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        GroupFn {
            n: self.n,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GroupFn) -> Result<Self> {
        self.check_modulus(other)?;
        Ok(GroupFn {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a * b)
                .collect(),
        })
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &GroupFn) -> Result<Self> {
        self.check_modulus(other)?;
        Ok(GroupFn {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &GroupFn) -> Result<Self> {
        self.check_modulus(other)?;
        Ok(GroupFn {
            n: self.n,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| a - b)
                .collect(),
        })
    }

    /// `f(. + t)`.
    pub fn translate(&self, t: usize) -> Self {
        GroupFn::from_fn(self.n, |x| self.values[(x + t) % self.n])
    }

    pub fn mean(&self) -> Complex64 {
        pairwise_mean(self.n, |x| self.values[x])
    }

    pub fn l1_norm(&self) -> f64 {
        pairwise_sum::<f64, _>(self.n, |x| self.values[x].norm()) / self.n as f64
    }

    pub fn l2_norm(&self) -> f64 {
        (pairwise_sum::<f64, _>(self.n, |x| self.values[x].norm_sqr()) / self.n as f64).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn check_modulus(&self, other: &GroupFn) -> Result<()> {
        if self.n != other.n {
            return Err(Error::ModulusMismatch(self.n, other.n));
        }
        Ok(())
    }

    /// Mean of `f` over a subset (unweighted), zero for the empty set.
    pub fn mean_over(&self, s: &SubsetZn) -> Complex64 {
        let idx = s.members();
        if idx.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        pairwise_sum::<Complex64, _>(idx.len(), |i| self.values[idx[i]]) / idx.len() as f64
    }
}

/// Serialization form: modulus plus an array of `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
pub struct GroupFnJson {
    pub schema_version: u32,
    pub modulus: usize,
    pub values: Vec<[f64; 2]>,
}

impl From<&GroupFn> for GroupFnJson {
    fn from(f: &GroupFn) -> Self {
        GroupFnJson {
            schema_version: 1,
            modulus: f.n,
            values: f.values.iter().map(|v| [v.re, v.im]).collect(),
        }
    }
}

impl TryFrom<GroupFnJson> for GroupFn {
    type Error = Error;
    fn try_from(j: GroupFnJson) -> Result<GroupFn> {
        GroupFn::new(
            j.modulus,
            j.values
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

/// Fourier coefficients `coeffs[r] = E_x f(x) omega^{-rx}`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn modulus(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn at(&self, r: usize) -> Complex64 {
        self.coeffs[r % self.n]
    }

    /// `(sum_r |hat f(r)|^p)^(1/p)` over the coefficient vector.
    pub fn lp_sum_norm(&self, p: f64) -> f64 {
        pairwise_sum::<f64, _>(self.n, |r| self.coeffs[r].norm().powf(p)).powf(1.0 / p)
    }
}

/// Direct `O(N^2)` transform. Desk scale (`N <= 1024`) keeps this instant,
/// and the direct sum with a fixed reduction tree is deterministic.
pub fn dft(f: &GroupFn) -> Spectrum {
    let n = f.n;
    let w = omega_table(n);
    let coeffs: Vec<Complex64> = par_map(n, |r| {
        pairwise_mean(n, |x| f.values[x] * w[r * x % n].conj())
    });
    Spectrum { n, coeffs }
}

/// Inverse transform: `f(x) = sum_r coeffs[r] omega^{rx}`.
pub fn idft(s: &Spectrum) -> GroupFn {
    let n = s.n;
    let w = omega_table(n);
    let values: Vec<Complex64> = par_map(n, |x| {
        pairwise_sum(n, |r| s.coeffs[r] * w[r * x % n])
    });
    GroupFn { n, values }
}

/// Normalized convolution `(f*g)(x) = E_d f(x-d) g(d)`.
pub fn convolve(f: &GroupFn, g: &GroupFn) -> Result<GroupFn> {
    f.check_modulus(g)?;
    let n = f.n;
    let values: Vec<Complex64> = par_map(n, |x| {
        pairwise_mean(n, |d| f.values[(x + n - d % n) % n] * g.values[d])
    });
    Ok(GroupFn { n, values })
}

/// Characteristic measure `mu_S`: `N/|S|` on `S`, zero elsewhere, so that
/// `E_x mu_S(x) = 1` exactly as a rational identity.
pub fn characteristic_measure(s: &SubsetZn) -> Result<GroupFn> {
    if s.count() == 0 {
        return Err(Error::EmptySet("characteristic measure".into()));
    }
    let v = s.n() as f64 / s.count() as f64;
    Ok(GroupFn::from_fn(s.n(), |x| {
        if s.contains(x) {
            Complex64::new(v, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

/// Map `0..n` to a vector, in parallel when the feature is enabled. Only
/// order-independent per-index work goes through here; reductions use
/// [`crate::sum`] so that results stay deterministic.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// A subset of `Z_N` with membership bitset and exact cardinality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetZn {
    n: usize,
    words: Vec<u64>,
    count: usize,
}

impl SubsetZn {
    pub fn empty(n: usize) -> Self {
        SubsetZn {
            n,
            words: vec![0; (n + 63) / 64],
            count: 0,
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = SubsetZn::empty(n);
        for x in 0..n {
            s.insert(x);
        }
        s
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(n: usize, it: I) -> Self {
        let mut s = SubsetZn::empty(n);
        for x in it {
            s.insert(x % n);
        }
        s
    }

    pub fn from_pred<F: FnMut(usize) -> bool>(n: usize, mut f: F) -> Self {
        let mut s = SubsetZn::empty(n);
        for x in 0..n {
            if f(x) {
                s.insert(x);
            }
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, x: usize) {
        debug_assert!(x < self.n);
        let (w, b) = (x / 64, x % 64);
        if self.words[w] & (1 << b) == 0 {
            self.words[w] |= 1 << b;
            self.count += 1;
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        let x = x % self.n;
        self.words[x / 64] & (1 << (x % 64)) != 0
    }

    /// Exact cardinality (a maintained popcount).
    pub fn count(&self) -> usize {
        self.count
    }

    /// `|S| / N`.
    pub fn density(&self) -> f64 {
        self.count as f64 / self.n as f64
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.n).filter(|&x| self.contains(x)).collect()
    }

    pub fn is_subset_of(&self, other: &SubsetZn) -> bool {
        self.n == other.n
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(&a, &b)| a & !b == 0)
    }

    pub fn intersect(&self, other: &SubsetZn) -> SubsetZn {
        assert_eq!(self.n, other.n);
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| a & b)
            .collect();
        let count = words.iter().map(|w| w.count_ones() as usize).sum();
        SubsetZn {
            n: self.n,
            words,
            count,
        }
    }

    pub fn union(&self, other: &SubsetZn) -> SubsetZn {
        assert_eq!(self.n, other.n);
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| a | b)
            .collect();
        let count = words.iter().map(|w| w.count_ones() as usize).sum();
        SubsetZn {
            n: self.n,
            words,
            count,
        }
    }

    pub fn minus(&self, other: &SubsetZn) -> SubsetZn {
        assert_eq!(self.n, other.n);
        let words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| a & !b)
            .collect();
        let count = words.iter().map(|w| w.count_ones() as usize).sum();
        SubsetZn {
            n: self.n,
            words,
            count,
        }
    }

    /// Sumset `{a + b : a in self, b in other}`.
    pub fn sumset(&self, other: &SubsetZn) -> SubsetZn {
        assert_eq!(self.n, other.n);
        let mut out = SubsetZn::empty(self.n);
        let bs = other.members();
        for a in self.members() {
            for &b in &bs {
                out.insert((a + b) % self.n);
            }
        }
        out
    }

    /// `{x : x + other subset of self}`.
    pub fn interior_wrt(&self, other: &SubsetZn) -> SubsetZn {
        assert_eq!(self.n, other.n);
        let bs = other.members();
        SubsetZn::from_pred(self.n, |x| bs.iter().all(|&b| self.contains((x + b) % self.n)))
    }

    pub fn negate(&self) -> SubsetZn {
        SubsetZn::from_pred(self.n, |x| self.contains((self.n - x) % self.n))
    }

    pub fn translate(&self, t: usize) -> SubsetZn {
        SubsetZn::from_pred(self.n, |x| self.contains((x + self.n - t % self.n) % self.n))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|x| self.contains(x) == self.contains((self.n - x) % self.n))
    }

    /// 0/1 indicator as a `GroupFn`.
    pub fn indicator(&self) -> GroupFn {
        GroupFn::from_fn(self.n, |x| {
            if self.contains(x) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}
