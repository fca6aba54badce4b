//! Finitely supported kernels on the integers and the operators built from them.

mod blocks;
mod conv;
pub mod io;
mod symbol;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

pub use blocks::{assemble, block_kernel, truncate, Assembled};
pub use conv::{apply, convolve, convolve_direct, DIRECT_THRESHOLD};
pub use symbol::{eval_symbol, min_shifted_modulus, op_norm, symbol, SymbolGrid};
pub(crate) use conv::fft_in_place;
pub(crate) use symbol::symbol_unchecked;

/// Real or complex kernel values.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Zero
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn to_c64(self) -> Complex64;
    /// Keeps the real part when `Self` is real.
    fn from_c64(z: Complex64) -> Self;
    fn norm_sqr(self) -> f64;
    fn mul_f64(self, x: f64) -> Self;

    fn modulus(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Cyclic-free linear convolution through a padded FFT.
    fn fft_convolve(a: &[Self], b: &[Self]) -> Vec<Self> {
        conv::fft_convolve_complex(a, b)
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z.re
    }
    fn norm_sqr(self) -> f64 {
        self * self
    }
    fn mul_f64(self, x: f64) -> Self {
        self * x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn fft_convolve(a: &[Self], b: &[Self]) -> Vec<Self> {
        conv::fft_convolve_real(a, b)
    }
}

impl Scalar for Complex64 {
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn to_c64(self) -> Complex64 {
        self
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    fn mul_f64(self, x: f64) -> Self {
        self * x
    }
}

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `(s, e)` with `s = fl(a + b)` and `s + e = a + b` exactly.
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// The correctly rounded sum of `xs`, kept exact in Shewchuk partials until
/// the final rounding (round half to even).
pub fn exact_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in xs {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        n -= 1;
        let x = hi;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    // the remaining partials decide ties in the last rounding
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if x - hi == y {
            hi = x;
        }
    }
    hi
}

/// A finitely supported sequence on the integers, stored densely on
/// `[base, base + len - 1]`. Both ends of the window are nonzero; the zero
/// kernel has an empty window.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<T: Scalar = f64> {
    base: i64,
    values: Vec<T>,
}

pub type ComplexKernel = Kernel<Complex64>;

impl<T: Scalar> Default for Kernel<T> {
    fn default() -> Self {
        Kernel::zero()
    }
}

impl<T: Scalar> Kernel<T> {
    pub fn new(base: i64, values: Vec<T>) -> Self {
        let mut k = Kernel { base, values };
        k.trim();
        k
    }

    pub fn zero() -> Self {
        Kernel {
            base: 0,
            values: Vec::new(),
        }
    }

    /// Unit mass at `a`.
    pub fn delta(a: i64) -> Self {
        Kernel {
            base: a,
            values: vec![T::from_f64(1.0)],
        }
    }

    /// Samples `f` on `lo..=hi`.
    pub fn from_fn(lo: i64, hi: i64, f: impl FnMut(i64) -> T) -> Self {
        if hi < lo {
            return Kernel::zero();
        }
        Kernel::new(lo, (lo..=hi).map(f).collect())
    }

    fn trim(&mut self) {
        let z = T::zero();
        let first = self.values.iter().position(|v| *v != z);
        match first {
            None => {
                self.values.clear();
                self.base = 0;
            }
            Some(i) => {
                let last = self.values.iter().rposition(|v| *v != z).unwrap();
                self.values.truncate(last + 1);
                if i > 0 {
                    self.values.drain(..i);
                    self.base += i as i64;
                }
            }
        }
    }

    pub fn base(&self) -> i64 {
        self.base
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Inclusive support window, `None` for the zero kernel.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.values.is_empty() {
            None
        } else {
            Some((self.base, self.base + self.values.len() as i64 - 1))
        }
    }

    /// `max |x|` over the window, 0 for the zero kernel.
    pub fn radius(&self) -> i64 {
        self.support().map_or(0, |(lo, hi)| lo.abs().max(hi.abs()))
    }

    /// Smallest `|x|` with a nonzero value.
    pub fn inner_radius(&self) -> Option<i64> {
        let z = T::zero();
        self.iter().filter(|(_, v)| *v != z).map(|(x, _)| x.abs()).min()
    }

    pub fn get(&self, x: i64) -> T {
        let i = x - self.base;
        if i < 0 || i >= self.values.len() as i64 {
            T::zero()
        } else {
            self.values[i as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, T)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (self.base + i as i64, *v))
    }

    /// `sum_x K(x)`, with compensated summation.
    pub fn mass(&self) -> T {
        let mut re = Neumaier::default();
        let mut im = Neumaier::default();
        for v in &self.values {
            let z = v.to_c64();
            re.add(z.re);
            im.add(z.im);
        }
        T::from_c64(Complex64::new(re.total(), im.total()))
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).sum()
    }

    pub fn l2_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn l2(&self) -> f64 {
        self.l2_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: T) -> Self {
        Kernel::new(self.base, self.values.iter().map(|v| *v * c).collect())
    }

    pub fn scale_f64(&self, c: f64) -> Self {
        Kernel::new(self.base, self.values.iter().map(|v| v.mul_f64(c)).collect())
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let (a, b) = match (self.support(), other.support()) {
            (None, None) => return Kernel::zero(),
            (None, Some(_)) => return other.scale_f64(sign),
            (Some(_), None) => return self.clone(),
            (Some(a), Some(b)) => (a, b),
        };
        let lo = a.0.min(b.0);
        let hi = a.1.max(b.1);
        let mut vals = vec![T::zero(); (hi - lo + 1) as usize];
        for (x, v) in self.iter() {
            vals[(x - lo) as usize] += v;
        }
        for (x, v) in other.iter() {
            vals[(x - lo) as usize] += v.mul_f64(sign);
        }
        Kernel::new(lo, vals)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Self, c: T) -> Self {
        self.add(&other.scale(c))
    }

    /// Pointwise product with a real cutoff.
    pub fn mul_cutoff(&self, phi: impl Fn(i64) -> f64) -> Self {
        Kernel::new(
            self.base,
            self.iter().map(|(x, v)| v.mul_f64(phi(x))).collect(),
        )
    }

    /// Restriction to the points where `keep(x)` holds.
    pub fn restrict(&self, keep: impl Fn(i64) -> bool) -> Self {
        Kernel::new(
            self.base,
            self.iter()
                .map(|(x, v)| if keep(x) { v } else { T::zero() })
                .collect(),
        )
    }

    /// `x -> K(-x)`.
    pub fn reflect(&self) -> Self {
        match self.support() {
            None => Kernel::zero(),
            Some((_, hi)) => Kernel::new(-hi, self.values.iter().rev().copied().collect()),
        }
    }

    /// `x -> K(x + h)`.
    pub fn shift(&self, h: i64) -> Self {
        Kernel {
            base: self.base - h,
            values: self.values.clone(),
        }
    }

    /// Drops the ends where `|K| < rel * max|K|`; returns the dropped mass in l1.
    pub fn truncate_relative(&self, rel: f64) -> (Self, f64) {
        let cut = rel * self.max_abs();
        let first = self.values.iter().position(|v| v.modulus() >= cut);
        let Some(i) = first else {
            return (Kernel::zero(), self.l1());
        };
        let j = self.values.iter().rposition(|v| v.modulus() >= cut).unwrap();
        let dropped: f64 = self.values[..i]
            .iter()
            .chain(&self.values[j + 1..])
            .map(|v| v.modulus())
            .sum();
        (
            Kernel::new(self.base + i as i64, self.values[i..=j].to_vec()),
            dropped,
        )
    }

    /// `max_x |K(x) - L(x)|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    /// Real inner product `sum_x K(x) conj(L(x))`, returned as complex.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let mut acc = Complex64::zero();
        for (x, v) in self.iter() {
            let u = other.get(x);
            acc += v.to_c64() * u.to_c64().conj();
        }
        acc
    }

    pub fn to_complex(&self) -> ComplexKernel {
        Kernel {
            base: self.base,
            values: self.values.iter().map(|v| v.to_c64()).collect(),
        }
    }

    /// Maximal deviation from oddness, `max_x |K(x) + K(-x)|`.
    pub fn oddness_defect(&self) -> f64 {
        self.add(&self.reflect()).max_abs()
    }
}

impl ComplexKernel {
    pub fn re(&self) -> Kernel {
        Kernel::new(self.base, self.values.iter().map(|z| z.re).collect())
    }
    pub fn im(&self) -> Kernel {
        Kernel::new(self.base, self.values.iter().map(|z| z.im).collect())
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn exact_sum_examples() {
        assert_eq!(exact_sum([1e16, 1.0, -1e16]), 1.0);
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum([1.0, 1e100, 1.0, -1e100]), 2.0);
        assert_eq!(exact_sum(std::iter::empty()), 0.0);
        // 1 + 2^-53 + 2^-106 rounds up, 1 + 2^-53 alone ties to even
        let t = 2f64.powi(-53);
        assert_eq!(exact_sum([1.0, t, t * t]), 1.0 + 2.0 * t);
        assert_eq!(exact_sum([1.0, t]), 1.0);
        let (s, e) = two_sum(1.0, t);
        assert_eq!((s, e), (1.0, t));
    }

    use super::*;

    #[test]
    fn trimming_and_support() {
        let k = Kernel::new(-3, vec![0.0, 0.0, 1.0, 0.0, -2.0, 0.0]);
        assert_eq!(k.support(), Some((-1, 1)));
        assert_eq!(k.get(0), 0.0);
        assert_eq!(k.get(1), -2.0);
        assert_eq!(k.radius(), 1);
        assert!(Kernel::<f64>::new(5, vec![0.0; 4]).is_zero());
    }

    #[test]
    fn add_sub_reflect() {
        let a = Kernel::new(0, vec![1.0, 2.0]);
        let b = Kernel::new(-1, vec![3.0]);
        let s = a.add(&b);
        assert_eq!(s.support(), Some((-1, 1)));
        assert_eq!(s.get(-1), 3.0);
        assert!(s.sub(&s).is_zero());
        let r = a.reflect();
        assert_eq!(r.get(-1), 2.0);
        assert_eq!(r.get(0), 1.0);
    }

    #[test]
    fn relative_truncation_reports_mass() {
        let k = Kernel::new(0, vec![1e-20, 1.0, 0.5, 1e-15]);
        let (t, dropped) = k.truncate_relative(1e-13);
        assert_eq!(t.support(), Some((1, 2)));
        assert!((dropped - (1e-20 + 1e-15)).abs() < 1e-30);
    }
}
