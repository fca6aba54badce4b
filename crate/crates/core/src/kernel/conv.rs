use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{Kernel, Scalar};
use crate::error::{Error, Result};
use crate::params::MAX_KERNEL_POINTS;

/// Convolutions where the shorter operand has at most this many points are
/// summed directly.
pub const DIRECT_THRESHOLD: usize = 64;

// Sparse direct summation wins over a padded FFT when the product of the
// nonzero counts is below this multiple of `n log2 n`.
const SPARSE_COST_FACTOR: f64 = 8.0;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        let plan = if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        };
        plan.process(buf);
    });
}

/// Exact linear convolution `(K * L)(x) = sum_y K(y) L(x - y)`.
pub fn convolve<T: Scalar>(k: &Kernel<T>, l: &Kernel<T>) -> Result<Kernel<T>> {
    if k.is_zero() || l.is_zero() {
        return Ok(Kernel::zero());
    }
    let out_len = k.len() + l.len() - 1;
    if out_len as u64 > MAX_KERNEL_POINTS {
        return Err(Error::Resource(format!(
            "convolution support of {out_len} points exceeds {MAX_KERNEL_POINTS}"
        )));
    }
    let base = k.base() + l.base();
    let values = if k.len().min(l.len()) <= DIRECT_THRESHOLD {
        direct(k.values(), l.values())
    } else {
        let nk = nonzeros(k.values());
        let nl = nonzeros(l.values());
        let n = out_len.next_power_of_two() as f64;
        if (nk as f64) * (nl as f64) <= SPARSE_COST_FACTOR * n * n.log2() {
            sparse_direct(k.values(), l.values())
        } else {
            T::fft_convolve(k.values(), l.values())
        }
    };
    // both end values are products of nonzero ends, so nothing is lost by
    // trimming FFT round-off at the edges
    Ok(Kernel::new(base, values))
}

/// Direct-summation convolution, regardless of size.
pub fn convolve_direct<T: Scalar>(k: &Kernel<T>, l: &Kernel<T>) -> Kernel<T> {
    if k.is_zero() || l.is_zero() {
        return Kernel::zero();
    }
    Kernel::new(k.base() + l.base(), direct(k.values(), l.values()))
}

/// `K * f` for a finitely supported sequence `f`.
pub fn apply<T: Scalar>(k: &Kernel<T>, f: &Kernel<T>) -> Result<Kernel<T>> {
    convolve(k, f)
}

fn direct<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let (a, b) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == T::zero() {
            continue;
        }
        for (o, &bj) in out[i..].iter_mut().zip(b) {
            *o += ai * bj;
        }
    }
    out
}

fn nonzeros<T: Scalar>(a: &[T]) -> usize {
    a.iter().filter(|v| **v != T::zero()).count()
}

fn sparse_direct<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let z = T::zero();
    let nz_b: Vec<(usize, T)> = b
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != z)
        .map(|(j, v)| (j, *v))
        .collect();
    let mut out = vec![z; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == z {
            continue;
        }
        for &(j, bj) in &nz_b {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub(crate) fn fft_convolve_complex<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut fa = vec![Complex64::new(0.0, 0.0); n];
    let mut fb = fa.clone();
    for (d, s) in fa.iter_mut().zip(a) {
        *d = s.to_c64();
    }
    for (d, s) in fb.iter_mut().zip(b) {
        *d = s.to_c64();
    }
    fft_in_place(&mut fa, false);
    fft_in_place(&mut fb, false);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    fft_in_place(&mut fa, true);
    let scale = 1.0 / n as f64;
    fa[..out_len]
        .iter()
        .map(|z| T::from_c64(*z * scale))
        .collect()
}

/// Real operands share one forward transform: `z = a + i b`.
pub(crate) fn fft_convolve_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for (d, &s) in z.iter_mut().zip(a) {
        d.re = s;
    }
    for (d, &s) in z.iter_mut().zip(b) {
        d.im = s;
    }
    fft_in_place(&mut z, false);
    let mut prod = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let zk = z[k];
        let zc = z[(n - k) % n].conj();
        let fa = (zk + zc) * 0.5;
        let fb = (zk - zc) * Complex64::new(0.0, -0.5);
        prod[k] = fa * fb;
    }
    fft_in_place(&mut prod, true);
    let scale = 1.0 / n as f64;
    prod[..out_len].iter().map(|c| c.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::ComplexKernel;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_kernel(seed: &mut u64, base: i64, len: usize) -> Kernel {
        Kernel::new(base, (0..len).map(|_| lcg(seed)).collect())
    }

    #[test]
    fn identity_and_shifts() {
        let k = Kernel::new(-2, vec![1.0, -3.0, 0.5]);
        assert_eq!(convolve(&Kernel::delta(0), &k).unwrap(), k);
        let ab = convolve(&Kernel::<f64>::delta(3), &Kernel::delta(-7)).unwrap();
        assert_eq!(ab, Kernel::delta(-4));
        let f = Kernel::new(0, vec![1.0, 2.0, 3.0]);
        let shifted = apply(&Kernel::delta(1), &f).unwrap();
        for x in -1..5 {
            assert_eq!(shifted.get(x), f.get(x - 1));
        }
    }

    #[test]
    fn fft_path_matches_direct_summation() {
        let mut seed = 7;
        for &(la, lb) in &[(65, 65), (100, 300), (513, 70), (1000, 1000)] {
            let a = random_kernel(&mut seed, -(la as i64) / 2, la);
            let b = random_kernel(&mut seed, 5, lb);
            let fast = convolve(&a, &b).unwrap();
            let slow = convolve_direct(&a, &b);
            let tol = 1e-12 * a.l1() * b.l1();
            assert!(fast.max_abs_diff(&slow) <= tol, "{la}x{lb}");
            assert_eq!(fast.support(), slow.support());
        }
    }

    #[test]
    fn sparse_operands_stay_exact() {
        // two sparse combs: the FFT would leave round-off between the teeth
        let a = Kernel::from_fn(0, 4000, |x| if x % 97 == 0 { 1.0 / (1 + x) as f64 } else { 0.0 });
        let b = Kernel::from_fn(-3000, 3000, |x| if x % 89 == 0 { x as f64 } else { 0.0 });
        let c = convolve(&a, &b).unwrap();
        let d = convolve_direct(&a, &b);
        assert_eq!(c, d);
    }

    #[test]
    fn complex_fft_path_matches_direct() {
        let mut seed = 11;
        let a: ComplexKernel = Kernel::new(
            -40,
            (0..90).map(|_| Complex64::new(lcg(&mut seed), lcg(&mut seed))).collect(),
        );
        let b: ComplexKernel = Kernel::new(
            3,
            (0..120).map(|_| Complex64::new(lcg(&mut seed), lcg(&mut seed))).collect(),
        );
        let fast = convolve(&a, &b).unwrap();
        let slow = convolve_direct(&a, &b);
        assert!(fast.max_abs_diff(&slow) <= 1e-12 * a.l1() * b.l1());
    }
}
