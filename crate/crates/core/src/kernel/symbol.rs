use std::f64::consts::PI;

use num_complex::Complex64;

use super::conv::fft_in_place;
use super::{Kernel, Scalar};
use crate::error::{Error, Result};

/// Samples of the Fourier symbol, `values[k] = sum_x K(x) exp(-2 pi i x k / n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolGrid {
    pub n: usize,
    pub values: Vec<Complex64>,
}

impl SymbolGrid {
    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }
}

/// Symbol of `K` on an `n`-point grid; `n` must be a power of two and at
/// least four times the support length.
pub fn symbol<T: Scalar>(k: &Kernel<T>, n: usize) -> Result<SymbolGrid> {
    let need = (4 * k.len()).max(4).next_power_of_two();
    if !n.is_power_of_two() || n < 4 * k.len().max(1) {
        return Err(Error::GridTooSmall {
            n,
            len: k.len(),
            need,
        });
    }
    Ok(symbol_unchecked(k, n))
}

pub(crate) fn symbol_unchecked<T: Scalar>(k: &Kernel<T>, n: usize) -> SymbolGrid {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let ni = n as i64;
    for (x, v) in k.iter() {
        buf[x.rem_euclid(ni) as usize] += v.to_c64();
    }
    fft_in_place(&mut buf, false);
    SymbolGrid { n, values: buf }
}

/// `K^(xi) = sum_x K(x) exp(-2 pi i x xi)` at a single frequency.
pub fn eval_symbol<T: Scalar>(k: &Kernel<T>, xi: f64) -> Complex64 {
    // phasor recurrence, re-anchored every block to bound drift
    const BLOCK: usize = 512;
    let step = Complex64::from_polar(1.0, -2.0 * PI * xi);
    let mut acc = Complex64::new(0.0, 0.0);
    for (b, chunk) in k.values().chunks(BLOCK).enumerate() {
        let x0 = k.base() + (b * BLOCK) as i64;
        let mut ph = Complex64::from_polar(1.0, -2.0 * PI * ((x0 as f64 * xi).fract()));
        for v in chunk {
            acc += v.to_c64() * ph;
            ph *= step;
        }
    }
    acc
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximiser of `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

const REFINE_ITERS: usize = 60;

fn oversampled_n(len: usize) -> usize {
    (8 * len).max(8).next_power_of_two()
}

/// The l2(Z) -> l2(Z) norm of convolution by `K`: the sup of the symbol's
/// modulus, found on an 8x oversampled grid and refined by golden section.
pub fn op_norm<T: Scalar>(k: &Kernel<T>) -> f64 {
    if k.is_zero() {
        return 0.0;
    }
    let grid = symbol_unchecked(k, oversampled_n(k.len()));
    let (kmax, vmax) = grid
        .values
        .iter()
        .enumerate()
        .map(|(i, z)| (i, z.norm()))
        .fold((0, f64::MIN), |acc, it| if it.1 > acc.1 { it } else { acc });
    let h = 1.0 / grid.n as f64;
    let xi = grid.frequency(kmax);
    let (_, refined) = golden_max(|t| eval_symbol(k, t).norm(), xi - h, xi + h, REFINE_ITERS);
    vmax.max(refined)
}

/// `min_xi |lam + beta K^(xi)|`, with the same grid-plus-refinement scheme.
pub fn min_shifted_modulus<T: Scalar>(
    k: &Kernel<T>,
    lam: Complex64,
    beta: Complex64,
    n: usize,
) -> f64 {
    if k.is_zero() {
        return lam.norm();
    }
    let grid = symbol_unchecked(k, n.max(oversampled_n(k.len())));
    let (kmin, vmin) = grid
        .values
        .iter()
        .enumerate()
        .map(|(i, z)| (i, (lam + beta * z).norm()))
        .fold((0, f64::MAX), |acc, it| if it.1 < acc.1 { it } else { acc });
    let h = 1.0 / grid.n as f64;
    let xi = grid.frequency(kmin);
    let (_, neg) = golden_max(
        |t| -(lam + beta * eval_symbol(k, t)).norm(),
        xi - h,
        xi + h,
        REFINE_ITERS,
    );
    vmin.min(-neg)
}
