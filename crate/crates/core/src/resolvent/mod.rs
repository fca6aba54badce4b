//! Resolvents of `lam + beta H` by symbol inversion, the Neumann series,
//! the expansion `lam' + beta H + gamma H^2 + K` and its algebra norm.

mod algebra;
mod asymptotics;
mod fit;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{
    assemble, convolve, fft_in_place, min_shifted_modulus, symbol_unchecked, ComplexKernel, Kernel,
};
use crate::params::Params;

pub use algebra::{
    algebra_norm, algebra_product, random_block, random_element, AlgebraElement, AlgebraProduct,
};
pub use asymptotics::{asymptotics_row, asymptotics_sweep, AsymptoticsRow};
pub use fit::{
    fit_expansion, fit_expansion_with, Basis, PointMatch, ResolventExpansion, GRAM_COND_LIMIT,
};

/// Default lower bound on the margin before a resolvent is attempted.
pub const DEFAULT_MARGIN_TOL: f64 = 1e-3;
/// Allowed `max |R_N - R_2N|` relative to `max |R|`.
pub const ALIASING_TOL: f64 = 1e-9;
/// Ends of the resolvent window below this fraction of `max |R|` are dropped.
pub const TRUNCATION_REL: f64 = 1e-13;

/// Smallest power of two at least 16 times the support length of `h`.
pub fn default_grid(h: &Kernel) -> usize {
    (16 * h.len()).max(16).next_power_of_two()
}

/// `min_xi |lam + symbol(H)(xi)|`; `n` must be at least 8 support lengths.
pub fn resolvent_set_margin(lam: Complex64, params: &Params, n: usize) -> Result<f64> {
    let h = assemble(params)?.h;
    margin_of(lam, Complex64::new(1.0, 0.0), &h, n)
}

/// `min_xi |lam + beta K^(xi)|` on an `n`-point grid with refinement.
pub fn margin_of(lam: Complex64, beta: Complex64, k: &Kernel, n: usize) -> Result<f64> {
    if n < 8 * k.len() {
        return Err(Error::GridTooSmall {
            n,
            len: k.len(),
            need: (8 * k.len()).next_power_of_two(),
        });
    }
    Ok(min_shifted_modulus(k, lam, beta, n))
}

#[derive(Debug, Clone)]
pub struct Resolvent {
    pub kernel: ComplexKernel,
    pub n: usize,
    pub margin: f64,
    /// `max |R_N - R_2N|` before truncation.
    pub aliasing_diff: f64,
    /// l1 mass removed by the window truncation.
    pub truncated_mass: f64,
}

fn invert_on_grid(lam: Complex64, beta: Complex64, k: &Kernel, n: usize) -> Vec<Complex64> {
    let mut buf = symbol_unchecked(k, n).values;
    for z in buf.iter_mut() {
        *z = (lam + beta * *z).inv();
    }
    fft_in_place(&mut buf, true);
    let scale = 1.0 / n as f64;
    for z in buf.iter_mut() {
        *z *= scale;
    }
    buf
}

// Index `x` in `[-n/2, n/2)` of a cyclic buffer.
fn cyclic(buf: &[Complex64], x: i64) -> Complex64 {
    let n = buf.len() as i64;
    if x < -n / 2 || x >= n / 2 {
        Complex64::new(0.0, 0.0)
    } else {
        buf[x.rem_euclid(n) as usize]
    }
}

/// The kernel of `(lam + beta K)^-1` from an `n`-point inverse transform,
/// checked against the `2n`-point transform.
pub fn resolvent_of(
    lam: Complex64,
    beta: Complex64,
    k: &Kernel,
    n: usize,
    margin_tol: f64,
) -> Result<Resolvent> {
    if !n.is_power_of_two() || n < 4 * k.len().max(1) {
        return Err(Error::GridTooSmall {
            n,
            len: k.len(),
            need: (4 * k.len().max(1)).next_power_of_two(),
        });
    }
    let margin = min_shifted_modulus(k, lam, beta, n);
    if margin < margin_tol {
        return Err(Error::MarginTooSmall {
            margin,
            tol: margin_tol,
        });
    }
    let coarse = invert_on_grid(lam, beta, k, n);
    let fine = invert_on_grid(lam, beta, k, 2 * n);
    let half = n as i64;
    let mut diff: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for x in -half..half {
        let a = cyclic(&coarse, x);
        peak = peak.max(a.norm());
        diff = diff.max((a - cyclic(&fine, x)).norm());
    }
    if diff > ALIASING_TOL * peak {
        return Err(Error::Aliasing {
            n,
            diff,
            tol: ALIASING_TOL * peak,
        });
    }
    let h = half / 2;
    let raw = Kernel::new(-h, (-h..h).map(|x| cyclic(&coarse, x)).collect());
    let (kernel, truncated_mass) = raw.truncate_relative(TRUNCATION_REL);
    Ok(Resolvent {
        kernel,
        n,
        margin,
        aliasing_diff: diff,
        truncated_mass,
    })
}

/// The resolvent kernel of `lam + H_M`; `n` defaults to [`default_grid`].
pub fn resolvent_kernel(lam: Complex64, params: &Params, n: Option<usize>) -> Result<Resolvent> {
    let h = assemble(params)?.h;
    let n = n.unwrap_or_else(|| default_grid(&h));
    resolvent_of(lam, Complex64::new(1.0, 0.0), &h, n, DEFAULT_MARGIN_TOL)
}

/// `max_x |((lam + beta K) * R)(x) - delta_0(x)|`.
pub fn identity_defect(lam: Complex64, beta: Complex64, k: &Kernel, r: &ComplexKernel) -> Result<f64> {
    let op = k.to_complex().scale(beta).add(&Kernel::delta(0).scale(lam));
    let prod = convolve(&op, r)?;
    Ok(prod.sub(&Kernel::delta(0)).max_abs())
}

/// `sum_{j <= order} (-beta)^j lam^(-j-1) K^{*j}`.
pub fn neumann_of(lam: Complex64, beta: Complex64, k: &Kernel, order: usize) -> Result<ComplexKernel> {
    let kc = k.to_complex();
    let inv = lam.inv();
    let mut power: ComplexKernel = Kernel::delta(0);
    let mut coeff = inv;
    let mut acc = power.scale(coeff);
    for _ in 0..order {
        power = convolve(&power, &kc)?;
        coeff *= -beta * inv;
        acc = acc.add(&power.scale(coeff));
    }
    Ok(acc)
}

pub fn neumann_kernel(lam: Complex64, params: &Params, order: usize) -> Result<ComplexKernel> {
    let h = assemble(params)?.h;
    neumann_of(lam, Complex64::new(1.0, 0.0), &h, order)
}

/// Tail bound of the order-`order` Neumann series for `|lam| > norm`.
pub fn neumann_tail_bound(lam: Complex64, norm: f64, order: usize) -> f64 {
    let q = norm / lam.norm();
    q.powi(order as i32 + 1) / (1.0 - q) / lam.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::op_norm;
    use crate::params::{validate, Mode, RawParams};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn desk(m: u64) -> Params {
        validate(&RawParams::new(1.5, 0.05, m, Mode::Gap)).unwrap()
    }

    #[test]
    fn margin_of_real_lambda() {
        let p = desk(1 << 12);
        let h = assemble(&p).unwrap().h;
        let n = default_grid(&h);
        let m = resolvent_set_margin(c(1.0), &p, n).unwrap();
        assert!((m - 1.0).abs() < 1e-12, "{m}");
        assert!(resolvent_set_margin(c(0.0), &p, n).unwrap() < 1e-12);
        assert!(resolvent_set_margin(c(-2.5), &p, n).unwrap() >= 2.5 - 1e-12);
        assert!(resolvent_set_margin(c(1.0), &p, 16).is_err());
    }

    #[test]
    fn zero_kernel_inverts_to_point_mass() {
        let r = resolvent_of(c(2.0), c(1.0), &Kernel::zero(), 16, 1e-3).unwrap();
        assert_eq!(r.kernel.len(), 1);
        assert!((r.kernel.get(0) - c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn defining_identity_and_neumann_agree() {
        let p = desk(1 << 10);
        let h = assemble(&p).unwrap().h;
        let r = resolvent_kernel(c(1.0), &p, None).unwrap();
        assert!(identity_defect(c(1.0), c(1.0), &h, &r.kernel).unwrap() <= 1e-8);
        let norm = op_norm(&h);
        let lam = c(4.0 * norm);
        let r = resolvent_kernel(lam, &p, None).unwrap();
        let ns = neumann_of(lam, c(1.0), &h, 8).unwrap();
        let bound = neumann_tail_bound(lam, norm, 8) + 1e-9;
        assert!(r.kernel.max_abs_diff(&ns) <= bound);
    }

    #[test]
    fn complex_lambda_identity() {
        let p = desk(1 << 8);
        let h = assemble(&p).unwrap().h;
        let lam = Complex64::new(0.3, 0.7);
        // margin 0.3: the default grid aliases, a finer one does not
        let n = default_grid(&h);
        let err = resolvent_of(lam, c(1.0), &h, n, 1e-3).unwrap_err();
        assert!(matches!(err, Error::Aliasing { .. }));
        let r = resolvent_of(lam, c(1.0), &h, 8 * n, 1e-3).unwrap();
        assert!((r.margin - 0.3).abs() < 1e-9);
        assert!(identity_defect(lam, c(1.0), &h, &r.kernel).unwrap() <= 1e-8);
    }

    #[test]
    fn small_margin_rejected() {
        let p = desk(1 << 8);
        let h = assemble(&p).unwrap().h;
        let err = resolvent_of(c(0.0), c(1.0), &h, default_grid(&h), 1e-3).unwrap_err();
        assert!(matches!(err, Error::MarginTooSmall { .. }));
    }

    #[test]
    fn neumann_low_orders() {
        let p = desk(1 << 8);
        let h = assemble(&p).unwrap().h;
        let lam = c(3.0);
        assert_eq!(neumann_of(lam, c(1.0), &h, 0).unwrap(), Kernel::delta(0).scale(c(1.0 / 3.0)));
        let two = neumann_of(lam, c(1.0), &h, 2).unwrap();
        let h2 = convolve(&h, &h).unwrap().to_complex();
        let want = Kernel::delta(0)
            .scale(c(1.0 / 3.0))
            .add(&h.to_complex().scale(c(-1.0 / 9.0)))
            .add(&h2.scale(c(1.0 / 27.0)));
        assert!(two.max_abs_diff(&want) < 1e-15);
    }
}
