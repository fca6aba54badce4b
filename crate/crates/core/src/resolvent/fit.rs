use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::cz::{covering_grid, profile, CZKernelProfile};
use crate::error::{Error, Result};
use crate::kernel::{assemble, convolve, ComplexKernel, Kernel};
use crate::params::Params;

/// Gram systems with a larger 2-norm condition number are rejected.
pub const GRAM_COND_LIMIT: f64 = 1e12;

const NAMES: [&str; 3] = ["delta0", "H", "H2"];

/// `H` and `H * H` for one parameter set, with their Gram matrix.
#[derive(Debug, Clone)]
pub struct Basis {
    pub h: Kernel,
    pub h2: Kernel,
    h_c: ComplexKernel,
    h2_c: ComplexKernel,
    pub gram: Matrix3<f64>,
    pub gram_cond: f64,
    /// Lowest scale of the residual grid.
    pub lowest: u64,
    pub omega: f64,
}

impl Basis {
    pub fn new(params: &Params) -> Result<Self> {
        let h = assemble(params)?.h;
        Self::from_kernel(h, params.first_scale(), params.omega)
    }

    pub fn from_kernel(h: Kernel, lowest: u64, omega: f64) -> Result<Self> {
        let h2 = convolve(&h, &h)?;
        let h_h = h.l2_sq();
        let h2_h2 = h2.l2_sq();
        let h_h2 = h.inner(&h2).re;
        let d_h2 = h2.get(0);
        let d_h = h.get(0);
        let gram = Matrix3::new(1.0, d_h, d_h2, d_h, h_h, h_h2, d_h2, h_h2, h2_h2);
        let sv = gram.singular_values();
        let cond = sv.max() / sv.min();
        if !(cond <= GRAM_COND_LIMIT) {
            let mut worst = (0, 1, 0.0);
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let cos = (gram[(i, j)] / (gram[(i, i)] * gram[(j, j)]).sqrt()).abs();
                    let cos = if cos.is_nan() { 1.0 } else { cos };
                    if cos >= worst.2 {
                        worst = (i, j, cos);
                    }
                }
            }
            return Err(Error::IllConditioned {
                cond,
                pair: format!("{}/{}", NAMES[worst.0], NAMES[worst.1]),
            });
        }
        Ok(Basis {
            h_c: h.to_complex(),
            h2_c: h2.to_complex(),
            h,
            h2,
            gram,
            gram_cond: cond,
            lowest,
            omega,
        })
    }

    /// `lam delta_0 + beta H + gamma H^2`.
    pub fn combine(&self, lam: Complex64, beta: Complex64, gamma: Complex64) -> ComplexKernel {
        self.h_c
            .scale(beta)
            .add(&self.h2_c.scale(gamma))
            .add(&Kernel::delta(0).scale(lam))
    }
}

/// Coefficients read off at special points: `beta` from the `H` projection,
/// `gamma` from `H^2` away from the origin and `lam'` from the value at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMatch {
    pub lambda_prime: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

#[derive(Debug, Clone)]
pub struct ResolventExpansion {
    pub lambda_prime: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub residual: ComplexKernel,
    pub gram_cond: f64,
    pub residual_profile: CZKernelProfile<Complex64>,
    pub point_match: PointMatch,
    /// `H^2(0)`.
    pub h2_at_zero: f64,
}

impl ResolventExpansion {
    pub fn reconstruct(&self, basis: &Basis) -> ComplexKernel {
        basis
            .combine(self.lambda_prime, self.beta, self.gamma)
            .add(&self.residual)
    }
}

pub fn fit_expansion(r: &ComplexKernel, params: &Params) -> Result<ResolventExpansion> {
    fit_expansion_with(r, &Basis::new(params)?)
}

/// Least-squares fit of `r` on `{delta_0, H, H^2}` followed by the CZ
/// profile of the residual.
pub fn fit_expansion_with(r: &ComplexKernel, basis: &Basis) -> Result<ResolventExpansion> {
    let rhs = [r.get(0), r.inner(&basis.h_c), r.inner(&basis.h2_c)];
    let lu = basis.gram.lu();
    let solve = |part: fn(&Complex64) -> f64| {
        lu.solve(&Vector3::new(part(&rhs[0]), part(&rhs[1]), part(&rhs[2])))
            .ok_or_else(|| Error::Internal("singular Gram matrix".into()))
    };
    let re = solve(|z| z.re)?;
    let im = solve(|z| z.im)?;
    let coeff = |i: usize| Complex64::new(re[i], im[i]);
    let (lambda_prime, beta, gamma) = (coeff(0), coeff(1), coeff(2));
    let residual = r.sub(&basis.combine(lambda_prime, beta, gamma));

    let h2_at_zero = basis.h2.get(0);
    let pm_beta = rhs[1] / basis.gram[(1, 1)];
    let off: f64 = basis.gram[(2, 2)] - h2_at_zero * h2_at_zero;
    let pm_gamma = if off > 0.0 {
        (rhs[2] - r.get(0) * h2_at_zero) / off
    } else {
        Complex64::new(0.0, 0.0)
    };
    let point_match = PointMatch {
        lambda_prime: r.get(0) - pm_gamma * h2_at_zero - pm_beta * basis.h.get(0),
        beta: pm_beta,
        gamma: pm_gamma,
    };

    let grid = covering_grid(basis.lowest, residual.radius());
    let residual_profile = profile(&residual, &grid, basis.omega)?;
    Ok(ResolventExpansion {
        lambda_prime,
        beta,
        gamma,
        residual,
        gram_cond: basis.gram_cond,
        residual_profile,
        point_match,
        h2_at_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{validate, Mode, RawParams};
    use crate::resolvent::neumann_of;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn basis(m: u64) -> Basis {
        Basis::new(&validate(&RawParams::new(1.5, 0.05, m, Mode::Gap)).unwrap()).unwrap()
    }

    #[test]
    fn exact_basis_element() {
        let b = basis(1 << 10);
        let r = b.combine(c(2.0), c(3.0), c(0.0));
        let e = fit_expansion_with(&r, &b).unwrap();
        assert!((e.lambda_prime - c(2.0)).norm() < 1e-12);
        assert!((e.beta - c(3.0)).norm() < 1e-12);
        assert!(e.gamma.norm() < 1e-12);
        assert!(e.residual.max_abs() < 1e-12);
        assert!((e.point_match.beta - c(3.0)).norm() < 1e-12);
        assert!((e.point_match.lambda_prime - c(2.0)).norm() < 1e-12);
    }

    #[test]
    fn neumann_second_order_coefficients() {
        let b = basis(1 << 10);
        let lam = c(5.0);
        let r = neumann_of(lam, c(1.0), &b.h, 2).unwrap();
        let e = fit_expansion_with(&r, &b).unwrap();
        assert!((e.lambda_prime - lam.inv()).norm() < 1e-10);
        assert!((e.beta + lam.powi(-2)).norm() < 1e-10);
        assert!((e.gamma - lam.powi(-3)).norm() < 1e-10);
        assert!(e.residual.max_abs() < 1e-10);
    }

    #[test]
    fn fit_is_a_projection() {
        let b = basis(1 << 8);
        let noise = Kernel::from_fn(-40, 40, |x| c(((x * 7919) % 13) as f64 * 1e-3));
        let r = b.combine(c(0.7), c(-0.2), c(0.1)).add(&noise);
        let e = fit_expansion_with(&r, &b).unwrap();
        let again = fit_expansion_with(&e.reconstruct(&b), &b).unwrap();
        assert!((again.lambda_prime - e.lambda_prime).norm() < 1e-12);
        assert!((again.beta - e.beta).norm() < 1e-12);
        assert!((again.gamma - e.gamma).norm() < 1e-12);
        // the residual is orthogonal to the basis
        assert!(e.residual.get(0).norm() < 1e-12);
        assert!(e.residual.inner(&b.h2_c).norm() < 1e-12);
        assert!(e.residual.inner(&b.h_c).norm() < 1e-12);
    }

    #[test]
    fn collinear_basis_rejected() {
        let err = Basis::from_kernel(Kernel::delta(1).sub(&Kernel::delta(-1)).scale_f64(0.0), 2, 0.5);
        assert!(matches!(err, Err(Error::IllConditioned { .. })));
    }
}
