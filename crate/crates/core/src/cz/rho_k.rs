use crate::error::{Error, Result};
use crate::kernel::{block_kernel, convolve, Kernel};
use crate::params::{check_dyadic, Params};

#[derive(Debug, Clone)]
pub struct RhoKSplit {
    pub s1: u64,
    pub s2: u64,
    pub rho: Kernel,
    pub k: Kernel,
    /// `P(0)` when `s1 == s2`, else 0.
    pub diag: f64,
    /// Half-width of the window assigned to `k`.
    pub window: f64,
    /// `sup |rho| * s2`.
    pub c_rho: f64,
    /// `sup |k| * s2`.
    pub c_k: f64,
    /// `sup_h sup_x |rho(x+h) - rho(x)| * s2 * (s2/h)^gamma` over dyadic `h <= s2`.
    pub c_holder: f64,
    /// `radius(rho) / s2`.
    pub c_support: f64,
}

/// Splits `P = H_{s1} * H_{s2}` into the diagonal point mass, the part `k`
/// near the origin and the smooth remainder `rho`.
pub fn rho_k_split(s1: u64, s2: u64, params: &Params) -> Result<RhoKSplit> {
    check_dyadic(s1)?;
    check_dyadic(s2)?;
    if s1 > s2 {
        return Err(Error::Ordering { s1, s2 });
    }
    let lo = crate::params::pow_m(params.m, params.theta);
    if (s1 as f64) < lo * (1.0 - 1e-12) || s2 > params.m {
        return Err(Error::InvalidParams(format!(
            "scales must satisfy M^theta <= s1 <= s2 <= M, got s1 = {s1}, s2 = {s2}"
        )));
    }
    let a = block_kernel(s1, params, false)?;
    let b = block_kernel(s2, params, false)?;
    let mut p = convolve(&a, &b)?;
    let mut diag = 0.0;
    if s1 == s2 {
        diag = p.get(0);
        p = p.restrict(|x| x != 0);
    }
    let s2f = s2 as f64;
    let window = params.c_split * s2f.powf(1.0 - 1.0 / params.alpha + params.delta);
    let k = p.restrict(|x| (x.abs() as f64) <= window);
    let rho = p.restrict(|x| (x.abs() as f64) > window);

    let gamma = params.gamma_resc;
    let mut holder: f64 = 0.0;
    let mut h = 1u64;
    while h <= s2 && !rho.is_zero() {
        let d = rho.shift(h as i64).max_abs_diff(&rho);
        holder = holder.max(d * s2f * (s2f / h as f64).powf(gamma));
        h *= 2;
    }
    Ok(RhoKSplit {
        s1,
        s2,
        diag,
        window,
        c_rho: rho.max_abs() * s2f,
        c_k: k.max_abs() * s2f,
        c_holder: holder,
        c_support: rho.radius() as f64 / s2f,
        rho,
        k,
    })
}
