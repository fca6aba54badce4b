use super::Kernel;
use crate::error::Result;
use crate::params::{check_dyadic, w, w_tilde, Mode, Params};

/// `[m^alpha]`, snapping to the nearest integer when `powf` lands within a few
/// ulps of it (perfect powers like `4^1.5`).
pub(crate) fn int_part_pow(m: u64, alpha: f64) -> (i64, f64) {
    let p = (m as f64).powf(alpha);
    let r = p.round();
    if (p - r).abs() <= 4.0 * f64::EPSILON * p {
        (r as i64, r)
    } else {
        (p.floor() as i64, p)
    }
}

/// The transform block of scale `s`:
/// `sum_{m>=1} phi(m^alpha / s) (delta_[m^alpha] - delta_-[m^alpha]) / m`
/// with `phi = w` for the first scale of a family and `w~` otherwise.
/// Colliding integer parts add up.
pub fn block_kernel(s: u64, params: &Params, first_scale: bool) -> Result<Kernel> {
    check_dyadic(s)?;
    Ok(block_kernel_alpha(s, params.alpha, first_scale))
}

pub(crate) fn block_kernel_alpha(s: u64, alpha: f64, first_scale: bool) -> Kernel {
    let sf = s as f64;
    let r = 2 * s as i64;
    let mut vals = vec![0.0; (2 * r + 1) as usize];
    let m_lo = if first_scale {
        1
    } else {
        ((sf / 2.0).powf(1.0 / alpha).floor() as u64).max(1)
    };
    let m_hi = (2.0 * sf).powf(1.0 / alpha).ceil() as u64 + 1;
    for m in m_lo..=m_hi {
        let (ip, p) = int_part_pow(m, alpha);
        let t = p / sf;
        let phi = if first_scale { w(t) } else { w_tilde(t) };
        if phi == 0.0 {
            continue;
        }
        let c = phi / m as f64;
        vals[(r + ip) as usize] += c;
        vals[(r - ip) as usize] -= c;
    }
    Kernel::new(-r, vals)
}

/// `H_M` together with its band parts.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub h: Kernel,
    /// Sum of the lower-band blocks (gap mode only).
    pub minus: Option<Kernel>,
    /// Sum of the upper-band blocks (gap mode only).
    pub plus: Option<Kernel>,
    pub scales: Vec<u64>,
    /// `max |x|` over `supp H`.
    pub radius: i64,
    /// `max |x|` over `supp H^-` (gap mode).
    pub minus_radius: Option<i64>,
    /// `min |x|` over `supp H^+` (gap mode).
    pub plus_inner_radius: Option<i64>,
}

/// Builds `H_M`. Every block carries the annular cutoff `w~`, so each block is
/// supported in `s/2 <= |x| < 2s`.
pub fn assemble(params: &Params) -> Result<Assembled> {
    let scales = params.scales().scales().to_vec();
    let sum = |list: &[u64]| {
        list.iter().fold(Kernel::zero(), |acc, &s| {
            acc.add(&block_kernel_alpha(s, params.alpha, false))
        })
    };
    match params.mode {
        Mode::Full => {
            let h = sum(&scales);
            Ok(Assembled {
                radius: h.radius(),
                h,
                minus: None,
                plus: None,
                scales,
                minus_radius: None,
                plus_inner_radius: None,
            })
        }
        Mode::Gap => {
            let minus = sum(params.lower_scales().scales());
            let plus = sum(params.upper_scales().scales());
            let h = minus.add(&plus);
            Ok(Assembled {
                radius: h.radius(),
                minus_radius: Some(minus.radius()),
                plus_inner_radius: plus.inner_radius(),
                h,
                minus: Some(minus),
                plus: Some(plus),
                scales,
            })
        }
    }
}

/// Smooth truncation of `K` at scale `s` within a family whose first scale is
/// `first`: `K w(x/s)` at the first scale and `K w~(x/s)` above it. With
/// `cumulative` the sum over `first..=s` is returned, which telescopes to
/// `K w(x/s)`.
pub fn truncate(k: &Kernel, s: u64, first: u64, cumulative: bool) -> Result<Kernel> {
    check_dyadic(s)?;
    check_dyadic(first)?;
    let sf = s as f64;
    if cumulative || s == first {
        Ok(k.mul_cutoff(|x| w(x as f64 / sf)))
    } else {
        Ok(k.mul_cutoff(|x| w_tilde(x as f64 / sf)))
    }
}
