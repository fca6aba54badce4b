use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{assemble, block_kernel, convolve, Kernel};
use crate::params::{check_dyadic, w_tilde, Mode, Params};

#[derive(Debug, Clone)]
pub struct CommutatorReport {
    pub s: u64,
    pub kernel: Kernel,
    /// `sum_x |C_s(x)|^2`.
    pub norm_sq: f64,
    pub mean: Complex64,
    /// `norm_sq * s^(1 + gamma)` at `gamma = 1/2`; bounded in `s` when the
    /// energy decay holds.
    pub scaled: f64,
}

/// `(h_s * inner) phi_s - (h_s phi_s) * inner` with `phi_s = w~(x/s)`.
pub fn commutator_with(h_s: &Kernel, inner: &Kernel, s: u64) -> Result<CommutatorReport> {
    check_dyadic(s)?;
    let sf = s as f64;
    let phi = |x: i64| w_tilde(x as f64 / sf);
    let a = convolve(h_s, inner)?.mul_cutoff(phi);
    let b = convolve(&h_s.mul_cutoff(phi), inner)?;
    let c = a.sub(&b);
    let norm_sq = c.l2_sq();
    Ok(CommutatorReport {
        s,
        mean: Complex64::new(c.mass(), 0.0),
        scaled: norm_sq * sf.powf(1.5),
        norm_sq,
        kernel: c,
    })
}

/// The commutator of the upper-band block at `s` with the lower-band
/// operator, in gap mode.
pub fn commutator(s: u64, params: &Params) -> Result<CommutatorReport> {
    check_dyadic(s)?;
    if params.mode != Mode::Gap {
        return Err(Error::InvalidParams("commutator needs gap mode".into()));
    }
    let (lo, hi) = params.upper_band();
    let sf = s as f64;
    if sf < lo * (1.0 - 1e-12) || sf > hi * (1.0 + 1e-12) {
        return Err(Error::OutsideUpperBand { s, lo, hi });
    }
    commutator_unchecked(s, params)
}

/// [`commutator`] without the band check, for sweeps past the upper band.
pub fn commutator_unchecked(s: u64, params: &Params) -> Result<CommutatorReport> {
    let asm = assemble(params)?;
    let inner = asm
        .minus
        .ok_or_else(|| Error::InvalidParams("commutator needs gap mode".into()))?;
    let h_s = block_kernel(s, params, false)?;
    commutator_with(&h_s, &inner, s)
}
