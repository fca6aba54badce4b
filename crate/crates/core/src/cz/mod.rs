//! Calderon-Zygmund building blocks: axiom checks, canonical re-blocking of
//! arbitrary kernels, commutators and the split of block products.
//!
//! A kernel `K` is a building block of dyadic scale `s` with constant `D` when
//!
//! * (i) `sum_x K(x) = 0`,
//! * (ii) `supp K` lies in `[-s, s]`,
//! * (iii) `sum_x |K(x)|^2 <= D^2 / s`,
//! * (iv) `sum_x |K(x+h) - K(x)|^2 <= (D^2 / s) (|h|/s)^omega`.
//!
//! (iv) is tested on the dyadic shifts `h = 1, 2, 4, .., s`; the difference
//! sum is symmetric in the sign of `h`.

mod commutator;
mod rho_k;
mod telescope;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, Scalar};
use crate::params::{check_dyadic, ScaleGrid};

pub use commutator::{commutator, commutator_unchecked, commutator_with, CommutatorReport};
pub use rho_k::{rho_k_split, RhoKSplit};
pub use telescope::{
    averaging_defect, telescope, window_decompose, AveragingDefect, Telescoped, AVERAGING_E,
};

/// Relative tolerance for mean-freedom, against the l1 norm.
pub const MEAN_FREE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CZReport {
    pub scale: u64,
    pub omega: f64,
    pub mean: Complex64,
    pub l1: f64,
    /// l1 mass outside `[-s, s]`.
    pub overhang: f64,
    pub d_iii: f64,
    pub d_iv: f64,
    pub d_min: f64,
    /// Positive shift attaining the (iv) maximum, 0 for the zero kernel.
    pub worst_h: u64,
    pub pass_i: bool,
    pub pass_ii: bool,
    pub pass_iii: bool,
    pub pass_iv: bool,
    /// `budget - D` for (iii) and (iv) when a budget was supplied.
    pub slack_iii: Option<f64>,
    pub slack_iv: Option<f64>,
}

impl CZReport {
    pub fn passes(&self) -> bool {
        self.pass_i && self.pass_ii && self.pass_iii && self.pass_iv
    }

    /// One row of the tabular report: `s, D_iii, D_iv, worst_h, mean`.
    pub fn table_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{},{:.16e}",
            self.scale, self.d_iii, self.d_iv, self.worst_h, self.mean.re
        )
    }
}

pub const REPORT_HEADER: &str = "s,D_iii,D_iv,worst_h,mean";

/// `sum_x |K(x+h) - K(x)|^2`.
pub fn shift_energy<T: Scalar>(k: &Kernel<T>, h: i64) -> f64 {
    let Some((lo, hi)) = k.support() else {
        return 0.0;
    };
    let n = k.len() as i64;
    let h = h.abs();
    if h >= n {
        return 2.0 * k.l2_sq();
    }
    let v = k.values();
    // x + h ranges over [lo, hi] or x ranges over [lo, hi]
    let mut acc = 0.0;
    for x in (lo - h)..=hi {
        let a = if x + h >= lo && x + h <= hi { v[(x + h - lo) as usize] } else { T::zero() };
        let b = if x >= lo && x <= hi { v[(x - lo) as usize] } else { T::zero() };
        acc += (a - b).norm_sqr();
    }
    acc
}

/// Evaluates the four axioms at scale `s`; `budget` is the `D` allowed for
/// (iii) and (iv). Without a budget those two always pass and only `d_min`
/// is informative.
pub fn check_block<T: Scalar>(k: &Kernel<T>, s: u64, omega: f64, budget: Option<f64>) -> CZReport {
    let sf = s as f64;
    let mean = k.mass().to_c64();
    let l1 = k.l1();
    let bound = s as i64;
    let overhang: f64 = k
        .iter()
        .filter(|(x, _)| x.abs() > bound)
        .map(|(_, v)| v.modulus())
        .sum();
    let d_iii = (sf * k.l2_sq()).sqrt();
    let mut d_iv_sq: f64 = 0.0;
    let mut worst_h = 0;
    if !k.is_zero() {
        let mut h = 1u64;
        while h <= s {
            let e = sf * (sf / h as f64).powf(omega) * shift_energy(k, h as i64);
            if e > d_iv_sq {
                d_iv_sq = e;
                worst_h = h;
            }
            h *= 2;
        }
    }
    let d_iv = d_iv_sq.sqrt();
    let d_min = d_iii.max(d_iv);
    CZReport {
        scale: s,
        omega,
        mean,
        l1,
        overhang,
        d_iii,
        d_iv,
        d_min,
        worst_h,
        pass_i: mean.norm() <= MEAN_FREE_TOL * l1,
        pass_ii: overhang == 0.0,
        pass_iii: budget.is_none_or(|b| d_iii <= b),
        pass_iv: budget.is_none_or(|b| d_iv <= b),
        slack_iii: budget.map(|b| b - d_iii),
        slack_iv: budget.map(|b| b - d_iv),
    }
}

/// A kernel tagged with its dyadic scale and measured constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CZBlock<T: Scalar = f64> {
    pub kernel: Kernel<T>,
    pub scale: u64,
    pub d: f64,
    pub omega: f64,
    pub mean_free: bool,
}

impl<T: Scalar> CZBlock<T> {
    /// Measures `kernel` at `scale`.
    pub fn measure(kernel: Kernel<T>, scale: u64, omega: f64) -> Self {
        let r = check_block(&kernel, scale, omega, None);
        CZBlock {
            kernel,
            scale,
            d: r.d_min,
            omega,
            mean_free: r.pass_i,
        }
    }

    pub fn report(&self) -> CZReport {
        check_block(&self.kernel, self.scale, self.omega, None)
    }
}

/// The maximum block constant, recomputed at each block's `omega`.
pub fn cz_norm<T: Scalar>(blocks: &[CZBlock<T>]) -> Result<f64> {
    for b in blocks {
        let r = check_block(&b.kernel, b.scale, b.omega, None);
        if !r.pass_i {
            return Err(Error::NotMeanFree {
                scale: b.scale,
                mean: r.mean.norm(),
            });
        }
    }
    Ok(blocks
        .par_iter()
        .map(|b| check_block(&b.kernel, b.scale, b.omega, None).d_min)
        .reduce(|| 0.0, f64::max))
}

/// One canonical representation of a kernel as a dyadic sum of blocks.
#[derive(Debug, Clone)]
pub struct CZKernelProfile<T: Scalar = f64> {
    pub blocks: Vec<CZBlock<T>>,
    /// Mean-carrying block at four times the top scale, when the total mass
    /// does not vanish.
    pub tail: Option<CZBlock<T>>,
    /// `max D` over the mean-free blocks and the tail.
    pub cz_norm: f64,
}

impl<T: Scalar> CZKernelProfile<T> {
    pub fn lowest_scale(&self) -> Option<u64> {
        self.blocks.iter().map(|b| b.scale).min()
    }

    pub fn reconstruct(&self) -> Kernel<T> {
        let mut acc = Kernel::zero();
        for b in self.blocks.iter().chain(self.tail.iter()) {
            acc = acc.add(&b.kernel);
        }
        acc
    }

    pub fn table(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for b in self.blocks.iter().chain(self.tail.iter()) {
            out.push_str(&b.report().table_row());
            out.push('\n');
        }
        out
    }
}

/// `window_decompose` followed by `telescope` and `cz_norm`.
pub fn profile<T: Scalar>(k: &Kernel<T>, grid: &ScaleGrid, omega: f64) -> Result<CZKernelProfile<T>> {
    let lowest = grid
        .first()
        .ok_or_else(|| Error::InvalidParams("empty scale grid".into()))?;
    check_dyadic(lowest)?;
    let pieces = window_decompose(k, grid)?;
    let tel = telescope(&pieces, lowest, grid.last(), omega)?;
    let mut norm = cz_norm(&tel.blocks)?;
    if let Some(t) = &tel.tail {
        norm = norm.max(t.d);
    }
    Ok(CZKernelProfile {
        blocks: tel.blocks,
        tail: tel.tail,
        cz_norm: norm,
    })
}

/// A dyadic grid from `lowest` up to the first scale covering `radius`.
pub fn covering_grid(lowest: u64, radius: i64) -> ScaleGrid {
    let mut top = lowest;
    while (2 * top as i64) < radius {
        top *= 2;
    }
    ScaleGrid::span(lowest, top).expect("dyadic endpoints")
}
