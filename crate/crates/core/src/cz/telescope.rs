use std::collections::BTreeMap;

use rayon::prelude::*;

use super::CZBlock;
use crate::error::{Error, Result};
use crate::kernel::{Kernel, Scalar};
use crate::params::{check_dyadic, w, w_tilde, NormalizedPsi, ScaleGrid};

/// `8^(1/2) / (sqrt(2) - 1)`: the averaging constant for blocks with `D <= 1`.
pub const AVERAGING_E: f64 = 6.828_427_124_746_19;

/// Output of [`telescope`]: mean-free blocks plus the mean-carrying tail.
#[derive(Debug, Clone)]
pub struct Telescoped<T: Scalar = f64> {
    pub blocks: Vec<CZBlock<T>>,
    pub tail: Option<CZBlock<T>>,
    /// Total mass moved into the tail.
    pub total_mass: T,
}

impl<T: Scalar> Telescoped<T> {
    pub fn sum(&self) -> Kernel<T> {
        let mut acc = Kernel::zero();
        for b in self.blocks.iter().chain(self.tail.iter()) {
            acc = acc.add(&b.kernel);
        }
        acc
    }
}

// `c psi~_s`, with the rounding residue of its mass put at the origin.
fn psi_kernel<T: Scalar>(s: u64, c: T) -> Kernel<T> {
    let psi = NormalizedPsi::new(s);
    let r = psi.radius();
    let mut vals: Vec<T> = (-r..=r).map(|x| c.mul_f64(psi.eval(x as f64))).collect();
    let residue = c - Kernel::new(-r, vals.clone()).mass();
    vals[r as usize] += residue;
    Kernel::new(-r, vals)
}

/// Re-blocks `sum K_s` into mean-free pieces
/// `K~_s = K_s - psi~_s C_s + psi~_{s/2} C_{s/2}` with `C_s` the cumulative
/// mass over scales `lowest..=s`, for every dyadic `s` from `lowest` to the
/// top scale (`tail_at`, or the largest input scale). The leftover
/// `C_top psi~_top` is returned as a tail block of scale `4 top`.
///
/// Each output block is labeled with the smaller of `s` and `2s` whose
/// window contains its support. Inputs sharing a scale are summed first.
pub fn telescope<T: Scalar>(
    blocks: &[(Kernel<T>, u64)],
    lowest: u64,
    tail_at: Option<u64>,
    omega: f64,
) -> Result<Telescoped<T>> {
    check_dyadic(lowest)?;
    let mut by_scale: BTreeMap<u64, Kernel<T>> = BTreeMap::new();
    for (k, s) in blocks {
        check_dyadic(*s)?;
        if *s < lowest {
            return Err(Error::InvalidParams(format!(
                "input scale {s} below the lowest scale {lowest}"
            )));
        }
        let e = by_scale.entry(*s).or_default();
        *e = e.add(k);
    }
    let max_in = by_scale.keys().next_back().copied().unwrap_or(lowest);
    let top = match tail_at {
        Some(t) => {
            check_dyadic(t)?;
            if t < max_in || t < lowest {
                return Err(Error::InvalidParams(format!(
                    "tail scale {t} below the largest input scale {max_in}"
                )));
            }
            t
        }
        None => max_in,
    };

    let mut scales = Vec::new();
    let mut s = lowest;
    while s <= top {
        scales.push(s);
        s *= 2;
    }
    let mut cumulative = Vec::with_capacity(scales.len());
    let mut c = T::zero();
    let mut l1 = 0.0;
    for s in &scales {
        if let Some(k) = by_scale.get(s) {
            c += k.mass();
            l1 += k.l1();
        }
        // masses at rounding level are treated as exact zeros
        if c.modulus() <= 4.0 * f64::EPSILON * l1 {
            cumulative.push(T::zero());
        } else {
            cumulative.push(c);
        }
    }

    let out: Vec<CZBlock<T>> = scales
        .par_iter()
        .enumerate()
        .filter_map(|(i, &s)| {
            let mut k = by_scale.get(&s).cloned().unwrap_or_default();
            let here = cumulative[i];
            if here != T::zero() {
                k = k.sub(&psi_kernel(s, here));
            }
            if i > 0 && cumulative[i - 1] != T::zero() {
                k = k.add(&psi_kernel(s / 2, cumulative[i - 1]));
            }
            if k.is_zero() {
                return None;
            }
            let label = if k.radius() <= s as i64 { s } else { 2 * s };
            Some(CZBlock::measure(k, label, omega))
        })
        .collect();

    let total = cumulative.last().copied().unwrap_or(T::zero());
    let tail = (total != T::zero()).then(|| CZBlock::measure(psi_kernel(top, total), 4 * top, omega));
    Ok(Telescoped {
        blocks: out,
        tail,
        total_mass: total,
    })
}

/// Splits `K` into `K phi_s` over the grid with a partition of unity:
/// `w(x/J)` at the lowest scale, `w~(x/s)` in between and `1 - w(2x/S)` at
/// the top. Zero pieces are dropped.
pub fn window_decompose<T: Scalar>(k: &Kernel<T>, grid: &ScaleGrid) -> Result<Vec<(Kernel<T>, u64)>> {
    let scales = grid.scales();
    let (Some(&first), Some(&top)) = (scales.first(), scales.last()) else {
        return Err(Error::InvalidParams("empty scale grid".into()));
    };
    let radius = k.radius();
    if radius > 2 * top as i64 {
        let mut need = top;
        while (2 * need as i64) < radius {
            need *= 2;
        }
        return Err(Error::GridDoesNotCover { required: need });
    }
    let mut out = Vec::new();
    for (i, &s) in scales.iter().enumerate() {
        let sf = s as f64;
        let piece = if scales.len() == 1 {
            k.clone()
        } else if s == first {
            k.mul_cutoff(|x| w(x as f64 / sf))
        } else if i + 1 == scales.len() {
            k.mul_cutoff(|x| 1.0 - w(2.0 * x as f64 / sf))
        } else {
            k.mul_cutoff(|x| w_tilde(x as f64 / sf))
        };
        if !piece.is_zero() {
            out.push((piece, s));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragingDefect {
    pub s: u64,
    /// `max_{|x| <= 2s} |1_{4s} * K(x) - sum_{j <= s} mass(K_j)|`.
    pub defect: f64,
    /// `||1_{4s}||_2 * sum_{j > s} ||K_j||_2`.
    pub energy_bound: f64,
}

/// Measures how far the local average of `sum K_j` at scale `s` is from the
/// mass of the blocks below `s`; `1_{4s}` is the indicator of `(-4s, 4s)`.
pub fn averaging_defect(blocks: &[(Kernel, u64)], s: u64) -> Result<AveragingDefect> {
    check_dyadic(s)?;
    let mut total = Kernel::zero();
    let mut low_mass = 0.0;
    let mut energy = 0.0;
    for (k, j) in blocks {
        check_dyadic(*j)?;
        total = total.add(k);
        if *j <= s {
            low_mass += k.mass();
        } else {
            energy += k.l2();
        }
    }
    let r = 4 * s as i64 - 1;
    let reach = 2 * s as i64;
    // prefix sums over [-reach - r, reach + r]
    let lo = -reach - r;
    let hi = reach + r;
    let mut prefix = vec![0.0; (hi - lo + 2) as usize];
    for x in lo..=hi {
        let i = (x - lo) as usize;
        prefix[i + 1] = prefix[i] + total.get(x);
    }
    let mut defect: f64 = 0.0;
    for x in -reach..=reach {
        let a = (x - r - lo) as usize;
        let b = (x + r - lo + 1) as usize;
        defect = defect.max((prefix[b] - prefix[a] - low_mass).abs());
    }
    Ok(AveragingDefect {
        s,
        defect,
        energy_bound: ((2 * r + 1) as f64).sqrt() * energy,
    })
}
