//! Weak-l1 quasinorms, the Calderon-Zygmund decomposition at a level and
//! weak-type sweeps over `M`.

mod cubes;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{assemble, block_kernel, convolve, Kernel, Scalar};
use crate::params::Params;
use crate::resolvent::{default_grid, fit_expansion_with, resolvent_of, Basis, DEFAULT_MARGIN_TOL};
use crate::sweep::{Cell, RowStatus, SweepTable, WEAK_COLUMNS};

pub use cubes::{cz_cubes, cz_decompose, random_signal, CZDecomposition, DyadicInterval, CUBE_MEAN_TOL};

/// `sup_t t #{x : |K(x)| > t}`: with `|K|` sorted descending as `a_1 >= a_2 >= ..`
/// the sup is `max_r r a_r`, approached as `t` rises to `a_r`.
pub fn weak_l1<T: Scalar>(k: &Kernel<T>) -> f64 {
    let mut a: Vec<f64> = k.values().iter().map(|v| v.modulus()).filter(|v| *v > 0.0).collect();
    a.sort_unstable_by(|x, y| y.total_cmp(x));
    a.iter()
        .enumerate()
        .map(|(i, v)| (i + 1) as f64 * v)
        .fold(0.0, f64::max)
}

/// `|| sup_s |S_s * h| ||_2 / ||h||_2` with `S_s` the sum of the family's
/// blocks up to scale `s`, over the scales of `params`.
pub fn maximal_truncation_norm(params: &Params, h: &Kernel) -> Result<f64> {
    let norm = h.l2();
    if norm == 0.0 {
        return Err(Error::InvalidParams("test sequence must be nonzero".into()));
    }
    let scales = params.scales();
    let pieces: Vec<Kernel> = scales
        .scales()
        .par_iter()
        .map(|&s| block_kernel(s, params, false).and_then(|b| convolve(&b, h)))
        .collect::<Result<_>>()?;
    let sup = pointwise_sup_of_partial_sums(&pieces);
    Ok(sup.l2() / norm)
}

// `max_n |sum_{i <= n} p_i(x)|` over the union window.
fn pointwise_sup_of_partial_sums(pieces: &[Kernel]) -> Kernel {
    let supports: Vec<(i64, i64)> = pieces.iter().filter_map(|p| p.support()).collect();
    let (Some(lo), Some(hi)) = (
        supports.iter().map(|s| s.0).min(),
        supports.iter().map(|s| s.1).max(),
    ) else {
        return Kernel::zero();
    };
    let n = (hi - lo + 1) as usize;
    let mut partial = vec![0.0; n];
    let mut sup = vec![0.0f64; n];
    for p in pieces {
        for (x, v) in p.iter() {
            partial[(x - lo) as usize] += v;
        }
        for (s, v) in sup.iter_mut().zip(&partial) {
            *s = s.max(v.abs());
        }
    }
    Kernel::new(lo, sup)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakFamily {
    H,
    HSquared,
    ResolventResidual,
}

impl WeakFamily {
    pub fn name(self) -> &'static str {
        match self {
            WeakFamily::H => "h",
            WeakFamily::HSquared => "hsq",
            WeakFamily::ResolventResidual => "resid",
        }
    }
}

impl fmt::Display for WeakFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeakFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h" => Ok(WeakFamily::H),
            "hsq" | "hsquared" => Ok(WeakFamily::HSquared),
            "resid" | "resolvent_residual" => Ok(WeakFamily::ResolventResidual),
            other => Err(Error::Parse(format!("unknown family {other:?} (h, hsq, resid)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakRow {
    pub m: u64,
    pub weak_l1: f64,
    pub l1: f64,
    pub l2: f64,
    pub support_radius: i64,
}

fn stats<T: Scalar>(m: u64, k: &Kernel<T>) -> WeakRow {
    WeakRow {
        m,
        weak_l1: weak_l1(k),
        l1: k.l1(),
        l2: k.l2(),
        support_radius: k.radius(),
    }
}

/// Measures one member of `family` at `params.m`; `lam` is used by the
/// resolvent residual only.
pub fn weak_row(family: WeakFamily, lam: Complex64, params: &Params) -> Result<WeakRow> {
    let m = params.m;
    match family {
        WeakFamily::H => Ok(stats(m, &assemble(params)?.h)),
        WeakFamily::HSquared => {
            let h = assemble(params)?.h;
            Ok(stats(m, &convolve(&h, &h)?))
        }
        WeakFamily::ResolventResidual => {
            let basis = Basis::new(params)?;
            let r = resolvent_of(lam, Complex64::new(1.0, 0.0), &basis.h, default_grid(&basis.h), DEFAULT_MARGIN_TOL)?;
            let e = fit_expansion_with(&r.kernel, &basis)?;
            Ok(stats(m, &e.residual))
        }
    }
}

/// One row per `M`; failing rows are marked and the sweep continues.
pub fn weak_sweep(
    family: WeakFamily,
    lam: Complex64,
    template: &Params,
    m_list: &[u64],
) -> Result<(SweepTable, Vec<WeakRow>)> {
    let results: Vec<(u64, Result<WeakRow>)> = m_list
        .par_iter()
        .map(|&m| (m, template.with_m(m).and_then(|p| weak_row(family, lam, &p))))
        .collect();
    let mut table = SweepTable::new(&WEAK_COLUMNS);
    let mut rows = Vec::new();
    for (m, res) in results {
        match res {
            Ok(r) => {
                let cells = vec![
                    Cell::Text(family.name().into()),
                    Cell::Num(r.weak_l1),
                    Cell::Num(r.l1),
                    Cell::Num(r.l2),
                    Cell::Num(r.support_radius as f64),
                ];
                table.push(m, cells, RowStatus::Ok)?;
                rows.push(r);
            }
            Err(e) => table.push_failure(m, &[(0, family.name().into())], &e)?,
        }
    }
    Ok((table, rows))
}
