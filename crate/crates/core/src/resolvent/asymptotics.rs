use num_complex::Complex64;
use rayon::prelude::*;

use super::fit::{fit_expansion_with, Basis, ResolventExpansion};
use super::{default_grid, resolvent_of, DEFAULT_MARGIN_TOL};
use crate::error::Result;
use crate::params::Params;
use crate::sweep::{Cell, RowStatus, SweepTable, RESOLVENT_COLUMNS};

/// The expansion of `(lam + beta H_M)^-1` at one `M` and the three
/// combinations `lam lam~ - 1`, `beta lam~ + beta~ lam`, `lam gamma~ + beta beta~`.
#[derive(Debug, Clone)]
pub struct AsymptoticsRow {
    pub m: u64,
    pub margin: f64,
    pub expansion: ResolventExpansion,
    pub combinations: [Complex64; 3],
}

pub fn asymptotics_row(lam: Complex64, beta: Complex64, params: &Params) -> Result<AsymptoticsRow> {
    let basis = Basis::new(params)?;
    let r = resolvent_of(lam, beta, &basis.h, default_grid(&basis.h), DEFAULT_MARGIN_TOL)?;
    let e = fit_expansion_with(&r.kernel, &basis)?;
    let combinations = [
        lam * e.lambda_prime - 1.0,
        beta * e.lambda_prime + e.beta * lam,
        lam * e.gamma + beta * e.beta,
    ];
    Ok(AsymptoticsRow {
        m: params.m,
        margin: r.margin,
        expansion: e,
        combinations,
    })
}

impl AsymptoticsRow {
    /// Cells after `M`; the combinations are stored as magnitudes.
    pub fn cells(&self) -> Vec<Cell> {
        let e = &self.expansion;
        let mut v = Vec::with_capacity(11);
        for z in [e.lambda_prime, e.beta, e.gamma] {
            v.push(Cell::Num(z.re));
            v.push(Cell::Num(z.im));
        }
        v.push(Cell::Num(e.residual_profile.cz_norm));
        v.push(Cell::Num(self.margin));
        v.extend(self.combinations.iter().map(|z| Cell::Num(z.norm())));
        v
    }
}

/// One row per `M` of `m_list` (strictly increasing). Rows that fail are
/// marked and the sweep continues.
pub fn asymptotics_sweep(
    lam: Complex64,
    beta: Complex64,
    template: &Params,
    m_list: &[u64],
) -> Result<(SweepTable, Vec<AsymptoticsRow>)> {
    let results: Vec<(u64, Result<AsymptoticsRow>)> = m_list
        .par_iter()
        .map(|&m| (m, template.with_m(m).and_then(|p| asymptotics_row(lam, beta, &p))))
        .collect();
    let mut table = SweepTable::new(&RESOLVENT_COLUMNS);
    let mut rows = Vec::new();
    for (m, res) in results {
        match res {
            Ok(row) => {
                table.push(m, row.cells(), RowStatus::Ok)?;
                rows.push(row);
            }
            Err(e) => table.push_failure(m, &[], &e)?,
        }
    }
    Ok((table, rows))
}
