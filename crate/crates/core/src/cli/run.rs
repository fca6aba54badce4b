//! Subcommand execution and artifact bookkeeping.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cache::assemble_cached;
use super::config::{Command, KernelChoice, Plan};
use super::manifest::{code_version, now_rfc3339, run_id, Check, RunManifest};
use crate::cz::profile;
use crate::cz::rho_k_split;
use crate::error::{Error, Result};
use crate::kernel::{io::write_text, op_norm, Assembled, Kernel};
use crate::params::{dyadic_range, pow_m, Params};
use crate::resolvent::{
    algebra_product, asymptotics_row, asymptotics_sweep, default_grid, identity_defect, random_element, resolvent_of,
    Basis, DEFAULT_MARGIN_TOL,
};
use crate::sweep::{format_num, RowStatus, SweepTable, RESOLVENT_COLUMNS};
use crate::weak::{cz_decompose, random_signal, weak_sweep};

/// Identity defect allowed for a computed resolvent.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Bound on `||ab|| / (||a|| ||b||)` asserted by the algebra suite.
pub const ALGEBRA_BOUND: f64 = 200.0;
/// Relative tolerance on profile reconstruction in `check-cz`.
pub const RECONSTRUCTION_TOL: f64 = 1e-12;
/// Support length of the signals in the `cz-decompose` suite.
pub const SIGNAL_LEN: usize = 256;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECKS_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Artifacts and checks accumulated by one run.
struct Outputs {
    dir: PathBuf,
    artifacts: Vec<String>,
    checks: Vec<Check>,
}

impl Outputs {
    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn table(&mut self, name: &str, t: &SweepTable) -> Result<()> {
        self.write(name, t.to_csv_string())
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    fn rows_ok(&mut self, t: &SweepTable) {
        let failed: Vec<String> = t
            .rows()
            .iter()
            .filter_map(|r| match &r.status {
                RowStatus::Ok => None,
                RowStatus::Failed(msg) => Some(format!("M={}: {msg}", r.m)),
            })
            .collect();
        let detail = if failed.is_empty() {
            format!("{} rows", t.rows().len())
        } else {
            failed.join("; ")
        };
        self.check("all rows computed", failed.is_empty(), detail);
    }
}

/// A finished run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub manifest: RunManifest,
    pub dir: PathBuf,
    pub manifest_path: PathBuf,
    pub exit_code: i32,
}

/// The run directory: `plan.out`, or `rhlab-out/<command>-<id prefix>`.
pub fn run_dir(plan: &Plan, id: &str) -> PathBuf {
    match &plan.out {
        Some(o) => PathBuf::from(o),
        None => PathBuf::from("rhlab-out").join(format!("{}-{}", plan.command.name(), &id[..12])),
    }
}

/// Runs `plan`, writing its artifacts and manifest. Module errors are
/// recorded in the manifest (artifacts renamed with a `.partial` suffix)
/// rather than returned; only failures to write the run directory itself
/// are returned as `Err`.
pub fn run_experiment(
    plan: &Plan,
    config: &[u8],
    overrides: &[(String, String)],
    cache: Option<&Path>,
) -> Result<Outcome> {
    let version = code_version();
    let id = run_id(config, overrides, &version);
    let dir = run_dir(plan, &id);
    std::fs::create_dir_all(&dir)?;
    let started = now_rfc3339();
    let mut out = Outputs {
        dir: dir.clone(),
        artifacts: Vec::new(),
        checks: Vec::new(),
    };
    let result = execute(plan, cache, &mut out);
    let (status, error, exit_code) = match &result {
        Err(e) => {
            for a in out.artifacts.iter_mut() {
                let partial = format!("{a}.partial");
                std::fs::rename(dir.join(&*a), dir.join(&partial))?;
                *a = partial;
            }
            ("error", Some(e.to_string()), EXIT_ERROR)
        }
        Ok(()) if out.checks.iter().all(|c| c.passed) => ("ok", None, EXIT_OK),
        Ok(()) => ("checks-failed", None, EXIT_CHECKS_FAILED),
    };
    let manifest = RunManifest {
        run_id: id,
        version,
        command: plan.command.name().to_string(),
        config: serde_json::to_value(plan).map_err(|e| Error::Internal(e.to_string()))?,
        seed: plan.seed,
        started,
        finished: now_rfc3339(),
        status: status.to_string(),
        error,
        checks: out.checks,
        artifacts: out.artifacts,
    };
    let manifest_path = manifest.write(&dir)?;
    Ok(Outcome {
        manifest,
        dir,
        manifest_path,
        exit_code,
    })
}

fn execute(plan: &Plan, cache: Option<&Path>, out: &mut Outputs) -> Result<()> {
    let p = &plan.params;
    match plan.command {
        Command::BuildKernel => build_kernel(p, cache, out),
        Command::CheckCz => check_cz(plan, cache, out),
        Command::Resolvent => resolvent(plan, cache, out),
        Command::Algebra => algebra(plan, out),
        Command::SweepWeak => {
            let (t, _) = weak_sweep(plan.weak_family()?, plan.lambda_c(), p, &plan.m_list)?;
            out.table("weak.csv", &t)?;
            out.rows_ok(&t);
            Ok(())
        }
        Command::CzDecompose => cz_suite(plan, out),
        Command::RhoK => rho_k(p, out),
        Command::Asymptotics => {
            let (t, _) = asymptotics_sweep(plan.lambda_c(), plan.beta_c(), p, &plan.m_list)?;
            out.table("asymptotics.csv", &t)?;
            out.rows_ok(&t);
            Ok(())
        }
    }
}

fn csv_line(cells: &[String]) -> String {
    let mut s = cells.join(",");
    s.push('\n');
    s
}

fn pick(a: &Assembled, which: KernelChoice) -> Result<&Kernel> {
    match which {
        KernelChoice::H => Ok(&a.h),
        KernelChoice::Minus => a.minus.as_ref().ok_or_else(|| Error::InvalidParams("band kernels need gap mode".into())),
        KernelChoice::Plus => a.plus.as_ref().ok_or_else(|| Error::InvalidParams("band kernels need gap mode".into())),
    }
}

fn build_kernel(p: &Params, cache: Option<&Path>, out: &mut Outputs) -> Result<()> {
    let (a, _) = assemble_cached(p, cache)?;
    let mut parts = vec![("h", &a.h)];
    if let (Some(minus), Some(plus)) = (&a.minus, &a.plus) {
        parts.push(("minus", minus));
        parts.push(("plus", plus));
    }
    let mut csv = csv_line(&["kernel", "len", "radius", "l1", "l2", "op_norm", "value_at_0", "oddness_defect"].map(String::from));
    for (name, k) in &parts {
        let mut buf = Vec::new();
        write_text(k, &mut buf)?;
        out.write(&format!("{name}.txt"), buf)?;
        csv.push_str(&csv_line(&[
            name.to_string(),
            k.len().to_string(),
            k.radius().to_string(),
            format_num(k.l1()),
            format_num(k.l2()),
            format_num(op_norm(k)),
            format_num(k.get(0)),
            format_num(k.oddness_defect()),
        ]));
    }
    out.write("kernel_summary.csv", csv)?;
    out.check("H(0) = 0", a.h.get(0) == 0.0, format_num(a.h.get(0)));
    out.check("H odd", a.h.oddness_defect() == 0.0, format_num(a.h.oddness_defect()));
    if let (Some(r_minus), Some(r_plus)) = (a.minus_radius, a.plus_inner_radius) {
        out.check(
            "bands disjoint",
            r_minus < r_plus,
            format!("max |x| on H- = {r_minus}, min |x| on H+ = {r_plus}"),
        );
    }
    Ok(())
}

fn check_cz(plan: &Plan, cache: Option<&Path>, out: &mut Outputs) -> Result<()> {
    let p = &plan.params;
    let (a, _) = assemble_cached(p, cache)?;
    let k = pick(&a, plan.kernel)?;
    let grid = match plan.kernel {
        KernelChoice::H => p.scales(),
        KernelChoice::Minus => p.lower_scales(),
        KernelChoice::Plus => p.upper_scales(),
    };
    let prof = profile(k, &grid, p.omega)?;
    let mut csv = csv_line(
        &["s", "kind", "D_iii", "D_iv", "D_min", "worst_h", "mean", "l1", "overhang", "pass_i", "pass_ii"].map(String::from),
    );
    let mut blocks_ok = true;
    for (b, kind) in prof
        .blocks
        .iter()
        .map(|b| (b, "block"))
        .chain(prof.tail.iter().map(|b| (b, "tail")))
    {
        let r = b.report();
        if kind == "block" {
            blocks_ok &= r.pass_i && r.pass_ii;
        } else {
            blocks_ok &= r.pass_ii;
        }
        csv.push_str(&csv_line(&[
            r.scale.to_string(),
            kind.to_string(),
            format_num(r.d_iii),
            format_num(r.d_iv),
            format_num(r.d_min),
            r.worst_h.to_string(),
            format_num(r.mean.re),
            format_num(r.l1),
            format_num(r.overhang),
            r.pass_i.to_string(),
            r.pass_ii.to_string(),
        ]));
    }
    out.write("cz_report.csv", csv)?;
    out.check(
        "blocks mean-free and supported",
        blocks_ok,
        format!("{} blocks, cz norm {}", prof.blocks.len(), format_num(prof.cz_norm)),
    );
    let err = prof.reconstruct().max_abs_diff(k);
    out.check(
        "blocks sum to the kernel",
        err <= RECONSTRUCTION_TOL * k.l1(),
        format!("max error {}", format_num(err)),
    );
    Ok(())
}

fn resolvent(plan: &Plan, cache: Option<&Path>, out: &mut Outputs) -> Result<()> {
    let p = &plan.params;
    let (lam, beta) = (plan.lambda_c(), plan.beta_c());
    let h = assemble_cached(p, cache)?.0.h;
    let r = resolvent_of(lam, beta, &h, default_grid(&h), DEFAULT_MARGIN_TOL)?;
    let defect = identity_defect(lam, beta, &h, &r.kernel)?;
    let mut csv = csv_line(&["M", "n", "margin", "aliasing_diff", "truncated_mass", "support_len", "identity_defect"].map(String::from));
    csv.push_str(&csv_line(&[
        p.m.to_string(),
        r.n.to_string(),
        format_num(r.margin),
        format_num(r.aliasing_diff),
        format_num(r.truncated_mass),
        r.kernel.len().to_string(),
        format_num(defect),
    ]));
    out.write("resolvent.csv", csv)?;
    let row = asymptotics_row(lam, beta, p)?;
    let mut t = SweepTable::new(&RESOLVENT_COLUMNS);
    t.push(p.m, row.cells(), RowStatus::Ok)?;
    out.table("expansion.csv", &t)?;
    out.check("resolvent identity", defect <= IDENTITY_TOL, format!("defect {}", format_num(defect)));
    Ok(())
}

fn algebra(plan: &Plan, out: &mut Outputs) -> Result<()> {
    let p = &plan.params;
    let basis = Basis::new(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut csv = csv_line(&["pair", "norm_a", "norm_b", "norm_product", "ratio"].map(String::from));
    let mut worst: f64 = 0.0;
    for i in 0..plan.cases {
        let a = random_element(&mut rng, &basis, p.m);
        let b = random_element(&mut rng, &basis, p.m);
        let prod = algebra_product(&a, &b, &basis)?;
        worst = worst.max(prod.ratio);
        csv.push_str(&csv_line(&[
            i.to_string(),
            format_num(a.a_norm),
            format_num(b.a_norm),
            format_num(prod.element.a_norm),
            format_num(prod.ratio),
        ]));
    }
    out.write("algebra.csv", csv)?;
    out.check(
        "product bound",
        worst <= ALGEBRA_BOUND,
        format!("worst ratio {} over {} pairs (bound {ALGEBRA_BOUND})", format_num(worst), plan.cases),
    );
    Ok(())
}

fn cz_suite(plan: &Plan, out: &mut Outputs) -> Result<()> {
    let p = &plan.params;
    let level = plan.lambda[0];
    let s = p.first_scale();
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut csv = csv_line(&["case", "l1", "cubes", "cube_measure", "measure_bound", "b_ratio_max", "sup_g"].map(String::from));
    let mut worst_ratio: f64 = 0.0;
    let mut ok = true;
    for i in 0..plan.cases {
        let f = random_signal(&mut rng, SIGNAL_LEN);
        let d = cz_decompose(&f, level, s, p)?;
        let measure: i64 = d.cubes.iter().map(|q| q.len()).sum();
        let bound = 2.0 * f.l1() / level;
        let sup_g = d.g.max_abs();
        ok &= measure as f64 <= bound && sup_g <= level;
        worst_ratio = worst_ratio.max(d.b_ratio_max);
        csv.push_str(&csv_line(&[
            i.to_string(),
            format_num(f.l1()),
            d.cubes.len().to_string(),
            measure.to_string(),
            format_num(bound),
            format_num(d.b_ratio_max),
            format_num(sup_g),
        ]));
    }
    out.write("cz_decompose.csv", csv)?;
    out.check(
        "decomposition invariants",
        ok,
        format!("{} cases, max B ratio {}", plan.cases, format_num(worst_ratio)),
    );
    Ok(())
}

fn rho_k(p: &Params, out: &mut Outputs) -> Result<()> {
    let scales = dyadic_range(pow_m(p.m, p.theta), p.m as f64);
    let mut csv = csv_line(
        &["s1", "s2", "diag", "window", "c_rho", "c_k", "c_holder", "c_support", "max_k"].map(String::from),
    );
    let mut worst_diag: f64 = 0.0;
    for (i, &s1) in scales.scales().iter().enumerate() {
        for &s2 in &scales.scales()[i..] {
            let r = rho_k_split(s1, s2, p)?;
            if s1 == s2 {
                let blk = crate::kernel::block_kernel(s1, p, false)?;
                let expect = -blk.l2_sq();
                worst_diag = worst_diag.max((r.diag - expect).abs() / expect.abs().max(f64::MIN_POSITIVE));
            }
            csv.push_str(&csv_line(&[
                s1.to_string(),
                s2.to_string(),
                format_num(r.diag),
                format_num(r.window),
                format_num(r.c_rho),
                format_num(r.c_k),
                format_num(r.c_holder),
                format_num(r.c_support),
                format_num(r.k.max_abs()),
            ]));
        }
    }
    out.write("rho_k.csv", csv)?;
    out.check(
        "diagonal mass equals -||H_s||^2",
        worst_diag <= 1e-12,
        format!("max relative error {}", format_num(worst_diag)),
    );
    Ok(())
}
