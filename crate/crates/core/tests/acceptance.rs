//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Every tolerance is pinned below. Independent oracles (direct sums,
//! brute-force cube searches) are used wherever the library's own routine
//! is the thing being checked.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rhlab::cli::svg::{auto_scales, render, Chart, Series};
use rhlab::cz::{check_block, commutator, commutator_unchecked, rho_k_split, telescope};
use rhlab::kernel::{assemble, block_kernel, eval_symbol, exact_sum, op_norm, Kernel};
use rhlab::params::{dyadic_range, pow_m, validate, w, Mode, Params, RawParams};
use rhlab::resolvent::{
    algebra_product, asymptotics_sweep, default_grid, identity_defect, neumann_of, random_element, resolvent_of, Basis,
    DEFAULT_MARGIN_TOL,
};
use rhlab::weak::{cz_decompose, random_signal, weak_sweep, DyadicInterval, WeakFamily};

const ALPHA: f64 = 1.5;
const DELTA: f64 = 0.05;

const C1_M: u64 = 1 << 14;
const C1_TOL: f64 = 1e-8;
const C1_SECONDS: f64 = 60.0;
const C1_SAMPLE_RADIUS: i64 = 64;

const C2_M: u64 = 1 << 12;
const C2_ORDER: usize = 8;
const C2_SLACK: f64 = 1e-9;

const C3_M: u64 = 1 << 14;
const C3_REL: f64 = 1e-12;

const C4_EXPONENTS: std::ops::RangeInclusive<u32> = 10..=17;
const C4_SLACK: f64 = 0.1;

const C5_CASES: usize = 500;
const C5_MEAN_REL: f64 = 1e-12;
const C5_RECON_ABS: f64 = 1e-12;
const C5_SECONDS: f64 = 120.0;
const C5_SEED: u64 = 5;

const C6_CASES: usize = 1000;
const C6_MEAN_REL: f64 = 1e-12;
const C6_SEED: u64 = 6;

const C7_M: u64 = 1 << 14;
const C7_SUPPLEMENT: std::ops::RangeInclusive<u32> = 10..=16;
const C7_RATIO: f64 = 10.0;

const C8_M: u64 = 1 << 14;
const C8_SLOPE_TOL: f64 = 0.15;
const C8_RATIO: f64 = 10.0;
const C8_K_ZERO_RATIO: f64 = 0.25;
/// `k` counts as zero when `sup |k| <= C8_K_ZERO_REL * sup |H_s1 * H_s2|`.
const C8_K_ZERO_REL: f64 = 1e-12;

const C9_EXPONENTS: std::ops::RangeInclusive<u32> = 10..=16;
const C9_INVERSIONS: usize = 1;

const C10_EXPONENTS: std::ops::RangeInclusive<u32> = 10..=16;
const C10_RATIO: f64 = 3.0;
const C10_RUN: usize = 4;

const C11_M: u64 = 1 << 10;
const C11_PAIRS: usize = 100;
const C11_BOUND: f64 = 200.0;
const C11_SEED: u64 = 11;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn params(m: u64, mode: Mode) -> Params {
    validate(&RawParams::new(ALPHA, DELTA, m, mode)).expect("desk parameters validate")
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn powers(e: std::ops::RangeInclusive<u32>) -> Vec<u64> {
    e.map(|k| 1u64 << k).collect()
}

/// Least-squares slope of `log2 y` against `log2 x`.
fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.log2()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.log2()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn max_min_ratio(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

/// Nonzero entries of a kernel.
fn nonzeros(k: &Kernel) -> Vec<(i64, f64)> {
    k.iter().filter(|(_, v)| *v != 0.0).collect()
}

fn c1_resolvent_identity() -> Verdict {
    let start = Instant::now();
    let p = params(C1_M, Mode::Gap);
    let h = assemble(&p).unwrap().h;
    let r = resolvent_of(one(), one(), &h, default_grid(&h), DEFAULT_MARGIN_TOL).unwrap();
    let defect = identity_defect(one(), one(), &h, &r.kernel).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    // direct sparse evaluation of (delta_0 + H) * R - delta_0 near the origin
    // and at the window ends
    let sparse = nonzeros(&h);
    let (lo, hi) = r.kernel.support().unwrap();
    let mut direct: f64 = 0.0;
    let xs = (-C1_SAMPLE_RADIUS..=C1_SAMPLE_RADIUS)
        .chain(lo - 8..lo + 8)
        .chain(hi - 8..hi + 8);
    for x in xs {
        let mut v = r.kernel.get(x);
        for &(y, hy) in &sparse {
            v += r.kernel.get(x - y) * hy;
        }
        if x == 0 {
            v -= 1.0;
        }
        direct = direct.max(v.norm());
    }
    verdict(
        defect <= C1_TOL && direct <= C1_TOL && elapsed <= C1_SECONDS,
        format!("sup defect {defect:.3e} (FFT), {direct:.3e} (direct, sampled), tol {C1_TOL:e}; {elapsed:.2} s"),
    )
}

fn c2_neumann_oracle() -> Verdict {
    let p = params(C2_M, Mode::Gap);
    let h = assemble(&p).unwrap().h;
    let norm = op_norm(&h);
    let lam = Complex64::new(4.0 * norm, 0.0);
    let r = resolvent_of(lam, one(), &h, default_grid(&h), DEFAULT_MARGIN_TOL).unwrap();
    let series = neumann_of(lam, one(), &h, C2_ORDER).unwrap();
    let diff = r.kernel.sub(&series).max_abs();
    let tol = 4f64.powi(-(C2_ORDER as i32 + 1)) / 0.75 / lam.re + C2_SLACK;
    verdict(
        diff <= tol,
        format!("sup |R - N_{C2_ORDER}| = {diff:.3e}, tol {tol:.3e} (op norm {norm:.6})"),
    )
}

fn c3_structural_zeros() -> Verdict {
    let p = params(C3_M, Mode::Gap);
    let a = assemble(&p).unwrap();
    let h = &a.h;
    let l1 = h.l1();
    let s0 = eval_symbol(h, 0.0).norm();
    let s_half = eval_symbol(h, 0.5).norm();
    // direct sums: sum h(x) and sum h(x) (-1)^x
    let d0: f64 = h.iter().map(|(_, v)| v).sum();
    let d_half: f64 = h.iter().map(|(x, v)| if x % 2 == 0 { v } else { -v }).sum();
    let plus = a.plus.as_ref().unwrap();
    let minus = a.minus.as_ref().unwrap();
    let plus_abs: BTreeSet<i64> = nonzeros(plus).iter().map(|p| p.0.abs()).collect();
    let minus_abs: BTreeSet<i64> = nonzeros(minus).iter().map(|p| p.0.abs()).collect();
    let disjoint = plus_abs.is_disjoint(&minus_abs);
    // (H+ * H-)(0) = sum_y H+(y) H-(-y), every product vanishing
    let cross: f64 = nonzeros(plus).iter().map(|&(y, v)| v * minus.get(-y)).sum();
    let pass = h.get(0) == 0.0
        && s0 <= C3_REL * l1
        && s_half <= C3_REL * l1
        && d0.abs() <= C3_REL * l1
        && d_half.abs() <= C3_REL * l1
        && disjoint
        && cross == 0.0;
    verdict(
        pass,
        format!(
            "H(0) = {}, |symbol(0)| = {s0:.2e}, |symbol(1/2)| = {s_half:.2e} (l1 {l1:.3}), supports disjoint: {disjoint}, (H+*H-)(0) = {cross}",
            h.get(0)
        ),
    )
}

fn c4_square_at_origin() -> Verdict {
    let mut pts = Vec::new();
    for m in powers(C4_EXPONENTS) {
        let h = assemble(&params(m, Mode::Gap)).unwrap().h;
        let at0: f64 = h.iter().map(|(y, v)| v * h.get(-y)).sum();
        pts.push((m as f64, at0.abs()));
    }
    let slope = loglog_slope(&pts);
    let target = -(ALPHA - 1.0 - DELTA) / ALPHA;
    let values: Vec<String> = pts.iter().map(|p| format!("{:.3e}", p.1)).collect();
    verdict(
        slope <= target + C4_SLACK,
        format!("slope {slope:.4} (need <= {:.4}); |H^2(0)| = [{}]", target + C4_SLACK, values.join(", ")),
    )
}

/// Blocks of random shape and mean at random dyadic scales, jointly scaled to
/// unit l1 norm of their sum.
fn telescope_case(rng: &mut ChaCha8Rng) -> (Vec<(Kernel, u64)>, u64) {
    let lowest = 1u64 << rng.random_range(1..=4u32);
    let count = rng.random_range(1..=6u32);
    let mut blocks = Vec::new();
    for i in 0..count {
        if i > 0 && rng.random_range(0.0..1.0) < 0.2 {
            continue;
        }
        let s = lowest << i;
        let r = s as i64;
        let offset = rng.random_range(-1.0..1.0);
        let k = Kernel::from_fn(-r, r, |x| (rng.random_range(-1.0..1.0) + offset) * w(x as f64 / s as f64 * 2.0));
        blocks.push((k, s));
    }
    let total = blocks.iter().fold(Kernel::zero(), |acc, (k, _)| acc.add(k));
    let scale = 1.0 / total.l1().max(f64::MIN_POSITIVE);
    (
        blocks.into_iter().map(|(k, s)| (k.scale(scale), s)).collect(),
        lowest,
    )
}

fn c5_telescope_suite() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(C5_SEED);
    let (mut worst_mean, mut worst_recon, mut worst_gain): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut failures = 0usize;
    for _ in 0..C5_CASES {
        let (blocks, lowest) = telescope_case(&mut rng);
        let tel = telescope(&blocks, lowest, None, 0.5).unwrap();
        let input = blocks.iter().fold(Kernel::zero(), |acc, (k, _)| acc.add(k));
        let mut output = Kernel::zero();
        let d_in = blocks
            .iter()
            .map(|(k, s)| check_block(k, *s, 0.5, None).d_min)
            .fold(0.0, f64::max);
        for b in &tel.blocks {
            let mass: f64 = b.kernel.values().iter().sum();
            let rel = mass.abs() / b.kernel.l1();
            worst_mean = worst_mean.max(rel);
            let rep = check_block(&b.kernel, b.scale, 0.5, None);
            if rel > C5_MEAN_REL || !rep.passes() || b.kernel.radius() > b.scale as i64 {
                failures += 1;
            }
            worst_gain = worst_gain.max(rep.d_min / d_in);
            output = output.add(&b.kernel);
        }
        if let Some(t) = &tel.tail {
            let rep = check_block(&t.kernel, t.scale, 0.5, None);
            if !rep.pass_ii || !rep.pass_iii || !rep.pass_iv {
                failures += 1;
            }
            worst_gain = worst_gain.max(rep.d_min / d_in);
            output = output.add(&t.kernel);
        }
        worst_recon = worst_recon.max(output.max_abs_diff(&input));
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        failures == 0 && worst_recon <= C5_RECON_ABS && elapsed <= C5_SECONDS,
        format!(
            "{C5_CASES} cases, {failures} failing blocks; max |mean|/l1 {worst_mean:.2e}, max reconstruction error {worst_recon:.2e}, max D_out/D_in {worst_gain:.3}; {elapsed:.2} s"
        ),
    )
}

/// Maximal dyadic intervals with `avg |f| > lam`, by scanning every size.
fn brute_cubes(f: &Kernel, lam: f64) -> Vec<DyadicInterval> {
    let (lo, hi) = f.support().unwrap();
    let avg = |q: &DyadicInterval| (q.start()..q.end()).map(|x| f.get(x).abs()).sum::<f64>() / q.len() as f64;
    let mut top = 0u32;
    while !(-(1i64 << top) <= lo && hi < (1i64 << top)) || f.l1() / (1u64 << top) as f64 > lam {
        top += 1;
    }
    let mut out = Vec::new();
    for k in 0..=top {
        let len = 1i64 << k;
        for j in lo.div_euclid(len)..=hi.div_euclid(len) {
            let q = DyadicInterval { k, j };
            if avg(&q) <= lam {
                continue;
            }
            let mut p = q;
            let mut maximal = true;
            while p.k < top + 1 {
                p = p.parent();
                if avg(&p) > lam {
                    maximal = false;
                    break;
                }
            }
            if maximal {
                out.push(q);
            }
        }
    }
    out.sort_by_key(|q| q.start());
    out
}

fn c6_cz_decomposition_suite() -> Verdict {
    let p = params(1 << 10, Mode::Gap);
    let mut rng = ChaCha8Rng::seed_from_u64(C6_SEED);
    let mut problems: Vec<String> = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    let mut total_cubes = 0usize;
    for case in 0..C6_CASES {
        let len = rng.random_range(4..=512usize);
        let f = random_signal(&mut rng, len);
        if f.is_zero() {
            continue;
        }
        let lam = rng.random_range(0.1..5.0);
        let s = 1u64 << rng.random_range(1..=10u32);
        let d = match cz_decompose(&f, lam, s, &p) {
            Ok(d) => d,
            Err(e) => {
                problems.push(format!("case {case}: {e}"));
                continue;
            }
        };
        total_cubes += d.cubes.len();
        if d.cubes != brute_cubes(&f, lam) {
            problems.push(format!("case {case}: cubes differ from brute force"));
        }
        let (lo, hi) = f.support().unwrap();
        let span_lo = d.cubes.first().map_or(lo, |q| q.start().min(lo));
        let span_hi = d.cubes.last().map_or(hi, |q| (q.end() - 1).max(hi));
        for x in span_lo..=span_hi {
            if d.reconstruct_at(x) != f.get(x) {
                problems.push(format!("case {case}: reconstruction differs at x = {x}"));
                break;
            }
        }
        if d.g.max_abs() > lam {
            problems.push(format!("case {case}: |g| = {} > {lam}", d.g.max_abs()));
        }
        let doubled: i64 = d.cubes.iter().map(|q| 2 * q.len()).sum();
        if doubled as f64 > 2.0 * f.l1() / lam {
            problems.push(format!("case {case}: sum |Q*| = {doubled} > {}", 2.0 * f.l1() / lam));
        }
        for q in &d.cubes {
            let b = &d.big_b_parts[&q.k];
            let r = &d.big_b_residuals[&q.k];
            let mean = exact_sum((q.start()..q.end()).flat_map(|x| [b.get(x), r.get(x)]));
            let low_l1: f64 = (q.start()..q.end())
                .map(|x| f.get(x))
                .filter(|v| v.abs() <= d.threshold)
                .map(f64::abs)
                .sum();
            let rel = if low_l1 > 0.0 { mean.abs() / low_l1 } else { mean.abs() };
            worst_mean = worst_mean.max(rel);
            if rel > C6_MEAN_REL {
                problems.push(format!("case {case}: B mean {rel:.2e} on [{}, {})", q.start(), q.end()));
            }
            let b_l1: f64 = (q.start()..q.end()).map(|x| b.get(x).abs()).sum();
            worst_ratio = worst_ratio.max(b_l1 / (lam * q.len() as f64));
        }
    }
    let head = problems.first().cloned().unwrap_or_default();
    verdict(
        problems.is_empty(),
        format!(
            "{C6_CASES} cases, {total_cubes} cubes, {} problems {head}; max relative B mean {worst_mean:.2e}; suite max ||B||_1/(lambda |Q|) = {worst_ratio:.4}",
            problems.len()
        ),
    )
}

fn decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn c7_commutator_decay() -> Verdict {
    let p = params(C7_M, Mode::Gap);
    let band: Vec<u64> = p.upper_scales().scales().to_vec();
    let literal: Vec<_> = band.iter().map(|&s| commutator(s, &p).unwrap()).collect();
    let lit_norm: Vec<f64> = literal.iter().map(|c| c.norm_sq).collect();
    let lit_scaled: Vec<f64> = literal.iter().map(|c| c.scaled).collect();
    let literal_ok = decreasing(&lit_norm) && max_min_ratio(&lit_scaled) <= C7_RATIO;
    // the band at a single M holds one or two scales; s = M across a range of M
    // carries the trend
    let mut sup_norm = Vec::new();
    let mut sup_scaled = Vec::new();
    for m in powers(C7_SUPPLEMENT) {
        let pm = params(m, Mode::Gap);
        let c = commutator_unchecked(m, &pm).unwrap();
        sup_norm.push(c.norm_sq);
        sup_scaled.push(c.scaled);
    }
    let sup_ok = decreasing(&sup_norm) && max_min_ratio(&sup_scaled) <= C7_RATIO;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
    verdict(
        literal_ok && sup_ok,
        format!(
            "band {band:?}: ||C_s||^2 = [{}]; s = M over 2^{}..2^{}: ||C||^2 = [{}], scaled max/min {:.3} (limit {C7_RATIO})",
            fmt(&lit_norm),
            C7_SUPPLEMENT.start(),
            C7_SUPPLEMENT.end(),
            fmt(&sup_norm),
            max_min_ratio(&sup_scaled)
        ),
    )
}

fn c8_rho_k_split() -> Verdict {
    let p = params(C8_M, Mode::Gap);
    let scales: Vec<u64> = dyadic_range(pow_m(p.m, p.theta), p.m as f64).scales().to_vec();
    let mut diag = Vec::new();
    let mut c_rho = Vec::new();
    let mut k_bad: Vec<String> = Vec::new();
    for (i, &s1) in scales.iter().enumerate() {
        for &s2 in &scales[i..] {
            let r = rho_k_split(s1, s2, &p).unwrap();
            if s1 == s2 {
                // direct oracle: P(0) = sum_y H(y) H(-y)
                let b = block_kernel(s1, &p, false).unwrap();
                let at0: f64 = b.iter().map(|(y, v)| v * b.get(-y)).sum();
                assert!((r.diag - at0).abs() <= 1e-12 * at0.abs(), "diag mismatch at s = {s1}");
                diag.push((s1 as f64, r.diag.abs()));
            }
            c_rho.push(r.c_rho);
            if (s1 as f64) / (s2 as f64) <= C8_K_ZERO_RATIO {
                let sup_p = r.rho.max_abs().max(r.k.max_abs());
                if r.k.max_abs() > C8_K_ZERO_REL * sup_p {
                    k_bad.push(format!("({s1},{s2}): {:.2e}", r.k.max_abs()));
                }
            }
        }
    }
    let slope = loglog_slope(&diag);
    let target = -1.0 / ALPHA;
    let ratio = max_min_ratio(&c_rho);
    let slope_ok = (slope - target).abs() <= C8_SLOPE_TOL;
    let ratio_ok = ratio <= C8_RATIO;
    verdict(
        slope_ok && ratio_ok && k_bad.is_empty(),
        format!(
            "diag slope {slope:.4} (target {target:.4} +- {C8_SLOPE_TOL}); sup|rho| s2 max/min {ratio:.3}; k nonzero at ratio <= 1/4: [{}]",
            k_bad.join(", ")
        ),
    )
}

fn inversions(v: &[f64]) -> usize {
    v.windows(2).filter(|w| w[1] >= w[0]).count()
}

fn c9_expansion_trend() -> Verdict {
    let p = params(1 << 10, Mode::Gap);
    let (_, rows) = asymptotics_sweep(one(), one(), &p, &powers(C9_EXPONENTS)).unwrap();
    assert_eq!(rows.len(), C9_EXPONENTS.count(), "every row computes");
    let mut ok = true;
    let mut parts = Vec::new();
    for j in 0..3 {
        let v: Vec<f64> = rows.iter().map(|r| r.combinations[j].norm()).collect();
        let inv = inversions(&v);
        let good = v.last() < v.first() && inv <= C9_INVERSIONS;
        ok &= good;
        parts.push(format!(
            "comb{} [{}] inversions {inv}",
            j + 1,
            v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
        ));
    }
    let gamma_min = rows.iter().map(|r| r.expansion.gamma.norm()).fold(f64::INFINITY, f64::min);
    ok &= gamma_min > 0.0;
    verdict(ok, format!("{}; min |gamma~| = {gamma_min:.4}", parts.join("; ")))
}

fn write_chart(name: &str, series: Vec<Series>) -> String {
    let (x_scale, y_scale) = auto_scales(&series);
    let chart = Chart {
        title: name.to_string(),
        x_label: "M".into(),
        x_scale,
        y_scale,
        series,
    };
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(format!("{name}.svg"));
    std::fs::write(&path, render(&chart)).unwrap();
    path.display().to_string()
}

fn c10_weak_type_contrast() -> Verdict {
    let p = params(1 << 10, Mode::Gap);
    let ms = powers(C10_EXPONENTS);
    let (_, h) = weak_sweep(WeakFamily::H, one(), &p, &ms).unwrap();
    let (_, hsq) = weak_sweep(WeakFamily::HSquared, one(), &p, &ms).unwrap();
    assert_eq!(h.len(), ms.len());
    assert_eq!(hsq.len(), ms.len());
    let h_vals: Vec<f64> = h.iter().map(|r| r.weak_l1).collect();
    let sq_vals: Vec<f64> = hsq.iter().map(|r| r.weak_l1).collect();
    let ratio = max_min_ratio(&h_vals);
    let mut run = 0usize;
    let mut best = 0usize;
    for w in sq_vals.windows(2) {
        run = if w[1] > w[0] { run + 1 } else { 0 };
        best = best.max(run);
    }
    let growth = (sq_vals[sq_vals.len() - 1] / sq_vals[0]).log2() / (ms.len() - 1) as f64;
    let to_series = |name: &str, v: &[f64]| Series {
        name: name.into(),
        points: ms.iter().map(|&m| m as f64).zip(v.iter().copied()).collect(),
    };
    let chart = write_chart(
        "weak_type_contrast",
        vec![to_series("weak_l1(H)", &h_vals), to_series("weak_l1(H*H)", &sq_vals)],
    );
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    verdict(
        ratio <= C10_RATIO && best >= C10_RUN,
        format!(
            "H: [{}] max/min {ratio:.3}; H*H: [{}] longest increasing run {best} (need {C10_RUN}), log2 growth per doubling {growth:.4}; chart {chart}",
            fmt(&h_vals),
            fmt(&sq_vals)
        ),
    )
}

fn c11_algebra_products() -> Verdict {
    let p = params(C11_M, Mode::Gap);
    let basis = Basis::new(&p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(C11_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..C11_PAIRS {
        let a = random_element(&mut rng, &basis, C11_M);
        let b = random_element(&mut rng, &basis, C11_M);
        let prod = algebra_product(&a, &b, &basis).unwrap();
        worst = worst.max(prod.ratio);
    }
    verdict(
        worst <= C11_BOUND,
        format!("{C11_PAIRS} pairs at M = {C11_M}: worst ||ab||/(||a|| ||b||) = {worst:.4} (bound {C11_BOUND})"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("C1 resolvent identity", c1_resolvent_identity),
        ("C2 Neumann oracle", c2_neumann_oracle),
        ("C3 structural zeros", c3_structural_zeros),
        ("C4 H^2(0) decay", c4_square_at_origin),
        ("C5 telescoping re-blocker", c5_telescope_suite),
        ("C6 CZ decomposition", c6_cz_decomposition_suite),
        ("C7 commutator decay", c7_commutator_decay),
        ("C8 rho/k split", c8_rho_k_split),
        ("C9 expansion trend", c9_expansion_trend),
        ("C10 weak-type contrast", c10_weak_type_contrast),
        ("C11 algebra products", c11_algebra_products),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|pat| name.contains(pat.as_str())) {
            continue;
        }
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
