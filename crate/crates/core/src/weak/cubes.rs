use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kernel::{exact_sum, two_sum, Kernel, Neumaier};
use crate::params::{check_dyadic, Params};
use rand::{Rng, RngExt};

/// Relative tolerance on the mean of `B` over a cube.
pub const CUBE_MEAN_TOL: f64 = 1e-12;

/// The dyadic interval `[j 2^k, (j+1) 2^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicInterval {
    pub k: u32,
    pub j: i64,
}

impl DyadicInterval {
    pub fn len(&self) -> i64 {
        1i64 << self.k
    }

    pub fn start(&self) -> i64 {
        self.j << self.k
    }

    /// One past the last point.
    pub fn end(&self) -> i64 {
        (self.j + 1) << self.k
    }

    pub fn contains(&self, x: i64) -> bool {
        x >= self.start() && x < self.end()
    }

    pub fn parent(&self) -> DyadicInterval {
        DyadicInterval {
            k: self.k + 1,
            j: self.j.div_euclid(2),
        }
    }

    pub fn children(&self) -> [DyadicInterval; 2] {
        let k = self.k - 1;
        [
            DyadicInterval { k, j: 2 * self.j },
            DyadicInterval { k, j: 2 * self.j + 1 },
        ]
    }
}

/// Prefix sums of `|f|` for interval masses.
struct Masses {
    base: i64,
    prefix: Vec<f64>,
}

impl Masses {
    fn new(f: &Kernel) -> Self {
        let mut prefix = Vec::with_capacity(f.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for v in f.values() {
            acc += v.abs();
            prefix.push(acc);
        }
        Masses {
            base: f.base(),
            prefix,
        }
    }

    fn of(&self, q: DyadicInterval) -> f64 {
        let n = self.prefix.len() as i64 - 1;
        let a = (q.start() - self.base).clamp(0, n) as usize;
        let b = (q.end() - self.base).clamp(0, n) as usize;
        self.prefix[b] - self.prefix[a]
    }
}

fn avg(m: &Masses, q: DyadicInterval) -> f64 {
    m.of(q) / q.len() as f64
}

// Smallest grid interval covering [lo, hi] on one side of 0, doubled until
// its average is at most `lam`.
fn root(m: &Masses, lo: i64, hi: i64, lam: f64) -> DyadicInterval {
    let mut q = if lo >= 0 {
        let mut k = 0;
        while (1i64 << k) <= hi {
            k += 1;
        }
        DyadicInterval { k, j: 0 }
    } else {
        let mut k = 0;
        while -(1i64 << k) > lo {
            k += 1;
        }
        DyadicInterval { k, j: -1 }
    };
    while avg(m, q) > lam {
        q = DyadicInterval {
            k: q.k + 1,
            j: q.j,
        };
    }
    q
}

/// Maximal dyadic intervals with `|Q|^-1 sum_Q |f| > lam`, sorted by start.
/// The grid is anchored at 0, so the negative and positive half-lines are
/// searched from separate roots.
pub fn cz_cubes(f: &Kernel, lam: f64) -> Result<Vec<DyadicInterval>> {
    if !(lam > 0.0) {
        return Err(Error::InvalidParams(format!("level must be positive, got {lam}")));
    }
    let Some((lo, hi)) = f.support() else {
        return Ok(Vec::new());
    };
    let m = Masses::new(f);
    let mut out = Vec::new();
    let mut stack = Vec::new();
    if lo < 0 {
        stack.push(root(&m, lo, hi.min(-1), lam));
    }
    if hi >= 0 {
        stack.push(root(&m, lo.max(0), hi, lam));
    }
    while let Some(q) = stack.pop() {
        debug_assert!(avg(&m, q) <= lam);
        if q.k == 0 {
            continue;
        }
        for c in q.children() {
            let mass = m.of(c);
            if mass == 0.0 {
                continue;
            }
            if mass / c.len() as f64 > lam {
                out.push(c);
            } else {
                stack.push(c);
            }
        }
    }
    out.sort_by_key(|q| q.start());
    Ok(out)
}

/// `f = g + sum_k (b_k^(s) + B_k^(s) + E_k^(s))` for the cubes at level
/// `lambda_level`, with the split of each `b_k` at `|f| = lambda s^(1/alpha)`.
#[derive(Debug, Clone)]
pub struct CZDecomposition {
    pub lambda_level: f64,
    pub s: u64,
    pub threshold: f64,
    pub cubes: Vec<DyadicInterval>,
    pub g: Kernel,
    pub b_parts: BTreeMap<u32, Kernel>,
    /// `B = fl(f - E)` on each cube ...
    pub big_b_parts: BTreeMap<u32, Kernel>,
    /// ... and its rounding error, so `big_b_parts + big_b_residuals` is
    /// exactly `f - E` there.
    pub big_b_residuals: BTreeMap<u32, Kernel>,
    pub e_parts: BTreeMap<u32, Kernel>,
    /// `max_Q ||B|_Q||_1 / (lambda |Q|)`.
    pub b_ratio_max: f64,
}

impl CZDecomposition {
    /// `g + sum b + sum (B + E)` at `x`, summed exactly and rounded once.
    /// The parts add up to `f` in exact arithmetic and `f(x)` is a double,
    /// so this returns `f(x)` itself.
    pub fn reconstruct_at(&self, x: i64) -> f64 {
        let terms = std::iter::once(self.g.get(x))
            .chain(self.b_parts.values().map(|b| b.get(x)))
            .chain(self.big_b_parts.values().map(|b| b.get(x)))
            .chain(self.big_b_residuals.values().map(|b| b.get(x)))
            .chain(self.e_parts.values().map(|e| e.get(x)));
        exact_sum(terms)
    }

    /// Cube list followed by the l1 mass of each part.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "lambda={:.16e} s={} threshold={:.16e}", self.lambda_level, self.s, self.threshold);
        let _ = writeln!(out, "cubes={}", self.cubes.len());
        for q in &self.cubes {
            let _ = writeln!(out, "  [{}, {}) k={}", q.start(), q.end(), q.k);
        }
        let _ = writeln!(out, "g l1={:.16e}", self.g.l1());
        for (k, b) in &self.b_parts {
            let _ = writeln!(
                out,
                "k={k} b l1={:.16e} B l1={:.16e} E l1={:.16e}",
                b.l1(),
                self.big_b_parts[k].l1(),
                self.e_parts[k].l1()
            );
        }
        let _ = writeln!(out, "B ratio max={:.16e}", self.b_ratio_max);
        out
    }
}

fn check(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Internal(format!("decomposition invariant failed: {what}")))
    }
}

pub fn cz_decompose(f: &Kernel, lam: f64, s: u64, params: &Params) -> Result<CZDecomposition> {
    check_dyadic(s)?;
    let cubes = cz_cubes(f, lam)?;
    let threshold = lam * (s as f64).powf(1.0 / params.alpha);
    let (lo, hi) = f.support().unwrap_or((0, -1));

    let mut inside = vec![false; f.len()];
    let mut b_parts: BTreeMap<u32, Vec<(i64, f64)>> = BTreeMap::new();
    let mut big: BTreeMap<u32, Vec<(i64, f64)>> = BTreeMap::new();
    let mut big_res: BTreeMap<u32, Vec<(i64, f64)>> = BTreeMap::new();
    let mut e: BTreeMap<u32, Vec<(i64, f64)>> = BTreeMap::new();
    let mut b_ratio_max: f64 = 0.0;
    for q in &cubes {
        let a = q.start().max(lo);
        let z = (q.end() - 1).min(hi);
        let mut low = Neumaier::default();
        let mut low_l1 = 0.0;
        for x in a..=z {
            inside[(x - lo) as usize] = true;
            let v = f.get(x);
            if v.abs() <= threshold {
                low.add(v);
                low_l1 += v.abs();
            }
        }
        let average = low.total() / q.len() as f64;
        let bs = b_parts.entry(q.k).or_default();
        let bb = big.entry(q.k).or_default();
        let br = big_res.entry(q.k).or_default();
        let ee = e.entry(q.k).or_default();
        let mut mean = Neumaier::default();
        let mut l1 = 0.0;
        for x in q.start()..q.end() {
            let v = f.get(x);
            let low_v = if v.abs() <= threshold { v } else { 0.0 };
            if v != low_v {
                bs.push((x, v));
            }
            let (b, r) = two_sum(low_v, -average);
            mean.add(b);
            mean.add(r);
            l1 += b.abs();
            bb.push((x, b));
            br.push((x, r));
            ee.push((x, average));
        }
        check(mean.total().abs() <= CUBE_MEAN_TOL * low_l1, "B has mean zero on each cube")?;
        b_ratio_max = b_ratio_max.max(l1 / (lam * q.len() as f64));
    }

    let g = Kernel::new(
        lo,
        f.values()
            .iter()
            .zip(&inside)
            .map(|(v, i)| if *i { 0.0 } else { *v })
            .collect(),
    );
    let to_kernel = |m: BTreeMap<u32, Vec<(i64, f64)>>| -> BTreeMap<u32, Kernel> {
        m.into_iter()
            .map(|(k, pts)| {
                let kern = match (pts.first(), pts.last()) {
                    (Some(&(a, _)), Some(&(z, _))) => {
                        let mut vals = vec![0.0; (z - a + 1) as usize];
                        for (x, v) in pts {
                            vals[(x - a) as usize] += v;
                        }
                        Kernel::new(a, vals)
                    }
                    _ => Kernel::zero(),
                };
                (k, kern)
            })
            .collect()
    };
    let dec = CZDecomposition {
        lambda_level: lam,
        s,
        threshold,
        cubes,
        g,
        b_parts: to_kernel(b_parts),
        big_b_parts: to_kernel(big),
        big_b_residuals: to_kernel(big_res),
        e_parts: to_kernel(e),
        b_ratio_max,
    };

    check(dec.g.max_abs() <= lam, "|g| <= lambda")?;
    let parents: i64 = dec.cubes.iter().map(|q| 2 * q.len()).sum();
    check(parents as f64 <= 2.0 * f.l1() / lam * (1.0 + 1e-12), "sum |Q*| <= 2 ||f||_1 / lambda")?;
    for w in dec.cubes.windows(2) {
        check(w[0].end() <= w[1].start(), "cubes are disjoint")?;
    }
    let span_lo = dec.cubes.first().map_or(lo, |q| q.start().min(lo));
    let span_hi = dec.cubes.last().map_or(hi, |q| (q.end() - 1).max(hi));
    for x in span_lo..=span_hi {
        check(dec.reconstruct_at(x) == f.get(x), "pointwise reconstruction")?;
    }
    Ok(dec)
}

/// A test signal on `[base, base + len)`: a few plateaus of random height and
/// width plus isolated spikes, on a zero background.
pub fn random_signal<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Kernel {
    let len = len.max(1);
    let base = rng.random_range(-64i64..64);
    let mut v = vec![0.0; len];
    for _ in 0..rng.random_range(0..4) {
        let w = rng.random_range(1..=len.min(32));
        let start = rng.random_range(0..=len - w);
        let h = rng.random_range(-4.0..4.0);
        for x in &mut v[start..start + w] {
            *x += h;
        }
    }
    for _ in 0..rng.random_range(1..6) {
        let i = rng.random_range(0..len);
        v[i] += rng.random_range(-50.0..50.0);
    }
    Kernel::new(base, v)
}
