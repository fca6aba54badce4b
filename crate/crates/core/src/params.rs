//! Parameter validation, dyadic scale grids and the fixed cutoff family.
//!
//! The ramp used throughout is the standard `exp(-1/u)` smooth step:
//! `w(t) = 1` on `|t| <= 1`, `w(t) = 0` on `|t| >= 2`, and in between
//! `w(t) = g(2-|t|) / (g(2-|t|) + g(|t|-1))` with `g(u) = exp(-1/u)`.
//! Every constant the laboratory measures is relative to this family.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernels larger than this many points are refused up front.
pub const MAX_KERNEL_POINTS: u64 = 1 << 31;

/// Version tag of the cutoff family, part of every kernel cache key.
pub const CUTOFF_VERSION: &str = "w-exp-ramp-1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// All dyadic scales `M^theta <= s <= M`.
    Full,
    /// Scales in the lower band `[M^(a-1-d), M^(a-1)]` and the upper band `[M^(1-d), M]`.
    Gap,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(Mode::Full),
            "gap" => Ok(Mode::Gap),
            other => Err(Error::InvalidParams(format!(
                "unknown mode `{other}` (expected full|gap)"
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Full => "full",
            Mode::Gap => "gap",
        })
    }
}

/// Unvalidated parameter record, as read from a config file or flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub alpha: f64,
    pub delta: f64,
    pub m: u64,
    pub mode: Mode,
    pub omega: Option<f64>,
    pub gamma_resc: Option<f64>,
    pub c_split: Option<f64>,
}

impl RawParams {
    pub fn new(alpha: f64, delta: f64, m: u64, mode: Mode) -> Self {
        RawParams {
            alpha,
            delta,
            m,
            mode,
            omega: None,
            gamma_resc: None,
            c_split: None,
        }
    }
}

/// A validated parameter set. Construct through [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: f64,
    pub delta: f64,
    pub theta: f64,
    pub m: u64,
    pub mode: Mode,
    pub omega: f64,
    pub gamma_resc: f64,
    pub c_split: f64,
}

pub const DEFAULT_OMEGA: f64 = 0.5;
pub const DEFAULT_C_SPLIT: f64 = 8.0;

/// Ascending list of dyadic integers `2^j`, `j >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScaleGrid {
    scales: Vec<u64>,
}

impl ScaleGrid {
    pub fn new(scales: Vec<u64>) -> Result<Self> {
        for w in scales.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidParams(format!(
                    "scale grid not strictly increasing at {} >= {}",
                    w[0], w[1]
                )));
            }
        }
        for &s in &scales {
            check_dyadic(s)?;
        }
        Ok(ScaleGrid { scales })
    }

    /// Dyadic scales from `lo` to `hi` inclusive (both must be dyadic).
    pub fn span(lo: u64, hi: u64) -> Result<Self> {
        check_dyadic(lo)?;
        check_dyadic(hi)?;
        let mut v = Vec::new();
        let mut s = lo;
        while s <= hi {
            v.push(s);
            s *= 2;
        }
        Ok(ScaleGrid { scales: v })
    }

    pub fn scales(&self) -> &[u64] {
        &self.scales
    }
    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
    pub fn len(&self) -> usize {
        self.scales.len()
    }
    pub fn first(&self) -> Option<u64> {
        self.scales.first().copied()
    }
    pub fn last(&self) -> Option<u64> {
        self.scales.last().copied()
    }
}

pub fn is_dyadic(s: u64) -> bool {
    s >= 2 && s.is_power_of_two()
}

pub fn check_dyadic(s: u64) -> Result<()> {
    if is_dyadic(s) {
        Ok(())
    } else {
        Err(Error::NotDyadic(s))
    }
}

// Relative slack for endpoint comparisons; band endpoints such as 2^14^0.5
// must land on 128 and not on 127.99999999999997.
const ENDPOINT_SLACK: f64 = 1e-12;

/// All `s = 2^j` (`j >= 1`) with `lo <= s <= hi`, ascending. Empty when none.
pub fn dyadic_range(lo: f64, hi: f64) -> ScaleGrid {
    let mut scales = Vec::new();
    if !(lo > 0.0) || !(hi >= lo) {
        return ScaleGrid { scales };
    }
    for j in 1..=62u32 {
        let s = 1u64 << j;
        let sf = s as f64;
        if sf * (1.0 + ENDPOINT_SLACK) >= lo && sf <= hi * (1.0 + ENDPOINT_SLACK) {
            scales.push(s);
        }
    }
    ScaleGrid { scales }
}

/// `m^e`, computed through log2 so exact powers of two stay exact.
pub fn pow_m(m: u64, e: f64) -> f64 {
    (e * (m as f64).log2()).exp2()
}

/// Validates a raw record.
///
/// Checks run in this order: `alpha > 1`, `delta > 0`, `theta in (0,1)`,
/// non-empty scale bands, the smallness condition
/// `(alpha-1)/alpha + delta < alpha-1-delta`, support separation of the two
/// bands (gap mode) and the memory footprint.
pub fn validate(raw: &RawParams) -> Result<Params> {
    let RawParams {
        alpha,
        delta,
        m,
        mode,
        ..
    } = *raw;
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::InvalidParams(format!("alpha must exceed 1, got {alpha}")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParams(format!("delta must be positive, got {delta}")));
    }
    if m < 2 {
        return Err(Error::InvalidParams(format!("M must be at least 2, got {m}")));
    }
    let theta = alpha - 1.0 - delta;
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParams(format!(
            "theta = alpha-1-delta = {theta} must lie in (0,1)"
        )));
    }
    let omega = raw.omega.unwrap_or(DEFAULT_OMEGA);
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::InvalidParams(format!("omega must lie in (0,1], got {omega}")));
    }
    let gamma_resc = raw.gamma_resc.unwrap_or(omega / 2.0);
    let c_split = raw.c_split.unwrap_or(DEFAULT_C_SPLIT);
    if !(c_split > 0.0) {
        return Err(Error::InvalidParams(format!("c_split must be positive, got {c_split}")));
    }

    let params = Params {
        alpha,
        delta,
        theta,
        m,
        mode,
        omega,
        gamma_resc,
        c_split,
    };

    match mode {
        Mode::Gap => {
            let (lo, hi) = params.lower_band();
            if params.lower_scales().is_empty() {
                return Err(Error::EmptyBand { band: "P_M^-", lo, hi });
            }
            let (lo, hi) = params.upper_band();
            if params.upper_scales().is_empty() {
                return Err(Error::EmptyBand { band: "P_M^+", lo, hi });
            }
        }
        Mode::Full => {
            if params.scales().is_empty() {
                let lo = pow_m(m, theta);
                return Err(Error::EmptyBand {
                    band: "[M^theta, M]",
                    lo,
                    hi: m as f64,
                });
            }
        }
    }

    let lhs = (alpha - 1.0) / alpha + delta;
    if !(lhs < theta) {
        return Err(Error::InvalidParams(format!(
            "smallness condition violated: (alpha-1)/alpha + delta = {lhs:.6} is not < alpha-1-delta = {theta:.6}"
        )));
    }

    if mode == Mode::Gap {
        // max |x| in H^- is at most 2*s_max - 1, min |x| in H^+ is at least s_min/2
        let top_lower = *params.lower_scales().scales().last().unwrap();
        let bottom_upper = params.upper_scales().scales()[0];
        if 2 * top_lower >= bottom_upper / 2 {
            return Err(Error::InvalidParams(format!(
                "bands are not support-separated: 2*{top_lower} >= {bottom_upper}/2 (increase M)"
            )));
        }
    }

    let points = params.support_points();
    if points > MAX_KERNEL_POINTS {
        return Err(Error::Resource(format!(
            "assembled kernel needs {points} points, limit is {MAX_KERNEL_POINTS}"
        )));
    }
    Ok(params)
}

impl Params {
    /// Lower band endpoints `[M^(alpha-1-delta), M^(alpha-1)]`.
    pub fn lower_band(&self) -> (f64, f64) {
        (pow_m(self.m, self.theta), pow_m(self.m, self.alpha - 1.0))
    }

    /// Upper band endpoints `[M^(1-delta), M]`.
    pub fn upper_band(&self) -> (f64, f64) {
        (pow_m(self.m, 1.0 - self.delta), self.m as f64)
    }

    pub fn lower_scales(&self) -> ScaleGrid {
        let (lo, hi) = self.lower_band();
        dyadic_range(lo, hi)
    }

    pub fn upper_scales(&self) -> ScaleGrid {
        let (lo, hi) = self.upper_band();
        dyadic_range(lo, hi)
    }

    /// The dyadic scales making up `H_M` in the configured mode.
    pub fn scales(&self) -> ScaleGrid {
        match self.mode {
            Mode::Full => dyadic_range(pow_m(self.m, self.theta), self.m as f64),
            Mode::Gap => {
                let mut v = self.lower_scales().scales().to_vec();
                for s in self.upper_scales().scales() {
                    if !v.contains(s) {
                        v.push(*s);
                    }
                }
                ScaleGrid { scales: v }
            }
        }
    }

    /// First dyadic scale `>= M^theta`; the lowest scale of every CZ profile.
    pub fn first_scale(&self) -> u64 {
        dyadic_range(pow_m(self.m, self.theta), f64::MAX)
            .first()
            .expect("some dyadic scale exceeds M^theta")
    }

    /// Number of points in the dense window of the assembled `H_M`.
    pub fn support_points(&self) -> u64 {
        let top = self.scales().last().unwrap_or(2);
        4 * top + 1
    }

    /// Copy with a different truncation level, revalidated.
    pub fn with_m(&self, m: u64) -> Result<Params> {
        validate(&RawParams {
            alpha: self.alpha,
            delta: self.delta,
            m,
            mode: self.mode,
            omega: Some(self.omega),
            gamma_resc: Some(self.gamma_resc),
            c_split: Some(self.c_split),
        })
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            alpha: self.alpha,
            delta: self.delta,
            m: self.m,
            mode: self.mode,
            omega: Some(self.omega),
            gamma_resc: Some(self.gamma_resc),
            c_split: Some(self.c_split),
        }
    }
}

#[inline]
fn g(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// The plateau cutoff `w`: 1 on `|t| <= 1`, 0 on `|t| >= 2`, smooth between.
#[inline]
pub fn w(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let p = g(2.0 - a);
        p / (p + g(a - 1.0))
    }
}

/// The annular cutoff `w(t) - w(2t)`, supported in `1/2 < |t| < 2`.
#[inline]
pub fn w_tilde(t: f64) -> f64 {
    w(t) - w(2.0 * t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpKind {
    W,
    WTilde,
    PsiNormalized,
}

/// `psi(x/s) / c_s` with `c_s = sum_y psi(y/s)`; `psi` is the same ramp as `w`.
#[derive(Debug, Clone, Copy)]
pub struct NormalizedPsi {
    pub s: u64,
    pub c: f64,
}

impl NormalizedPsi {
    pub fn new(s: u64) -> Self {
        let sf = s as f64;
        let r = 2 * s as i64;
        let c = (-r..=r).map(|y| w(y as f64 / sf)).sum();
        NormalizedPsi { s, c }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        w(x / self.s as f64) / self.c
    }

    /// Integer support radius: the bump vanishes for `|x| >= 2s`.
    pub fn radius(&self) -> i64 {
        2 * self.s as i64 - 1
    }
}

/// Evaluates one member of the cutoff family at scale `s`.
pub fn bump(kind: BumpKind, s: u64, x: f64) -> f64 {
    let sf = s.max(1) as f64;
    match kind {
        BumpKind::W => w(x / sf),
        BumpKind::WTilde => w_tilde(x / sf),
        BumpKind::PsiNormalized => NormalizedPsi::new(s.max(1)).eval(x),
    }
}
