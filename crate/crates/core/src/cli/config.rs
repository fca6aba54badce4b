//! Experiment configuration: `key = value` lines, `#` comments, optional
//! `[section]` headers. Keys are unique across the file.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{validate, Mode, Params, RawParams};
use crate::weak::WeakFamily;

/// Sections a key may appear under; `None` is the top level.
const SECTIONS: [&str; 3] = ["params", "run", "sweep"];

/// Recognized keys and the section each belongs to.
const KEYS: [(&str, &str); 16] = [
    ("alpha", "params"),
    ("delta", "params"),
    ("M", "params"),
    ("mode", "params"),
    ("omega", "params"),
    ("gamma_resc", "params"),
    ("c_split", "params"),
    ("lambda", "run"),
    ("beta", "run"),
    ("seed", "run"),
    ("jobs", "run"),
    ("out", "run"),
    ("kernel", "run"),
    ("cases", "run"),
    ("m_list", "sweep"),
    ("family", "sweep"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    BuildKernel,
    CheckCz,
    Resolvent,
    Algebra,
    SweepWeak,
    CzDecompose,
    RhoK,
    Asymptotics,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::BuildKernel => "build-kernel",
            Command::CheckCz => "check-cz",
            Command::Resolvent => "resolvent",
            Command::Algebra => "algebra",
            Command::SweepWeak => "sweep-weak",
            Command::CzDecompose => "cz-decompose",
            Command::RhoK => "rho-k",
            Command::Asymptotics => "asymptotics",
        }
    }
}

/// Which assembled operator a kernel-level subcommand works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelChoice {
    H,
    Minus,
    Plus,
}

impl std::str::FromStr for KernelChoice {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "h" => Ok(KernelChoice::H),
            "minus" => Ok(KernelChoice::Minus),
            "plus" => Ok(KernelChoice::Plus),
            other => Err(format!("unknown kernel `{other}` (expected h|minus|plus)")),
        }
    }
}

/// One `key = value` entry with the line it came from (0 for flag overrides).
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

/// Parses the file syntax into entries, rejecting unknown keys and sections,
/// keys under the wrong section and duplicates.
pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut out: Vec<Entry> = Vec::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| cfg(line, format!("malformed section header `{t}`")))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(cfg(line, format!("unknown section `{name}`")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| cfg(line, format!("expected `key = value`, got `{t}`")))?;
        let key = k.trim();
        let value = v.trim().trim_matches('"').to_string();
        let home = KEYS
            .iter()
            .find(|(name, _)| *name == key)
            .map(|(_, s)| *s)
            .ok_or_else(|| cfg(line, format!("unknown key `{key}`")))?;
        if let Some(s) = &section {
            if s != home {
                return Err(cfg(line, format!("key `{key}` belongs in [{home}], found in [{s}]")));
            }
        }
        if let Some(prev) = out.iter().find(|e| e.key == key) {
            return Err(cfg(line, format!("duplicate key `{key}` (first set on line {})", prev.line)));
        }
        out.push(Entry {
            key: key.to_string(),
            value,
            line,
        });
    }
    Ok(out)
}

fn cfg(line: usize, msg: String) -> Error {
    Error::Config { line, msg }
}

/// Everything needed to run one subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Plan {
    pub command: Command,
    pub raw: RawParams,
    #[serde(skip)]
    pub params: Params,
    pub lambda: [f64; 2],
    pub beta: [f64; 2],
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: Option<String>,
    pub kernel: KernelChoice,
    pub cases: usize,
    pub m_list: Vec<u64>,
    pub family: String,
}

pub const DEFAULT_ALPHA: f64 = 1.5;
pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_CASES: usize = 100;

impl Plan {
    pub fn lambda_c(&self) -> Complex64 {
        Complex64::new(self.lambda[0], self.lambda[1])
    }

    pub fn beta_c(&self) -> Complex64 {
        Complex64::new(self.beta[0], self.beta[1])
    }

    pub fn weak_family(&self) -> Result<WeakFamily> {
        self.family.parse()
    }
}

/// Builds a plan from config text plus flag overrides (applied after the
/// file, replacing same-named keys). `M` is required; `alpha`, `delta` and
/// `mode` default to 1.5, 0.05 and `gap`.
pub fn plan_from(command: Command, text: &str, overrides: &[(String, String)]) -> Result<Plan> {
    let mut entries = parse_entries(text)?;
    for (k, v) in overrides {
        if !KEYS.iter().any(|(name, _)| name == k) {
            return Err(cfg(0, format!("unknown key `{k}`")));
        }
        entries.retain(|e| &e.key != k);
        entries.push(Entry {
            key: k.clone(),
            value: v.clone(),
            line: 0,
        });
    }
    let find = |k: &str| entries.iter().find(|e| e.key == k);
    fn parse<T: std::str::FromStr>(e: &Entry) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        e.value
            .parse::<T>()
            .map_err(|err| cfg(e.line, format!("bad value `{}` for `{}`: {err}", e.value, e.key)))
    }
    let opt_f = |k: &str| find(k).map(parse::<f64>).transpose();

    let m_entry = find("M").ok_or_else(|| cfg(0, "missing required key `M`".into()))?;
    let m = parse_count(m_entry)?;
    let mode = match find("mode") {
        Some(e) => e.value.parse::<Mode>()?,
        None => Mode::Gap,
    };
    let mut raw = RawParams::new(
        opt_f("alpha")?.unwrap_or(DEFAULT_ALPHA),
        opt_f("delta")?.unwrap_or(DEFAULT_DELTA),
        m,
        mode,
    );
    raw.omega = opt_f("omega")?;
    raw.gamma_resc = opt_f("gamma_resc")?;
    raw.c_split = opt_f("c_split")?;
    let params = validate(&raw)?;

    let lambda = match find("lambda") {
        Some(e) => parse_complex(e)?,
        None => [1.0, 0.0],
    };
    let beta = match find("beta") {
        Some(e) => parse_complex(e)?,
        None => [1.0, 0.0],
    };
    let m_list = match find("m_list") {
        Some(e) => parse_m_list(e)?,
        None => vec![m],
    };
    let family = match find("family") {
        Some(e) => {
            e.value.parse::<WeakFamily>().map_err(|err| cfg(e.line, err.to_string()))?;
            e.value.clone()
        }
        None => WeakFamily::H.name().to_string(),
    };
    let kernel = match find("kernel") {
        Some(e) => e.value.parse().map_err(|err: String| cfg(e.line, err))?,
        None if mode == Mode::Gap => KernelChoice::Minus,
        None => KernelChoice::H,
    };
    if kernel != KernelChoice::H && mode != Mode::Gap {
        return Err(cfg(find("kernel").map_or(0, |e| e.line), "band kernels need gap mode".into()));
    }
    Ok(Plan {
        command,
        raw,
        params,
        lambda,
        beta,
        seed: find("seed").map(parse::<u64>).transpose()?.unwrap_or(DEFAULT_SEED),
        jobs: find("jobs").map(parse::<usize>).transpose()?,
        out: find("out").map(|e| e.value.clone()),
        kernel,
        cases: find("cases").map(parse::<usize>).transpose()?.unwrap_or(DEFAULT_CASES),
        m_list,
        family,
    })
}

/// `re` or `re,im`.
fn parse_complex(e: &Entry) -> Result<[f64; 2]> {
    let bad = |why: String| cfg(e.line, format!("bad complex value `{}` for `{}`: {why}", e.value, e.key));
    let mut it = e.value.split(',').map(str::trim);
    let re = it.next().unwrap_or("").parse::<f64>().map_err(|x| bad(x.to_string()))?;
    let im = match it.next() {
        Some(t) => t.parse::<f64>().map_err(|x| bad(x.to_string()))?,
        None => 0.0,
    };
    if it.next().is_some() {
        return Err(bad("expected at most two components".into()));
    }
    Ok([re, im])
}

/// An integer or a power of two written `2^k`.
fn parse_count_str(t: &str) -> std::result::Result<u64, String> {
    let t = t.trim();
    if let Some(k) = t.strip_prefix("2^") {
        let k: u32 = k.parse().map_err(|e| format!("{e}"))?;
        if k >= 63 {
            return Err(format!("exponent {k} too large"));
        }
        return Ok(1u64 << k);
    }
    t.parse::<u64>().map_err(|e| format!("{e}"))
}

fn parse_count(e: &Entry) -> Result<u64> {
    parse_count_str(&e.value).map_err(|why| cfg(e.line, format!("bad value `{}` for `{}`: {why}", e.value, e.key)))
}

/// Comma-separated items, each a count or a dyadic range `2^a..2^b`.
fn parse_m_list(e: &Entry) -> Result<Vec<u64>> {
    let bad = |why: String| cfg(e.line, format!("bad m_list `{}`: {why}", e.value));
    let mut out = Vec::new();
    for item in e.value.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let lo = parse_count_str(a).map_err(bad)?;
            let hi = parse_count_str(b).map_err(bad)?;
            if !lo.is_power_of_two() || !hi.is_power_of_two() || lo > hi {
                return Err(bad(format!("range `{item}` must run between powers of two")));
            }
            let mut m = lo;
            while m <= hi {
                out.push(m);
                m *= 2;
            }
        } else {
            out.push(parse_count_str(item).map_err(bad)?);
        }
    }
    if out.is_empty() {
        return Err(bad("empty list".into()));
    }
    if out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("values must be strictly increasing".into()));
    }
    Ok(out)
}
