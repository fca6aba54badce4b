use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("scale band {band} = [{lo:.6}, {hi:.6}] contains no dyadic scale >= 2")]
    EmptyBand { band: &'static str, lo: f64, hi: f64 },

    #[error("scale {0} is not a dyadic integer >= 2")]
    NotDyadic(u64),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("symbol grid of {n} points is too small for support length {len} (need >= {need})")]
    GridTooSmall { n: usize, len: usize, need: usize },

    #[error("resolvent margin {margin:.3e} is below tolerance {tol:.3e}")]
    MarginTooSmall { margin: f64, tol: f64 },

    #[error("aliasing check failed at N={n}: max difference {diff:.3e} exceeds {tol:.3e}; increase N")]
    Aliasing { n: usize, diff: f64, tol: f64 },

    #[error("gram system is ill-conditioned (cond {cond:.3e}); nearly collinear pair: {pair}")]
    IllConditioned { cond: f64, pair: String },

    #[error("block at scale {scale} is not mean-free (mean {mean:.3e}); run telescope first")]
    NotMeanFree { scale: u64, mean: f64 },

    #[error("scale grid does not cover the kernel support; required top scale {required}")]
    GridDoesNotCover { required: u64 },

    #[error("scale {s} lies outside the upper band [{lo:.3}, {hi:.3}]")]
    OutsideUpperBand { s: u64, lo: f64, hi: f64 },

    #[error("scale ordering violated: s1={s1} must satisfy lower <= s1 <= s2 <= M")]
    Ordering { s1: u64, s2: u64 },

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
