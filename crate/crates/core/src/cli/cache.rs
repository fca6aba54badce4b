//! On-disk cache of assembled operators, keyed by
//! `(alpha, delta, M, mode, cutoff version)`.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::kernel::io::{read_binary, write_binary};
use crate::kernel::{assemble, Assembled, Kernel};
use crate::params::{Mode, Params, CUTOFF_VERSION};

pub const CACHE_ENV: &str = "RHLAB_CACHE";

pub fn cache_key(p: &Params) -> String {
    let text = format!(
        "alpha={:e};delta={:e};M={};mode={};cutoff={CUTOFF_VERSION}",
        p.alpha, p.delta, p.m, p.mode
    );
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Cache directory from `RHLAB_CACHE`, if set and non-empty.
pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

fn path_for(dir: &Path, key: &str, part: &str) -> PathBuf {
    dir.join(format!("{key}-{part}.rhk"))
}

fn load(path: &Path) -> Option<Kernel> {
    let f = File::open(path).ok()?;
    read_binary(BufReader::new(f)).ok()
}

fn store(path: &Path, k: &Kernel) -> Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        write_binary(k, &mut w)?;
        std::io::Write::flush(&mut w)?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// [`assemble`], reading from and filling the cache in `dir`. Unreadable
/// entries are rebuilt. Returns the operator and whether it was a hit.
pub fn assemble_cached(p: &Params, dir: Option<&Path>) -> Result<(Assembled, bool)> {
    let Some(dir) = dir else {
        return Ok((assemble(p)?, false));
    };
    let key = cache_key(p);
    let scales = p.scales().scales().to_vec();
    match p.mode {
        Mode::Full => {
            if let Some(h) = load(&path_for(dir, &key, "h")) {
                return Ok((
                    Assembled {
                        radius: h.radius(),
                        h,
                        minus: None,
                        plus: None,
                        scales,
                        minus_radius: None,
                        plus_inner_radius: None,
                    },
                    true,
                ));
            }
        }
        Mode::Gap => {
            if let (Some(minus), Some(plus)) = (
                load(&path_for(dir, &key, "minus")),
                load(&path_for(dir, &key, "plus")),
            ) {
                let h = minus.add(&plus);
                return Ok((
                    Assembled {
                        radius: h.radius(),
                        minus_radius: Some(minus.radius()),
                        plus_inner_radius: plus.inner_radius(),
                        h,
                        minus: Some(minus),
                        plus: Some(plus),
                        scales,
                    },
                    true,
                ));
            }
        }
    }
    let a = assemble(p)?;
    std::fs::create_dir_all(dir)?;
    match (&a.minus, &a.plus) {
        (Some(minus), Some(plus)) => {
            store(&path_for(dir, &key, "minus"), minus)?;
            store(&path_for(dir, &key, "plus"), plus)?;
        }
        _ => store(&path_for(dir, &key, "h"), &a.h)?,
    }
    Ok((a, false))
}
