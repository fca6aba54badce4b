//! Kernel serialization.
//!
//! Text: a header line `# base=<int> len=<int>` followed by one value per
//! line, 17 significant digits. Binary: `RHK1`, base as i64 LE, len as u64 LE,
//! then the values as f64 LE.

use std::io::{BufRead, Read, Write};

use super::Kernel;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RHK1";

pub fn write_text(k: &Kernel, mut out: impl Write) -> Result<()> {
    writeln!(out, "# base={} len={}", k.base(), k.len())?;
    for v in k.values() {
        writeln!(out, "{v:.16e}")?;
    }
    Ok(())
}

pub fn read_text(input: impl BufRead) -> Result<Kernel> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty kernel file".into()))??;
    let (base, len) = parse_header(&header)?;
    let mut values = Vec::with_capacity(len);
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        values.push(
            t.parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad value `{t}`: {e}")))?,
        );
    }
    if values.len() != len {
        return Err(Error::Parse(format!(
            "header says len={len}, found {} values",
            values.len()
        )));
    }
    Ok(Kernel::new(base, values))
}

fn parse_header(h: &str) -> Result<(i64, usize)> {
    let bad = || Error::Parse(format!("bad kernel header `{h}`"));
    let rest = h.trim().strip_prefix('#').ok_or_else(bad)?;
    let mut base = None;
    let mut len = None;
    for tok in rest.split_whitespace() {
        if let Some(v) = tok.strip_prefix("base=") {
            base = Some(v.parse::<i64>().map_err(|_| bad())?);
        } else if let Some(v) = tok.strip_prefix("len=") {
            len = Some(v.parse::<usize>().map_err(|_| bad())?);
        }
    }
    Ok((base.ok_or_else(bad)?, len.ok_or_else(bad)?))
}

pub fn write_binary(k: &Kernel, mut out: impl Write) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&k.base().to_le_bytes())?;
    out.write_all(&(k.len() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * k.len());
    for v in k.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_binary(mut input: impl Read) -> Result<Kernel> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("not a binary kernel file".into()));
    }
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b8)?;
    let base = i64::from_le_bytes(b8);
    input.read_exact(&mut b8)?;
    let len = u64::from_le_bytes(b8) as usize;
    let mut raw = vec![0u8; 8 * len];
    input.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Kernel::new(base, values))
}
