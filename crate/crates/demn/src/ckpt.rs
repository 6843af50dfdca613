//! Little-endian binary checkpoint primitives shared by the embedder and the
//! QA model containers.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::numcore::{Matrix, ParamGroup};

pub(crate) const MAGIC: &[u8; 4] = b"DEMN";

pub(crate) fn write_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

pub(crate) fn write_f64s(w: &mut impl Write, data: &[f64]) -> Result<()> {
    for x in data {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

pub(crate) fn write_string(w: &mut impl Write, s: &str) -> Result<()> {
    write_u32(w, s.len() as u32)?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

pub(crate) fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

pub(crate) fn read_f64s(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut buf = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        out.push(f64::from_le_bytes(buf));
    }
    Ok(out)
}

pub(crate) fn read_string(r: &mut impl Read) -> Result<String> {
    let len = read_u32(r)? as usize;
    if len > 1 << 20 {
        return Err(Error::Checkpoint(format!("string length {len} out of range")));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| Error::Checkpoint("non-utf8 string".into()))
}

/// Writes a tagged parameter block: name, shape, row-major values.
pub(crate) fn write_block(w: &mut impl Write, name: &str, m: &Matrix) -> Result<()> {
    write_string(w, name)?;
    write_u32(w, m.rows() as u32)?;
    write_u32(w, m.cols() as u32)?;
    write_f64s(w, m.data())
}

pub(crate) fn read_block(r: &mut impl Read) -> Result<ParamGroup> {
    let name = read_string(r)?;
    let rows = read_u32(r)? as usize;
    let cols = read_u32(r)? as usize;
    if rows == 0 || cols == 0 || rows.saturating_mul(cols) > 1 << 28 {
        return Err(Error::Checkpoint(format!(
            "block `{name}` has bad shape {rows}x{cols}"
        )));
    }
    let data = read_f64s(r, rows * cols)?;
    Ok(ParamGroup::new(name, Matrix::from_vec(rows, cols, data)?))
}

pub(crate) fn expect_magic_and_version(r: &mut impl Read, version: u32) -> Result<()> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!("bad magic {magic:?}")));
    }
    let got = read_u32(r)?;
    if got != version {
        return Err(Error::Checkpoint(format!(
            "unsupported version {got}, expected {version}"
        )));
    }
    Ok(())
}
