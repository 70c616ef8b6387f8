//! Flat little-endian binary layout:
//!
//! ```text
//!   magic   [u8; 4]   "VLFD" (field) | "VLPR" (profile)
//!   version u32       1
//!   d       u32
//!   n_perp  u64
//!   n3      u64
//!   L       f64
//!   values  f64 * count   (row-major, tangential fastest)
//! ```

use super::{Field, Grid, Profile};
use crate::error::{Error, Result};
use std::io::{Read, Write};

const FIELD_MAGIC: &[u8; 4] = b"VLFD";
const PROFILE_MAGIC: &[u8; 4] = b"VLPR";
const VERSION: u32 = 1;

fn write_header(w: &mut impl Write, magic: &[u8; 4], grid: &Grid) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(grid.d as u32).to_le_bytes())?;
    w.write_all(&(grid.n_perp as u64).to_le_bytes())?;
    w.write_all(&(grid.n3 as u64).to_le_bytes())?;
    w.write_all(&grid.l.to_le_bytes())?;
    Ok(())
}

fn read_header(r: &mut impl Read, magic: &[u8; 4]) -> Result<Grid> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m)?;
    if &m != magic {
        return Err(Error::Format(format!("bad magic {:?}, expected {:?}", m, magic)));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let d = read_u32(r)? as usize;
    let n_perp = read_u64(r)? as usize;
    let n3 = read_u64(r)? as usize;
    let l = read_f64(r)?;
    Grid::new(d, n_perp, n3, l).map_err(|e| Error::Format(e.to_string()))
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn write_values(w: &mut impl Write, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_values(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf)?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

pub fn write_field(w: &mut impl Write, f: &Field) -> Result<()> {
    write_header(w, FIELD_MAGIC, f.grid())?;
    write_values(w, f.values())
}

pub fn read_field(r: &mut impl Read) -> Result<Field> {
    let grid = read_header(r, FIELD_MAGIC)?;
    let values = read_values(r, grid.len())?;
    Field::from_values(grid, values)
}

pub fn write_profile(w: &mut impl Write, p: &Profile) -> Result<()> {
    write_header(w, PROFILE_MAGIC, p.grid())?;
    write_values(w, p.values())
}

pub fn read_profile(r: &mut impl Read) -> Result<Profile> {
    let grid = read_header(r, PROFILE_MAGIC)?;
    let values = read_values(r, grid.n_normal())?;
    Profile::from_values(grid, values)
}

/// Two-column CSV `x3,<name>` with a header row.
pub fn write_profile_csv(w: impl Write, name: &str, p: &Profile) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x3", name])?;
    for (j, v) in p.values().iter().enumerate() {
        out.write_record([format!("{:.17e}", p.grid().x3(j)), format!("{:.17e}", v)])?;
    }
    out.flush()?;
    Ok(())
}
