//! Restart files.
//!
//! ```text
//!   magic "VLCK", version u32, t f64, components u32,
//!   params_len u64, params (JSON, UTF-8),
//!   rho field, then each momentum component (field binaries)
//! ```

use super::State;
use crate::domain::{read_field, write_field, PhysParams};
use crate::error::{Error, Result};
use std::io::{Read, Write};

const MAGIC: &[u8; 4] = b"VLCK";
const VERSION: u32 = 1;

pub fn write_checkpoint(w: &mut impl Write, s: &State, params: &PhysParams) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&s.t.to_le_bytes())?;
    w.write_all(&(s.m.len() as u32).to_le_bytes())?;
    let p = serde_json::to_vec(params)?;
    w.write_all(&(p.len() as u64).to_le_bytes())?;
    w.write_all(&p)?;
    write_field(w, &s.rho)?;
    for m in &s.m {
        write_field(w, m)?;
    }
    Ok(())
}

pub fn read_checkpoint(r: &mut impl Read) -> Result<(State, PhysParams)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a checkpoint file".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    if u32::from_le_bytes(b4) != VERSION {
        return Err(Error::Format("unsupported checkpoint version".into()));
    }
    r.read_exact(&mut b8)?;
    let t = f64::from_le_bytes(b8);
    r.read_exact(&mut b4)?;
    let comps = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b8)?;
    let mut p = vec![0u8; u64::from_le_bytes(b8) as usize];
    r.read_exact(&mut p)?;
    let params: PhysParams = serde_json::from_slice(&p)?;
    let rho = read_field(r)?;
    let m = (0..comps).map(|_| read_field(r)).collect::<Result<Vec<_>>>()?;
    Ok((State::new(rho, m, t)?, params))
}
