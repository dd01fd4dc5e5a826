//! Binary `DSC1` symbol container.
//!
//! Layout (all little-endian): magic `DSC1`, `d: u32`, `d_a: f64`, `B_x: u64`,
//! grid kind `u32` (0 hierarchical, 1 Chebyshev) followed by its parameters
//! (`B_ξ, L, K: u64` or `N_θ, N_r: u64, L_map: f64`), the entry count `u64`,
//! then the λ-major table as `(re, im)` pairs of `f64`.

use std::io::{Read, Write};
use std::sync::Arc;

use super::gridfn::{read_f64, read_u32, read_u64};
use super::Symbol;
use crate::error::{DscError, Result};
use crate::grid::{ChebParams, GridParams, HierParams};
use crate::scalar::{Real, C};

const MAGIC: &[u8; 4] = b"DSC1";

pub fn write_symbol<T: Real>(s: &Symbol<T>, mut w: impl Write) -> Result<()> {
    let mut buf = Vec::with_capacity(64 + s.table().len() * 16);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(s.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&s.order().as_f64().to_le_bytes());
    buf.extend_from_slice(&(s.band() as u64).to_le_bytes());
    match s.grid().params() {
        GridParams::Hier(p) => {
            buf.extend_from_slice(&0u32.to_le_bytes());
            buf.extend_from_slice(&(p.coarse_band as u64).to_le_bytes());
            buf.extend_from_slice(&(p.levels as u64).to_le_bytes());
            buf.extend_from_slice(&(p.nodes as u64).to_le_bytes());
        }
        GridParams::Cheb(p) => {
            buf.extend_from_slice(&1u32.to_le_bytes());
            buf.extend_from_slice(&(p.n_theta as u64).to_le_bytes());
            buf.extend_from_slice(&(p.n_r as u64).to_le_bytes());
            buf.extend_from_slice(&p.map_scale.to_le_bytes());
        }
    }
    buf.extend_from_slice(&(s.table().len() as u64).to_le_bytes());
    for z in s.table() {
        buf.extend_from_slice(&z.re.as_f64().to_le_bytes());
        buf.extend_from_slice(&z.im.as_f64().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_symbol<T: Real>(mut r: impl Read) -> Result<Symbol<T>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(DscError::Format("symbol file must start with DSC1".into()));
    }
    let dim = read_u32(&mut r)? as usize;
    let order = read_f64(&mut r)?;
    let band = read_u64(&mut r)? as usize;
    let params = match read_u32(&mut r)? {
        0 => GridParams::Hier(HierParams {
            dim,
            coarse_band: read_u64(&mut r)? as usize,
            levels: read_u64(&mut r)? as usize,
            nodes: read_u64(&mut r)? as usize,
        }),
        1 => GridParams::Cheb(ChebParams {
            dim,
            n_theta: read_u64(&mut r)? as usize,
            n_r: read_u64(&mut r)? as usize,
            map_scale: read_f64(&mut r)?,
        }),
        k => return Err(DscError::Format(format!("unknown grid kind {k}"))),
    };
    let grid = params
        .build::<T>()
        .map_err(|e| DscError::Format(format!("bad grid parameters: {e}")))?;
    let len = read_u64(&mut r)? as usize;
    let expected = (2 * band).saturating_sub(1).pow(dim as u32) * grid.len();
    if band == 0 || len != expected {
        return Err(DscError::Format(format!(
            "table length {len} does not match header (expected {expected})"
        )));
    }
    let mut h = Vec::with_capacity(len);
    for _ in 0..len {
        let re = read_f64(&mut r)?;
        let im = read_f64(&mut r)?;
        h.push(C::new(T::lit(re), T::lit(im)));
    }
    Symbol::from_table(T::lit(order), band, Arc::new(grid), h)
}
