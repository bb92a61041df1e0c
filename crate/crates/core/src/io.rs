//! Field serialization: flat binary of 8-byte floats in row-major lattice
//! order behind a 32-byte header (n, N, L, flags), as used by the CLI
//! cache.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use std::io::{Read, Write};

const MAGIC_FLAGS: u64 = 0x4845_4154_4c41_4201; // "HEATLAB" + version 1

pub fn write_field(field: &Field, w: &mut impl Write) -> Result<()> {
    let grid = field.grid();
    let mut header = [0u8; 32];
    header[0..4].copy_from_slice(&(grid.dimension() as u32).to_le_bytes());
    header[4..8].copy_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    header[8..16].copy_from_slice(&grid.period().to_le_bytes());
    header[16..24].copy_from_slice(&MAGIC_FLAGS.to_le_bytes());
    w.write_all(&header)?;
    for &v in field.samples() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field(r: &mut impl Read) -> Result<Field> {
    let mut header = [0u8; 32];
    r.read_exact(&mut header)?;
    let n = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let points = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let period = f64::from_le_bytes(header[8..16].try_into().unwrap());
    let flags = u64::from_le_bytes(header[16..24].try_into().unwrap());
    if flags != MAGIC_FLAGS {
        return Err(Error::Format(format!("unknown field flags {flags:#x}")));
    }
    let grid = Grid::new_composite(n, points, period)?;
    let mut samples = vec![0.0f64; grid.total_points()];
    let mut buf = [0u8; 8];
    for v in samples.iter_mut() {
        r.read_exact(&mut buf)?;
        *v = f64::from_le_bytes(buf);
    }
    Field::from_samples(grid, samples)
}
