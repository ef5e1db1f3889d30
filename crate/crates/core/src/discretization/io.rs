//! Field persistence: CSV (coordinates then components) and the compact
//! `DGVF` binary layout.
//!
//! Binary layout, little endian: magic `b"DGVF"`, `u32` version (1), `u32` dim,
//! `dim` x `u32` nodes per axis, `u32` components, then node-major `f64` values
//! with components innermost.

use std::io::{Read, Write};

use super::{DiscreteField, DiscretizationError, Grid};

pub const MAGIC: &[u8; 4] = b"DGVF";
pub const VERSION: u32 = 1;

pub fn write_csv<W: Write>(field: &DiscreteField, mut w: W) -> std::io::Result<()> {
    let grid = field.grid();
    let axes = ["x", "y"];
    let mut header: Vec<String> = axes[..grid.dim()].iter().map(|s| s.to_string()).collect();
    header.extend((0..field.components()).map(|c| format!("u{c}")));
    writeln!(w, "{}", header.join(","))?;
    for node in 0..grid.n_nodes() {
        let x = grid.node_point(node);
        let mut row: Vec<String> = x[..grid.dim()].iter().map(|v| format!("{v:.17e}")).collect();
        row.extend(field.node(node).iter().map(|v| format!("{v:.17e}")));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_binary<W: Write>(field: &DiscreteField, mut w: W) -> std::io::Result<()> {
    let grid = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for _ in 0..grid.dim() {
        w.write_all(&(grid.n_axis() as u32).to_le_bytes())?;
    }
    w.write_all(&(field.components() as u32).to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, DiscretizationError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|e| DiscretizationError::Io(e.to_string()))?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<DiscreteField, DiscretizationError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| DiscretizationError::Io(e.to_string()))?;
    if &magic != MAGIC {
        return Err(DiscretizationError::Io("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(DiscretizationError::Io(format!("unsupported version {version}")));
    }
    let dim = read_u32(&mut r)? as usize;
    if !(dim == 1 || dim == 2) {
        return Err(DiscretizationError::Io(format!("bad dim {dim}")));
    }
    let mut n_axes = Vec::with_capacity(dim);
    for _ in 0..dim {
        n_axes.push(read_u32(&mut r)? as usize);
    }
    if n_axes.iter().any(|&n| n != n_axes[0]) {
        return Err(DiscretizationError::Io("non-square grids are not supported".into()));
    }
    let components = read_u32(&mut r)? as usize;
    let grid = Grid::new(dim, n_axes[0])?;
    let len = grid.n_nodes() * components;
    let mut bytes = vec![0u8; len * 8];
    r.read_exact(&mut bytes).map_err(|e| DiscretizationError::Io(e.to_string()))?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    DiscreteField::new(&grid, components, values)
}
