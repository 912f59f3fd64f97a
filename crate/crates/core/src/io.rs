//! Field and threshold file formats.
//!
//! Field binary: little-endian `u64 d`, `u64 n`, `f64 side`, `u64 seed`, then `n^d` `f64`
//! values in cell-index order (first coordinate fastest, i.e. row-major with `y` as the row).
//! Stored values include the level offset.

use std::io::{Read, Write};

use crate::error::Result;
use crate::grid::TorusGrid;
use crate::sampler::FieldSample;
use crate::topology::{EventSpec, Realization, ThresholdResult};

pub const THRESHOLD_SCHEMA: &str = "# gfperc threshold schema v1";
pub const THRESHOLD_HEADER: &str = "seed,kernel_id,n,side,event,t_value,saddle_x,saddle_y,class_1,class_2";
pub const FIELD_CSV_SCHEMA: &str = "# gfperc field schema v1";

pub fn write_field_binary(f: &FieldSample, mut out: impl Write) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + 8 * f.values.len());
    buf.extend((f.grid.d() as u64).to_le_bytes());
    buf.extend((f.grid.n() as u64).to_le_bytes());
    buf.extend(f.grid.side().to_le_bytes());
    buf.extend(f.seed.to_le_bytes());
    for i in 0..f.values.len() {
        buf.extend(f.value(i).to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_field_binary(mut input: impl Read) -> Result<FieldSample> {
    let mut word = [0u8; 8];
    let mut next = |input: &mut dyn Read| -> Result<[u8; 8]> {
        input.read_exact(&mut word)?;
        Ok(word)
    };
    let d = u64::from_le_bytes(next(&mut input)?) as usize;
    let n = u64::from_le_bytes(next(&mut input)?) as usize;
    let side = f64::from_le_bytes(next(&mut input)?);
    let seed = u64::from_le_bytes(next(&mut input)?);
    let grid = TorusGrid::new(d, n, side)?;
    let mut raw = vec![0u8; 8 * grid.len()];
    input.read_exact(&mut raw)?;
    let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let mut f = FieldSample::from_values(grid, values)?;
    f.seed = seed;
    Ok(f)
}

/// One line per cell: `x,y[,z],value`.
pub fn write_field_csv(f: &FieldSample, mut out: impl Write) -> Result<()> {
    let d = f.grid.d();
    let mut s = format!("{FIELD_CSV_SCHEMA}\n");
    s.push_str(&["x", "y", "z"][..d].join(","));
    s.push_str(",value\n");
    for i in 0..f.values.len() {
        let c = f.grid.coords(i);
        for k in &c[..d] {
            s.push_str(&format!("{k},"));
        }
        s.push_str(&format!("{}\n", f.value(i)));
    }
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn write_threshold_header(mut out: impl Write) -> Result<()> {
    writeln!(out, "{THRESHOLD_SCHEMA}\n{THRESHOLD_HEADER}")?;
    Ok(())
}

/// One threshold row; unrealized events leave the saddle and class fields empty.
pub fn threshold_row(f: &FieldSample, e: &EventSpec, r: &ThresholdResult) -> String {
    let coord = |k: usize| r.saddle_cell.get(k).map(|c| c.to_string()).unwrap_or_default();
    let (c1, c2) = match r.realizing_class {
        Realization::Winding { class } => (class[0].to_string(), class[1].to_string()),
        Realization::Crossing => ("0".into(), "0".into()),
        Realization::Never => (String::new(), String::new()),
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        f.seed,
        f.kernel_id,
        f.grid.n(),
        f.grid.side(),
        e.label(),
        r.t_value,
        coord(0),
        coord(1),
        c1,
        c2
    )
}
