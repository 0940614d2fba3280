//! Deterministic serialization: CSV with 17-significant-digit floats
//! (lossless for f64), a compact little-endian binary layout for grids,
//! and JSON via serde for Gaussian states.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::caldeira::PhaseSpaceHistogram;
use crate::grid::UniformGrid;
use crate::influence::MemoryKernels;
use crate::states::{GridWignerState, StateError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("binary layout mismatch: {0}")]
    Layout(String),
    #[error(transparent)]
    State(#[from] StateError),
}

/// 17 significant digits: the shortest fixed precision that round-trips
/// every f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a grid state as CSV rows `x,p,f`, row-major x then p.
pub fn write_grid_csv(state: &GridWignerState, out: &mut impl Write) -> Result<(), IoError> {
    writeln!(out, "x,p,f")?;
    for ix in 0..state.x_axis().len() {
        let x = state.x_axis().value(ix);
        for ip in 0..state.p_axis().len() {
            writeln!(
                out,
                "{},{},{}",
                fmt_float(x),
                fmt_float(state.p_axis().value(ip)),
                fmt_float(state.value_at(ix, ip))
            )?;
        }
    }
    Ok(())
}

/// Read a grid-state CSV produced by [`write_grid_csv`]. The axes are
/// reconstructed from the row-major layout; `hbar` is not part of the
/// CSV and must be supplied.
pub fn read_grid_csv(input: impl Read, hbar: f64) -> Result<GridWignerState, IoError> {
    let reader = BufReader::new(input);
    let mut xs: Vec<f64> = Vec::new();
    let mut ps: Vec<f64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if idx == 0 {
            if line.trim() != "x,p,f" {
                return Err(IoError::Parse { line: 1, message: "expected header x,p,f".into() });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let mut next = |name: &str| -> Result<f64, IoError> {
            fields
                .next()
                .ok_or_else(|| IoError::Parse {
                    line: idx + 1,
                    message: format!("missing field {name}"),
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| IoError::Parse { line: idx + 1, message: e.to_string() })
        };
        let x = next("x")?;
        let p = next("p")?;
        let f = next("f")?;
        if xs.last() != Some(&x) {
            xs.push(x);
        }
        if xs.len() == 1 {
            ps.push(p);
        }
        values.push(f);
    }
    let x_axis = axis_from_nodes(&xs).map_err(|m| IoError::Layout(m.into()))?;
    let p_axis = axis_from_nodes(&ps).map_err(|m| IoError::Layout(m.into()))?;
    if values.len() != x_axis.len() * p_axis.len() {
        return Err(IoError::Layout(format!(
            "expected {} values, got {}",
            x_axis.len() * p_axis.len(),
            values.len()
        )));
    }
    Ok(GridWignerState::new(x_axis, p_axis, values, hbar)?)
}

fn axis_from_nodes(nodes: &[f64]) -> Result<UniformGrid, &'static str> {
    if nodes.len() < 2 {
        return Err("axis needs at least 2 nodes");
    }
    // endpoint difference averages out per-node print roundoff
    let step = (nodes[nodes.len() - 1] - nodes[0]) / (nodes.len() - 1) as f64;
    for pair in nodes.windows(2) {
        if ((pair[1] - pair[0]) - step).abs() > 1e-9 * step.abs().max(1.0) {
            return Err("axis is not uniform");
        }
    }
    UniformGrid::new(nodes[0], step, nodes.len()).map_err(|_| "degenerate axis")
}

/// Compact binary layout, little-endian: `n_x: u64`, `n_p: u64`,
/// `hbar: f64`, the x axis (`n_x` doubles), the p axis (`n_p` doubles),
/// then the row-major values.
pub fn write_grid_binary(state: &GridWignerState, out: &mut impl Write) -> Result<(), IoError> {
    out.write_all(&(state.x_axis().len() as u64).to_le_bytes())?;
    out.write_all(&(state.p_axis().len() as u64).to_le_bytes())?;
    out.write_all(&state.hbar().to_le_bytes())?;
    for v in state.x_axis().iter() {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in state.p_axis().iter() {
        out.write_all(&v.to_le_bytes())?;
    }
    for v in state.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Inverse of [`write_grid_binary`].
pub fn read_grid_binary(input: &mut impl Read) -> Result<GridWignerState, IoError> {
    let mut u64_buf = [0_u8; 8];
    let mut read_u64 = |input: &mut dyn Read| -> Result<u64, IoError> {
        input.read_exact(&mut u64_buf)?;
        Ok(u64::from_le_bytes(u64_buf))
    };
    let n_x = read_u64(input)? as usize;
    let n_p = read_u64(input)? as usize;
    let mut f64_buf = [0_u8; 8];
    let mut read_f64 = |input: &mut dyn Read| -> Result<f64, IoError> {
        input.read_exact(&mut f64_buf)?;
        Ok(f64::from_le_bytes(f64_buf))
    };
    let hbar = read_f64(input)?;
    let xs: Vec<f64> = (0..n_x).map(|_| read_f64(input)).collect::<Result<_, _>>()?;
    let ps: Vec<f64> = (0..n_p).map(|_| read_f64(input)).collect::<Result<_, _>>()?;
    let values: Vec<f64> =
        (0..n_x * n_p).map(|_| read_f64(input)).collect::<Result<_, _>>()?;
    let x_axis = axis_from_nodes(&xs).map_err(|m| IoError::Layout(m.into()))?;
    let p_axis = axis_from_nodes(&ps).map_err(|m| IoError::Layout(m.into()))?;
    Ok(GridWignerState::new(x_axis, p_axis, values, hbar)?)
}

/// Memory kernels as CSV rows `t,A,R`.
pub fn write_kernels_csv(kernels: &MemoryKernels, out: &mut impl Write) -> Result<(), IoError> {
    writeln!(out, "t,A,R")?;
    for i in 0..kernels.times().len() {
        writeln!(
            out,
            "{},{},{}",
            fmt_float(kernels.times().value(i)),
            fmt_float(kernels.a()[i]),
            fmt_float(kernels.r()[i])
        )?;
    }
    Ok(())
}

/// Histogram as CSV rows `x,p,density`.
pub fn write_histogram_csv(
    hist: &PhaseSpaceHistogram,
    out: &mut impl Write,
) -> Result<(), IoError> {
    writeln!(out, "x,p,density")?;
    for ix in 0..hist.x_axis.len() {
        let x = hist.x_axis.value(ix);
        for ip in 0..hist.p_axis.len() {
            writeln!(
                out,
                "{},{},{}",
                fmt_float(x),
                fmt_float(hist.p_axis.value(ip)),
                fmt_float(hist.density[ix * hist.p_axis.len() + ip])
            )?;
        }
    }
    Ok(())
}

/// Write bytes to `path` atomically: a temp file in the same directory,
/// then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let tmp = path.with_extension("tmp-partial");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
