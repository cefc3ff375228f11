//! File formats: SWDF field dumps, trajectory records, spectral dumps and
//! kernel tables.
//!
//! An SWDF record is little-endian:
//! `b"SWDF"`, `u32 ndim`, `ndim x u64 dims`, `ndim x f64 spacing`,
//! `u64 source`, `f64 epsilon`, then the node values as `f64` in row-major
//! order. A trajectory file is a sequence of records, each followed by the
//! time stamp and carrying `u` then `v` (so `2 N` values).

use crate::distance::DistanceField;
use crate::error::{Error, Result};
use crate::extension::ExtensionKernel;
use crate::geometry::Grid;
use crate::spectral::SpectralDecomposition;
use crate::wave::Trajectory;
use serde::Serialize;
use std::io::{Read, Write};
use std::path::Path;

pub const SWDF_MAGIC: &[u8; 4] = b"SWDF";
/// `source` value of records that have no source node.
pub const NO_SOURCE: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq)]
pub struct SwdfHeader {
    pub dims: Vec<usize>,
    pub spacing: Vec<f64>,
    pub source: u64,
    pub epsilon: f64,
}

fn write_header(w: &mut impl Write, h: &SwdfHeader) -> Result<()> {
    w.write_all(SWDF_MAGIC)?;
    w.write_all(&(h.dims.len() as u32).to_le_bytes())?;
    for &n in &h.dims {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for &s in &h.spacing {
        w.write_all(&s.to_le_bytes())?;
    }
    w.write_all(&h.source.to_le_bytes())?;
    w.write_all(&h.epsilon.to_le_bytes())?;
    Ok(())
}

fn write_values(w: &mut impl Write, v: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(8 * v.len());
    for x in v {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_bits(read_u64(r)?))
}

fn read_header(r: &mut impl Read) -> Result<SwdfHeader> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SWDF_MAGIC {
        return Err(Error::InvalidArgument("not an SWDF record".into()));
    }
    let mut nd = [0u8; 4];
    r.read_exact(&mut nd)?;
    let nd = u32::from_le_bytes(nd) as usize;
    if nd == 0 || nd > 16 {
        return Err(Error::InvalidArgument(format!(
            "SWDF record with {nd} axes"
        )));
    }
    let dims = (0..nd)
        .map(|_| read_u64(r).map(|n| n as usize))
        .collect::<Result<Vec<_>>>()?;
    let spacing = (0..nd).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
    Ok(SwdfHeader {
        dims,
        spacing,
        source: read_u64(r)?,
        epsilon: read_f64(r)?,
    })
}

fn read_values(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; 8 * n];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

fn header_for(grid: &Grid, source: u64, epsilon: f64) -> SwdfHeader {
    SwdfHeader {
        dims: grid.dims().to_vec(),
        spacing: grid.spacing().to_vec(),
        source,
        epsilon,
    }
}

pub fn encode_swdf(dist: &DistanceField) -> Vec<u8> {
    let mut w = Vec::with_capacity(64 + 8 * dist.values.len());
    write_header(
        &mut w,
        &header_for(&dist.grid, dist.source as u64, dist.epsilon),
    )
    .expect("in-memory write");
    write_values(&mut w, &dist.values).expect("in-memory write");
    w
}

pub fn write_swdf(path: &Path, dist: &DistanceField) -> Result<()> {
    std::fs::write(path, encode_swdf(dist))?;
    Ok(())
}

pub fn read_swdf(path: &Path) -> Result<(SwdfHeader, Vec<f64>)> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    let h = read_header(&mut r)?;
    let n = h.dims.iter().product();
    let v = read_values(&mut r, n)?;
    Ok((h, v))
}

pub fn encode_trajectory(grid: &Grid, epsilon: f64, traj: &Trajectory) -> Vec<u8> {
    let mut w = Vec::new();
    let h = header_for(grid, NO_SOURCE, epsilon);
    for s in &traj.snapshots {
        write_header(&mut w, &h).expect("in-memory write");
        w.extend_from_slice(&s.t.to_le_bytes());
        write_values(&mut w, &s.u).expect("in-memory write");
        write_values(&mut w, &s.v).expect("in-memory write");
    }
    w
}

pub fn write_trajectory(path: &Path, grid: &Grid, epsilon: f64, traj: &Trajectory) -> Result<()> {
    std::fs::write(path, encode_trajectory(grid, epsilon, traj))?;
    Ok(())
}

/// `(header, t, u, v)` per record.
pub fn read_trajectory(path: &Path) -> Result<Vec<(SwdfHeader, f64, Vec<f64>, Vec<f64>)>> {
    let bytes = std::fs::read(path)?;
    let mut r = bytes.as_slice();
    let mut out = Vec::new();
    while !r.is_empty() {
        let h = read_header(&mut r)?;
        let n = h.dims.iter().product();
        let t = read_f64(&mut r)?;
        let u = read_values(&mut r, n)?;
        let v = read_values(&mut r, n)?;
        out.push((h, t, u, v));
    }
    Ok(out)
}

#[derive(Serialize)]
struct SpectralHeader<'a> {
    m: usize,
    n: usize,
    method: &'a str,
    eigenvalues: &'a [f64],
    residuals: &'a [f64],
}

/// JSON header `{m, n, method, eigenvalues, residuals}` and the `m x n`
/// eigenvector block as little-endian `f64`.
pub fn encode_spectral(spec: &SpectralDecomposition) -> Result<(String, Vec<u8>)> {
    let header = SpectralHeader {
        m: spec.len(),
        n: spec.grid().len(),
        method: spec.method(),
        eigenvalues: spec.eigenvalues(),
        residuals: spec.residuals(),
    };
    let mut bin = Vec::with_capacity(8 * spec.len() * spec.grid().len());
    for v in spec.eigenvectors() {
        write_values(&mut bin, v)?;
    }
    Ok((serde_json::to_string_pretty(&header)? + "\n", bin))
}

/// Writes `<stem>.json` and `<stem>.bin`.
pub fn write_spectral(dir: &Path, stem: &str, spec: &SpectralDecomposition) -> Result<()> {
    let (json, bin) = encode_spectral(spec)?;
    std::fs::write(dir.join(format!("{stem}.json")), json)?;
    std::fs::write(dir.join(format!("{stem}.bin")), bin)?;
    Ok(())
}

/// CSV table `lambda,t,s,theta,theta_1,abs_err`.
pub fn kernel_table_csv(kernel: &ExtensionKernel, lambdas: &[f64], ts: &[f64]) -> Result<String> {
    let mut out = String::from("lambda,t,s,theta,theta_1,abs_err\n");
    for &l in lambdas {
        for &t in ts {
            let a = kernel.theta(l, t)?;
            let b = kernel.theta_k(l, t, 1)?;
            out.push_str(&format!(
                "{l:e},{t:e},{},{:.17e},{:.17e},{:.3e}\n",
                kernel.s(),
                a.value,
                b.value,
                a.abs_err.max(b.abs_err)
            ));
        }
    }
    Ok(out)
}
