//! File formats: orbit and cloud CSV, NPC1 binary clouds, raw raster dumps.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::inverse::{PointCloud, Provenance};
use crate::raster::{BasinRaster, Window};
use crate::{Error, Point, Result};

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

/// `iter,x,y` per line.
pub fn write_orbit_csv<W: Write>(mut w: W, orbit: &[Point]) -> Result<()> {
    writeln!(w, "iter,x,y").map_err(io_err)?;
    for (k, p) in orbit.iter().enumerate() {
        writeln!(w, "{k},{},{}", p[0], p[1]).map_err(io_err)?;
    }
    Ok(())
}

/// `x,y,flag` per line, flag 0 or 1.
pub fn write_cloud_csv<W: Write>(mut w: W, cloud: &PointCloud) -> Result<()> {
    writeln!(w, "x,y,flag").map_err(io_err)?;
    for (p, f) in cloud.points.iter().zip(&cloud.flags) {
        writeln!(w, "{},{},{}", p[0], p[1], u8::from(*f)).map_err(io_err)?;
    }
    Ok(())
}

pub const NPC1_MAGIC: &[u8; 4] = b"NPC1";

/// Binary cloud: magic `NPC1`, `u64` count, `u64` seed, `u8` provenance kind
/// (0 tree, 1 chaos game, 2 repellor, 3 seeds), 3 zero bytes, `u64` parameter
/// (depth or n), then `count` little-endian `f64` pairs. Flags are not stored.
pub fn write_npc1<W: Write>(mut w: W, cloud: &PointCloud) -> Result<()> {
    let (kind, seed, param): (u8, u64, u64) = match cloud.provenance {
        Provenance::PreimageTree { depth } => (0, 0, depth as u64),
        Provenance::ChaosGame { n, seed } => (1, seed, n as u64),
        Provenance::RepellorIteration { n } => (2, 0, n as u64),
        Provenance::Seeds => (3, 0, 0),
    };
    let mut buf = Vec::with_capacity(32 + 16 * cloud.len());
    buf.extend_from_slice(NPC1_MAGIC);
    buf.extend_from_slice(&(cloud.len() as u64).to_le_bytes());
    buf.extend_from_slice(&seed.to_le_bytes());
    buf.push(kind);
    buf.extend_from_slice(&[0; 3]);
    buf.extend_from_slice(&param.to_le_bytes());
    for p in &cloud.points {
        buf.extend_from_slice(&p[0].to_le_bytes());
        buf.extend_from_slice(&p[1].to_le_bytes());
    }
    w.write_all(&buf).map_err(io_err)
}

pub fn read_npc1<R: Read>(mut r: R) -> Result<PointCloud> {
    let mut head = [0u8; 32];
    r.read_exact(&mut head).map_err(io_err)?;
    if &head[..4] != NPC1_MAGIC {
        return Err(Error::Format("not an NPC1 file".into()));
    }
    let u64_at = |k: usize| u64::from_le_bytes(head[k..k + 8].try_into().expect("8 bytes"));
    let (count, seed, kind, param) = (u64_at(4), u64_at(12), head[20], u64_at(24));
    let provenance = match kind {
        0 => Provenance::PreimageTree { depth: param as usize },
        1 => Provenance::ChaosGame { n: param as usize, seed },
        2 => Provenance::RepellorIteration { n: param as usize },
        3 => Provenance::Seeds,
        k => return Err(Error::Format(format!("unknown provenance kind {k}"))),
    };
    let mut body = Vec::new();
    r.read_to_end(&mut body).map_err(io_err)?;
    if body.len() as u64 != 16 * count {
        return Err(Error::Format(format!("expected {count} points, found {} bytes", body.len())));
    }
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("8 bytes"));
    let points = body.chunks_exact(16).map(|c| [f(&c[..8]), f(&c[8..])]).collect();
    Ok(PointCloud::new(points, provenance))
}

/// JSON header of a raw raster dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterHeader {
    pub width: usize,
    pub height: usize,
    pub window: Window,
    pub codes_legend: Vec<(u8, String)>,
    pub max_iter: usize,
    pub tol: f64,
    pub n_roots: usize,
    /// Layout of the companion binary file.
    pub layout: String,
}

const RASTER_LAYOUT: &str = "u8 codes[height][width], then u32 little-endian iters[height][width], rows from the top";

pub fn raster_header(r: &BasinRaster) -> RasterHeader {
    RasterHeader {
        width: r.width,
        height: r.height,
        window: r.window,
        codes_legend: r.legend(),
        max_iter: r.max_iter,
        tol: r.tol,
        n_roots: r.n_roots,
        layout: RASTER_LAYOUT.into(),
    }
}

pub fn write_raster_bin<W: Write>(mut w: W, r: &BasinRaster) -> Result<()> {
    let mut buf = Vec::with_capacity(5 * r.len());
    buf.extend_from_slice(&r.codes);
    for it in &r.iters {
        buf.extend_from_slice(&it.to_le_bytes());
    }
    w.write_all(&buf).map_err(io_err)
}

pub fn read_raster_bin<R: Read>(mut r: R, header: &RasterHeader) -> Result<BasinRaster> {
    let n = header.width * header.height;
    let mut body = Vec::new();
    r.read_to_end(&mut body).map_err(io_err)?;
    if body.len() != 5 * n {
        return Err(Error::Format(format!("expected {} bytes, found {}", 5 * n, body.len())));
    }
    let iters = body[n..].chunks_exact(4).map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
    Ok(BasinRaster {
        width: header.width,
        height: header.height,
        window: header.window,
        codes: body[..n].to_vec(),
        iters,
        max_iter: header.max_iter,
        tol: header.tol,
        n_roots: header.n_roots,
    })
}
