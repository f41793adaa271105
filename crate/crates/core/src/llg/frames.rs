//! Trajectory output.
//!
//! CSV snapshots carry one row per occupied cell. The binary format is a
//! stream of frames after a one-line text header:
//!
//! ```text
//! XDWM-FRAMES v1 nx ny nz\n
//! repeat { time: f64 LE, count: u64 LE, count × (cell: u64, mx, my, mz: f64) }
//! ```

use std::io::{self, BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::vec3::Vec3;

use super::SimState;

pub const FRAME_MAGIC: &str = "XDWM-FRAMES";
pub const FRAME_VERSION: u32 = 1;

/// Header line of trajectory CSV files.
pub const CSV_HEADER: &str = "# xdwm trajectory v1";

/// Appends the occupied cells of `state` as CSV rows. Writes the header
/// lines when `header` is set.
pub fn write_snapshot_csv(w: &mut impl Write, mesh: &Mesh, state: &SimState, header: bool) -> io::Result<()> {
    if header {
        writeln!(w, "{CSV_HEADER}")?;
        writeln!(w, "cell,x,y,z,mx,my,mz,t")?;
    }
    for c in mesh.occupied_cells() {
        let (x, y, z) = mesh.position(c);
        let m = state.m.get(c);
        writeln!(w, "{c},{x:e},{y:e},{z:e},{:.9},{:.9},{:.9},{:e}", m.x, m.y, m.z, state.time)?;
    }
    Ok(())
}

/// One decoded binary frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub time: f64,
    pub cells: Vec<(usize, Vec3)>,
}

pub fn write_header(w: &mut impl Write, mesh: &Mesh) -> io::Result<()> {
    writeln!(w, "{FRAME_MAGIC} v{FRAME_VERSION} {} {} {}", mesh.nx, mesh.ny, mesh.nz)
}

/// Appends one frame. The caller writes the header once first.
pub fn write_frame(w: &mut impl Write, mesh: &Mesh, state: &SimState) -> io::Result<()> {
    w.write_all(&state.time.to_le_bytes())?;
    w.write_all(&(mesh.occupied_count() as u64).to_le_bytes())?;
    for c in mesh.occupied_cells() {
        let m = state.m.get(c);
        w.write_all(&(c as u64).to_le_bytes())?;
        for v in [m.x, m.y, m.z] {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a whole frame stream; returns the grid dimensions and frames.
pub fn read_frames(r: &mut impl BufRead) -> Result<((usize, usize, usize), Vec<Frame>)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let parts: Vec<&str> = line.split_whitespace().collect();
    let bad = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
    if parts.len() != 5 || parts[0] != FRAME_MAGIC {
        return Err(bad("not a frame stream"));
    }
    if parts[1] != format!("v{FRAME_VERSION}") {
        return Err(bad("unsupported frame version"));
    }
    let dim = |s: &str| s.parse::<usize>().map_err(|_| bad("bad grid size"));
    let dims = (dim(parts[2])?, dim(parts[3])?, dim(parts[4])?);
    let mut frames = Vec::new();
    let mut b8 = [0u8; 8];
    loop {
        match r.read_exact(&mut b8) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        }
        let time = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let count = u64::from_le_bytes(b8) as usize;
        let mut cells = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut b8)?;
            let c = u64::from_le_bytes(b8) as usize;
            let mut v = [0.0; 3];
            for x in &mut v {
                r.read_exact(&mut b8)?;
                *x = f64::from_le_bytes(b8);
            }
            cells.push((c, Vec3::new(v[0], v[1], v[2])));
        }
        frames.push(Frame { time, cells });
    }
    Ok((dims, frames))
}
