//! Current-density maps.
//!
//! The potential is solved on the conductor (occupied cells that are not
//! high impedance) with fixed potentials on the source and sink cells; the
//! resulting face currents are averaged to cell centres and scaled to the
//! requested terminal current.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Axis, Mesh, RegionKind};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalRole {
    Source,
    Sink,
    /// Cells cut out of the conductor; they carry no current.
    HighImpedance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    pub cells: Vec<usize>,
    pub role: TerminalRole,
}

/// Current density per cell, A/m².
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentMap {
    j: Vec<Vec3>,
    terminals: Vec<Terminal>,
}

/// Conjugate-gradient settings for the potential solve.
const CG_TOL: f64 = 1e-12;
const CG_MAX_ITER: usize = 200_000;

impl CurrentMap {
    pub fn zero(mesh: &Mesh) -> Self {
        Self {
            j: vec![Vec3::ZERO; mesh.len()],
            terminals: Vec::new(),
        }
    }

    /// Same density in every occupied cell. Exact for straight notch-free
    /// wires.
    pub fn uniform(mesh: &Mesh, j: Vec3) -> Self {
        Self {
            j: (0..mesh.len())
                .map(|c| if mesh.is_occupied(c) { j } else { Vec3::ZERO })
                .collect(),
            terminals: Vec::new(),
        }
    }

    pub fn as_slice(&self) -> &[Vec3] {
        &self.j
    }

    pub fn terminals(&self) -> &[Terminal] {
        &self.terminals
    }

    pub fn is_zero(&self) -> bool {
        self.j.iter().all(|v| *v == Vec3::ZERO)
    }

    pub fn scaled(&self, f: f64) -> Self {
        Self {
            j: self.j.iter().map(|v| *v * f).collect(),
            terminals: self.terminals.clone(),
        }
    }

    /// Potential solve with the given terminals; `total_current` (A) enters
    /// through the source cells and leaves through the sinks.
    pub fn solve(mesh: &Mesh, terminals: &[Terminal], total_current: f64) -> Result<Self> {
        let n = mesh.len();
        let mut conductor: Vec<bool> = mesh.occupancy().to_vec();
        // 0 free, 1 source, 2 sink
        let mut fixed = vec![0u8; n];
        for t in terminals {
            for &c in &t.cells {
                if c >= n || !mesh.is_occupied(c) {
                    return Err(Error::InvalidParameter(format!("terminal cell {c} is not occupied")));
                }
                match t.role {
                    TerminalRole::HighImpedance => conductor[c] = false,
                    TerminalRole::Source => fixed[c] = 1,
                    TerminalRole::Sink => fixed[c] = 2,
                }
            }
        }
        for c in 0..n {
            if !conductor[c] {
                fixed[c] = 0;
            }
        }
        if !fixed.contains(&1) || !fixed.contains(&2) {
            return Err(Error::DisconnectedTerminals);
        }
        let cell = mesh.cell;
        // Link conductances for unit conductivity, per axis.
        let g = [
            cell.dy * cell.dz / cell.dx,
            cell.dx * cell.dz / cell.dy,
            cell.dx * cell.dy / cell.dz,
        ];
        let links = |c: usize| {
            let conductor = &conductor;
            (0..3).flat_map(move |axis| {
                [false, true].into_iter().filter_map(move |fwd| {
                    mesh.neighbor(c, axis, fwd)
                        .filter(|&nb| conductor[nb])
                        .map(|nb| (nb, axis, fwd))
                })
            })
        };

        if !connected(n, &conductor, &fixed, |c| links(c).map(|l| l.0).collect()) {
            return Err(Error::DisconnectedTerminals);
        }

        // Unknowns: free conductor cells. Source potential 1, sink 0.
        let mut phi = vec![0.0; n];
        for c in 0..n {
            if fixed[c] == 1 {
                phi[c] = 1.0;
            }
        }
        let free: Vec<usize> = (0..n).filter(|&c| conductor[c] && fixed[c] == 0).collect();
        let mut diag = vec![0.0; n];
        let mut b = vec![0.0; n];
        for &c in &free {
            for (nb, axis, _) in links(c) {
                diag[c] += g[axis];
                if fixed[nb] == 1 {
                    b[c] += g[axis];
                }
            }
        }
        let apply = |x: &[f64], out: &mut [f64]| {
            for &c in &free {
                let mut s = diag[c] * x[c];
                for (nb, axis, _) in links(c) {
                    if fixed[nb] == 0 {
                        s -= g[axis] * x[nb];
                    }
                }
                out[c] = s;
            }
        };
        pcg(&free, &diag, &b, &mut phi, apply)?;
        for c in 0..n {
            if fixed[c] == 1 {
                phi[c] = 1.0;
            }
        }

        // Face current densities averaged to cell centres. Terminal cells
        // average only over faces that exist, the missing face being the
        // lead.
        let area = [cell.dy * cell.dz, cell.dx * cell.dz, cell.dx * cell.dy];
        let mut j = vec![Vec3::ZERO; n];
        let mut injected = 0.0;
        for c in 0..n {
            if !conductor[c] {
                continue;
            }
            let mut sum = [0.0f64; 3];
            let mut faces = [0u32; 3];
            for (nb, axis, fwd) in links(c) {
                // Current from c to nb, positive along +axis.
                let flow = g[axis] * (phi[c] - phi[nb]);
                let along = if fwd { flow } else { -flow };
                sum[axis] += along / area[axis];
                faces[axis] += 1;
                if fixed[c] == 1 && fixed[nb] != 1 {
                    injected += flow;
                }
            }
            let mut v = [0.0; 3];
            for a in 0..3 {
                let denom = if fixed[c] != 0 { faces[a].max(1) } else { 2 };
                v[a] = sum[a] / denom as f64;
            }
            j[c] = Vec3::new(v[0], v[1], v[2]);
        }
        if injected <= 0.0 {
            return Err(Error::DisconnectedTerminals);
        }
        let s = total_current / injected;
        for v in &mut j {
            *v = *v * s;
        }
        Ok(Self {
            j,
            terminals: terminals.to_vec(),
        })
    }

    /// Drive X-NW `rows` end to end with density `j` (A/m²) referred to
    /// the full wire cross-section. Pure Y-NW domains are high impedance.
    /// `forward` sends the current towards +x.
    pub fn drive_x(mesh: &Mesh, rows: &[usize], j: f64, forward: bool, thickness: f64) -> Result<Self> {
        let mut src = Vec::new();
        let mut snk = Vec::new();
        let mut area = 0.0;
        for &r in rows {
            let w = mesh
                .x_wire(r)
                .ok_or_else(|| Error::InvalidParameter(format!("no X-NW row {r}")))?;
            let (left, right) = (w.rect.i0, w.rect.i1 - 1);
            for jj in w.rect.j0..w.rect.j1 {
                for (i, list) in [(left, &mut src), (right, &mut snk)] {
                    let c = mesh.index(i, jj, 0);
                    if mesh.is_occupied(c) {
                        list.push(c);
                    }
                }
            }
            area += w.width_cells() as f64 * mesh.cell.dy * thickness;
        }
        if !forward {
            std::mem::swap(&mut src, &mut snk);
        }
        let hi = cells_of(mesh, |k| matches!(k, RegionKind::YDomain { .. }));
        Self::solve(mesh, &terminals(src, snk, hi), j * area)
    }

    /// Drive Y-NW `q` end to end. `up` sends the current towards +y, which
    /// is towards row 0. Plain X-NW domains are high impedance.
    pub fn drive_y(mesh: &Mesh, q: usize, j: f64, up: bool, thickness: f64) -> Result<Self> {
        let w = mesh
            .y_wire(q)
            .ok_or_else(|| Error::InvalidParameter(format!("no Y-NW {q}")))?;
        debug_assert_eq!(w.axis, Axis::Y);
        let (bottom, top) = (w.rect.j0, w.rect.j1 - 1);
        let mut src = Vec::new();
        let mut snk = Vec::new();
        for i in w.rect.i0..w.rect.i1 {
            for (jj, list) in [(bottom, &mut src), (top, &mut snk)] {
                let c = mesh.index(i, jj, 0);
                if mesh.is_occupied(c) {
                    list.push(c);
                }
            }
        }
        if !up {
            std::mem::swap(&mut src, &mut snk);
        }
        let area = w.width_cells() as f64 * mesh.cell.dx * thickness;
        let hi = cells_of(mesh, |k| matches!(k, RegionKind::XDomain { .. }));
        Self::solve(mesh, &terminals(src, snk, hi), j * area)
    }
}

fn cells_of(mesh: &Mesh, pred: impl Fn(&RegionKind) -> bool) -> Vec<usize> {
    mesh.regions
        .iter()
        .filter(|r| pred(&r.kind))
        .flat_map(|r| r.cells.iter().copied())
        .collect()
}

fn terminals(src: Vec<usize>, snk: Vec<usize>, hi: Vec<usize>) -> Vec<Terminal> {
    let mut t = vec![
        Terminal { cells: src, role: TerminalRole::Source },
        Terminal { cells: snk, role: TerminalRole::Sink },
    ];
    if !hi.is_empty() {
        t.push(Terminal { cells: hi, role: TerminalRole::HighImpedance });
    }
    t
}

/// Some source reaches some sink through conductor cells.
fn connected(n: usize, conductor: &[bool], fixed: &[u8], nbrs: impl Fn(usize) -> Vec<usize>) -> bool {
    let mut seen = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&c| fixed[c] == 1 && conductor[c]).collect();
    for &c in &stack {
        seen[c] = true;
    }
    while let Some(c) = stack.pop() {
        if fixed[c] == 2 {
            return true;
        }
        for nb in nbrs(c) {
            if !seen[nb] {
                seen[nb] = true;
                stack.push(nb);
            }
        }
    }
    false
}

/// Jacobi-preconditioned conjugate gradients restricted to `free`.
fn pcg(
    free: &[usize],
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    apply: impl Fn(&[f64], &mut [f64]),
) -> Result<()> {
    let n = x.len();
    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    for &c in free {
        r[c] = b[c] - ap[c];
        z[c] = if diag[c] > 0.0 { r[c] / diag[c] } else { 0.0 };
        p[c] = z[c];
    }
    let bnorm = free.iter().map(|&c| b[c] * b[c]).sum::<f64>().sqrt().max(1e-300);
    let mut rz: f64 = free.iter().map(|&c| r[c] * z[c]).sum();
    for _ in 0..CG_MAX_ITER {
        let rnorm = free.iter().map(|&c| r[c] * r[c]).sum::<f64>().sqrt();
        if rnorm <= CG_TOL * bnorm {
            return Ok(());
        }
        apply(&p, &mut ap);
        let pap: f64 = free.iter().map(|&c| p[c] * ap[c]).sum();
        if pap <= 0.0 {
            return Err(Error::SingularSystem("potential system is not positive definite".into()));
        }
        let a = rz / pap;
        for &c in free {
            x[c] += a * p[c];
            r[c] -= a * ap[c];
            z[c] = if diag[c] > 0.0 { r[c] / diag[c] } else { 0.0 };
        }
        let rz_new: f64 = free.iter().map(|&c| r[c] * z[c]).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for &c in free {
            p[c] = z[c] + beta * p[c];
        }
    }
    Err(Error::SingularSystem("potential solve did not converge".into()))
}
