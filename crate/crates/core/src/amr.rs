//! Magnetization-dependent wire resistance.
//!
//! Each link between two neighbouring cells along the current carries
//! `ρ·Δ_flow/(A_cross)·(1 + AMR(m1, m2))`. Wire ends connect to their lead
//! through half a cell, so a straight chain of `N` cells has the
//! resistance of `N` links.

use std::collections::HashSet;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::MagnetizationField;
use crate::geometry::{Axis, CellSize, Mesh};
use crate::linalg::{solve_spd, SparseSym};
use crate::material::MaterialParams;
use crate::vec3::Vec3;

/// How the neighbour magnetizations enter the link resistance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkAmr {
    /// `AMRc·(m1·m2)`: parallel neighbours are the most resistive.
    Dot,
    /// `AMRc·(1 − m1·m2)`: resistance grows with the misalignment across a
    /// wall, so patterns with more walls read higher.
    #[default]
    Misalignment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResistanceModel {
    /// Ω·m
    pub rho: f64,
    pub amr: f64,
    pub law: LinkAmr,
}

impl ResistanceModel {
    pub fn new(p: &MaterialParams, law: LinkAmr) -> Self {
        Self { rho: p.rho, amr: p.amr, law }
    }

    fn factor(&self, m1: Vec3, m2: Vec3) -> f64 {
        let d = m1.dot(m2);
        match self.law {
            LinkAmr::Dot => 1.0 + self.amr * d,
            LinkAmr::Misalignment => 1.0 + self.amr * (1.0 - d),
        }
    }
}

impl Default for ResistanceModel {
    fn default() -> Self {
        Self::new(&MaterialParams::default(), LinkAmr::default())
    }
}

/// Resistance of one cell-length link with current along `flow`.
pub fn link_resistance(m1: Vec3, m2: Vec3, cell: CellSize, flow: Axis, model: &ResistanceModel) -> f64 {
    let geom = match flow {
        Axis::X => cell.dx / (cell.dy * cell.dz),
        Axis::Y => cell.dy / (cell.dx * cell.dz),
    };
    model.rho * geom * model.factor(m1, m2)
}

fn axis_of(i: usize) -> Axis {
    if i == 0 {
        Axis::X
    } else {
        Axis::Y
    }
}

/// Bounding box of `cells` if they fill it exactly.
fn rectangle(mesh: &Mesh, cells: &[usize]) -> Result<(usize, usize, usize, usize)> {
    if cells.is_empty() {
        return Err(Error::NonRectangularRegion("empty region".into()));
    }
    let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
    for &c in cells {
        let (i, j, k) = mesh.coords(c);
        if k != 0 || !mesh.is_occupied(c) {
            return Err(Error::NonRectangularRegion(format!("cell {c} is not in the wire layer")));
        }
        i0 = i0.min(i);
        i1 = i1.max(i + 1);
        j0 = j0.min(j);
        j1 = j1.max(j + 1);
    }
    let set: HashSet<usize> = cells.iter().copied().collect();
    if set.len() != (i1 - i0) * (j1 - j0) {
        return Err(Error::NonRectangularRegion(format!(
            "{} cells do not fill their {}x{} bounding box",
            set.len(),
            i1 - i0,
            j1 - j0
        )));
    }
    Ok((i0, i1, j0, j1))
}

/// Series-parallel resistance of a straight rectangular region: each line
/// of cells along `flow` is a series chain, the chains are in parallel.
pub fn wire_resistance(
    m: &MagnetizationField,
    mesh: &Mesh,
    cells: &[usize],
    flow: Axis,
    model: &ResistanceModel,
) -> Result<f64> {
    let (i0, i1, j0, j1) = rectangle(mesh, cells)?;
    let cell = mesh.cell;
    let (along, across) = match flow {
        Axis::X => ((i0, i1), (j0, j1)),
        Axis::Y => ((j0, j1), (i0, i1)),
    };
    let at = |s: usize, t: usize| match flow {
        Axis::X => m.get(mesh.index(s, t, 0)),
        Axis::Y => m.get(mesh.index(t, s, 0)),
    };
    let mut conductance = 0.0;
    for t in across.0..across.1 {
        let first = at(along.0, t);
        let last = at(along.1 - 1, t);
        let mut r = 0.5 * link_resistance(first, first, cell, flow, model)
            + 0.5 * link_resistance(last, last, cell, flow, model);
        for s in along.0..along.1 - 1 {
            r += link_resistance(at(s, t), at(s + 1, t), cell, flow, model);
        }
        conductance += 1.0 / r;
    }
    Ok(1.0 / conductance)
}

/// Cells of a terminal face; the lead attaches along `flow`.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub cells: Vec<usize>,
    pub flow: Axis,
}

/// Two-terminal resistance of an arbitrary region from a nodal solve over
/// the cell-link graph.
pub fn solve_resistance(
    m: &MagnetizationField,
    mesh: &Mesh,
    cells: &[usize],
    a: &Face,
    b: &Face,
    model: &ResistanceModel,
) -> Result<f64> {
    let n_cells = mesh.len();
    let mut node = vec![usize::MAX; n_cells];
    for (k, &c) in cells.iter().enumerate() {
        if !mesh.is_occupied(c) {
            return Err(Error::InvalidParameter(format!("cell {c} is not occupied")));
        }
        node[c] = k;
    }
    let n = cells.len();
    let (src, snk) = (n, n + 1);
    // Edges as (node, node, resistance).
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for &c in cells {
        for axis in 0..2 {
            if let Some(nb) = mesh.neighbor(c, axis, true) {
                if node[nb] != usize::MAX {
                    let r = link_resistance(m.get(c), m.get(nb), mesh.cell, axis_of(axis), model);
                    edges.push((node[c], node[nb], r));
                }
            }
        }
    }
    for (face, term) in [(a, src), (b, snk)] {
        for &c in &face.cells {
            if c >= n_cells || node[c] == usize::MAX {
                return Err(Error::InvalidParameter(format!("terminal cell {c} is outside the region")));
            }
            let mc = m.get(c);
            edges.push((node[c], term, 0.5 * link_resistance(mc, mc, mesh.cell, face.flow, model)));
        }
    }
    solve_two_terminal(n + 2, &edges, src, snk)
}

/// Resistance between `src` and `snk` of a resistor graph. Nodes not
/// connected to the sink are dropped.
pub(crate) fn solve_two_terminal(n: usize, edges: &[(usize, usize, f64)], src: usize, snk: usize) -> Result<f64> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v, _) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![snk];
    seen[snk] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    if !seen[src] {
        return Err(Error::DisconnectedTerminals);
    }
    // Unknowns: reachable nodes except the grounded sink.
    let mut idx = vec![usize::MAX; n];
    let mut m = 0;
    for u in 0..n {
        if seen[u] && u != snk {
            idx[u] = m;
            m += 1;
        }
    }
    let mut t = Vec::with_capacity(4 * edges.len());
    for &(u, v, r) in edges {
        if !seen[u] {
            continue;
        }
        let g = 1.0 / r;
        let (iu, iv) = (idx[u], idx[v]);
        if iu != usize::MAX {
            t.push((iu, iu, g));
        }
        if iv != usize::MAX {
            t.push((iv, iv, g));
        }
        if iu != usize::MAX && iv != usize::MAX {
            t.push((iu, iv, -g));
            t.push((iv, iu, -g));
        }
    }
    let a = SparseSym::from_triplets(m, t);
    let mut rhs = vec![0.0; m];
    rhs[idx[src]] = 1.0;
    let phi = solve_spd(&a, &rhs, 1e-11)?;
    Ok(phi[idx[src]])
}

/// One row of a resistance report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistanceRow {
    pub pattern: String,
    pub wire: usize,
    pub ohms: f64,
}

pub fn write_resistance_csv(w: &mut impl Write, model: &ResistanceModel, rows: &[ResistanceRow]) -> io::Result<()> {
    writeln!(w, "# xdwm resistance v1 rho={:e} amr={} law={:?}", model.rho, model.amr, model.law)?;
    writeln!(w, "pattern,wire,r_ohms,rho,amr")?;
    for r in rows {
        writeln!(w, "{},{},{:.9e},{:e},{}", r.pattern, r.wire, r.ohms, model.rho, model.amr)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn literal() -> ResistanceModel {
        ResistanceModel::new(&MaterialParams::default(), LinkAmr::Dot)
    }

    #[test]
    fn link_examples() {
        let c = CellSize::default();
        let r = link_resistance(Vec3::Z, Vec3::Z, c, Axis::X, &literal());
        assert!((r - 202.8).abs() < 1e-9);
        let r0 = link_resistance(Vec3::Z, Vec3::X, c, Axis::X, &literal());
        assert!((r0 - 200.0).abs() < 1e-9);
        let r1 = link_resistance(Vec3::Z, -Vec3::Z, c, Axis::X, &literal());
        assert!((r1 / r0 - 0.986).abs() < 1e-12);
        // The misalignment law is the same link shifted by AMRc.
        let mis = ResistanceModel::default();
        assert!((link_resistance(Vec3::Z, Vec3::Z, c, Axis::X, &mis) - 200.0).abs() < 1e-9);
        assert!((link_resistance(Vec3::Z, -Vec3::Z, c, Axis::X, &mis) - 205.6).abs() < 1e-9);
    }

    #[test]
    fn y_flow_uses_y_geometry() {
        let c = CellSize::new(2e-9, 4e-9, 1e-9);
        let m = literal();
        let rx = link_resistance(Vec3::X, Vec3::X, c, Axis::X, &m);
        let ry = link_resistance(Vec3::X, Vec3::X, c, Axis::Y, &m);
        assert!((ry / rx - 4.0).abs() < 1e-12);
    }
}
