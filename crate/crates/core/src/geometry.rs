//! Finite-difference mesh and builders for XDWM device geometries.
//!
//! Every device is a union of axis-aligned wire rectangles on a single layer
//! of cells. X-nanowires (X-NWs) run along +x and form the rows of a bundle;
//! Y-nanowires (Y-NWs) run along y across the whole bundle. Where they cross,
//! the two rectangles overlay into a cross-shaped X-Cell that belongs to both
//! wires. Optional notches bite rectangles out of both wire edges at every
//! domain boundary and act as pinning sites.
//!
//! Coordinates: cell `(i, j, k)` has its center at
//! `((i + ½)dx, (j + ½)dy, (k + ½)dz)`. Bundle row 0 is the top row (largest
//! y); Y-NW domain 0 is its top-most domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Edge lengths of one finite-difference cell, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSize {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl CellSize {
    pub const fn new(dx: f64, dy: f64, dz: f64) -> Self {
        Self { dx, dy, dz }
    }

    pub fn volume(&self) -> f64 {
        self.dx * self.dy * self.dz
    }

    pub fn along(&self, axis: usize) -> f64 {
        match axis {
            0 => self.dx,
            1 => self.dy,
            _ => self.dz,
        }
    }

    fn validate(&self) -> Result<()> {
        if [self.dx, self.dy, self.dz]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
        {
            Ok(())
        } else {
            Err(Error::InvalidParameter("cell edges must be > 0".into()))
        }
    }
}

impl Default for CellSize {
    fn default() -> Self {
        Self::new(2e-9, 2e-9, 1e-9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    PlainWire,
    NotchedWire,
    CrossOverlay,
    Bundle,
}

/// Symmetric rectangular edge bites placed at every domain boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotchSpec {
    /// How far each bite reaches into the wire from its edge, m.
    pub depth: f64,
    /// Extent of each bite along the wire axis, m.
    pub width: f64,
}

impl Default for NotchSpec {
    fn default() -> Self {
        Self {
            depth: 10e-9,
            width: 8e-9,
        }
    }
}

/// A Y-NW crossing every row of the bundle at one domain column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YWireSpec {
    /// Column (X-NW domain index) of the crossing.
    pub column: usize,
    /// Pure Y-NW domains above the top row.
    #[serde(default)]
    pub extra_above: usize,
    /// Pure Y-NW domains below the bottom row.
    #[serde(default)]
    pub extra_below: usize,
}

impl YWireSpec {
    pub fn at(column: usize) -> Self {
        Self {
            column,
            extra_above: 0,
            extra_below: 0,
        }
    }
}

/// Declarative description of a device layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub kind: GeometryKind,
    /// Width of every wire (both X-NWs and Y-NWs), m.
    pub wire_width: f64,
    /// Film thickness, m.
    pub thickness: f64,
    /// Domain length along a wire, m. Also the Y-NW domain length.
    pub pitch: f64,
    /// Domains per X-NW.
    pub domains: usize,
    pub notch: Option<NotchSpec>,
    /// Number of parallel X-NWs.
    pub n_xnw: usize,
    /// Distance between X-NW centerlines, in Y-NW domains.
    pub row_spacing: usize,
    pub ynws: Vec<YWireSpec>,
}

impl GeometrySpec {
    /// Notch-free single X-NW of `domains` × 80 nm, 40 nm × 1 nm cross-section.
    pub fn plain_wire(domains: usize) -> Self {
        Self {
            kind: GeometryKind::PlainWire,
            wire_width: 40e-9,
            thickness: 1e-9,
            pitch: 80e-9,
            domains,
            notch: None,
            n_xnw: 1,
            row_spacing: 1,
            ynws: Vec::new(),
        }
    }

    /// Single X-NW with default notches at every domain boundary.
    pub fn notched_wire(domains: usize) -> Self {
        Self {
            kind: GeometryKind::NotchedWire,
            notch: Some(NotchSpec::default()),
            ..Self::plain_wire(domains)
        }
    }

    /// Notched X-NW overlaid by one Y-NW at `column`.
    pub fn cross_overlay(domains: usize, y: YWireSpec) -> Self {
        Self {
            kind: GeometryKind::CrossOverlay,
            ynws: vec![y],
            ..Self::notched_wire(domains)
        }
    }

    /// Notched bundle of `n_xnw` X-NWs crossed by the given Y-NWs.
    pub fn bundle(n_xnw: usize, domains: usize, ynws: Vec<YWireSpec>) -> Self {
        Self {
            kind: GeometryKind::Bundle,
            n_xnw,
            ynws,
            ..Self::notched_wire(domains)
        }
    }

    /// A lone cross: two overlaid `length` × `width` rectangles.
    pub fn isolated_cross(length: f64, width: f64) -> Self {
        Self {
            kind: GeometryKind::CrossOverlay,
            wire_width: width,
            pitch: length,
            domains: 1,
            notch: None,
            ynws: vec![YWireSpec::at(0)],
            ..Self::plain_wire(1)
        }
    }

    pub fn wire_length(&self) -> f64 {
        self.pitch * self.domains as f64
    }

    /// Number of domains along Y-NW `q`.
    pub fn ynw_domains(&self, q: usize) -> usize {
        let y = &self.ynws[q];
        y.extra_above + (self.n_xnw - 1) * self.row_spacing + 1 + y.extra_below
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        for (what, v) in [
            ("wire width", self.wire_width),
            ("thickness", self.thickness),
            ("pitch", self.pitch),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{what} must be > 0")));
            }
        }
        if self.domains == 0 {
            return bad("a wire needs at least one domain");
        }
        if self.n_xnw == 0 {
            return bad("a bundle needs at least one X-NW");
        }
        if self.row_spacing == 0 {
            return bad("row spacing must be at least one Y-NW domain");
        }
        if let Some(n) = &self.notch {
            if !(n.depth > 0.0 && n.width > 0.0) {
                return bad("notch depth and width must be > 0");
            }
            if n.depth >= self.wire_width / 2.0 {
                return bad("notch depth must be less than half the wire width");
            }
        }
        if self.n_xnw > 1 && self.wire_width >= self.pitch * self.row_spacing as f64 {
            return Err(Error::OverlapConflict(
                "adjacent X-NWs touch: wire width exceeds the row spacing".into(),
            ));
        }
        let mut cols: Vec<usize> = Vec::new();
        for y in &self.ynws {
            if y.column >= self.domains {
                return Err(Error::PlacementOutOfRange(format!(
                    "Y-NW column {} outside 0..{}",
                    y.column, self.domains
                )));
            }
            if cols.contains(&y.column) {
                return Err(Error::OverlapConflict(format!(
                    "two Y-NWs share column {}",
                    y.column
                )));
            }
            cols.push(y.column);
        }
        Ok(())
    }
}

/// Wire orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// Half-open cell rectangle `[i0, i1) × [j0, j1)` on the layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub i0: usize,
    pub i1: usize,
    pub j0: usize,
    pub j1: usize,
}

impl CellRect {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.i0 && i < self.i1 && j >= self.j0 && j < self.j1
    }
}

/// One nanowire of the layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireInfo {
    pub axis: Axis,
    /// Row index for X-NWs, Y-NW index for Y-NWs.
    pub index: usize,
    /// Bounding rectangle of the wire's straight strip.
    pub rect: CellRect,
    /// Domain regions in order along the wire. For Y-NWs the order runs from
    /// the top (largest y) downwards.
    pub domains: Vec<usize>,
    /// Cells per domain along the wire axis.
    pub pitch_cells: usize,
}

impl WireInfo {
    /// Cells along the wire axis.
    pub fn len_cells(&self) -> usize {
        match self.axis {
            Axis::X => self.rect.i1 - self.rect.i0,
            Axis::Y => self.rect.j1 - self.rect.j0,
        }
    }

    /// Cells across the wire.
    pub fn width_cells(&self) -> usize {
        match self.axis {
            Axis::X => self.rect.j1 - self.rect.j0,
            Axis::Y => self.rect.i1 - self.rect.i0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionKind {
    /// Plain X-NW domain (row, column).
    XDomain { row: usize, column: usize },
    /// Pure Y-NW domain (Y-NW index, domain index from the top).
    YDomain { ynw: usize, index: usize },
    /// Shared cross-point domain.
    XCell {
        row: usize,
        column: usize,
        ynw: usize,
        index: usize,
    },
    /// Whole-box body of a cuboid test mesh.
    Body,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub kind: RegionKind,
    pub cells: Vec<usize>,
}

/// Cells removed by one notch bite. They are never occupied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotchRegion {
    pub name: String,
    pub cells: Vec<usize>,
}

pub const NO_REGION: u32 = u32::MAX;

/// Regular grid with an occupancy mask and labelled domain regions.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub cell: CellSize,
    occupied: Vec<bool>,
    region_of: Vec<u32>,
    pub regions: Vec<Region>,
    pub notches: Vec<NotchRegion>,
    pub wires: Vec<WireInfo>,
}

impl Mesh {
    /// Fully occupied box; one body region. Used for bulk tests.
    pub fn cuboid(nx: usize, ny: usize, nz: usize, cell: CellSize) -> Result<Self> {
        cell.validate()?;
        if nx * ny * nz == 0 {
            return Err(Error::InvalidParameter("empty mesh".into()));
        }
        let n = nx * ny * nz;
        Ok(Self {
            nx,
            ny,
            nz,
            cell,
            occupied: vec![true; n],
            region_of: vec![0; n],
            regions: vec![Region {
                name: "body".into(),
                kind: RegionKind::Body,
                cells: (0..n).collect(),
            }],
            notches: Vec::new(),
            wires: Vec::new(),
        })
    }

    /// Box with an explicit occupancy mask and a single body region.
    pub fn from_mask(
        nx: usize,
        ny: usize,
        nz: usize,
        cell: CellSize,
        occupied: Vec<bool>,
    ) -> Result<Self> {
        cell.validate()?;
        if occupied.len() != nx * ny * nz {
            return Err(Error::InvalidParameter("mask size mismatch".into()));
        }
        let cells: Vec<usize> = (0..occupied.len()).filter(|&c| occupied[c]).collect();
        if cells.is_empty() {
            return Err(Error::InvalidParameter("occupancy mask is empty".into()));
        }
        let mut region_of = vec![NO_REGION; occupied.len()];
        for &c in &cells {
            region_of[c] = 0;
        }
        Ok(Self {
            nx,
            ny,
            nz,
            cell,
            occupied,
            region_of,
            regions: vec![Region {
                name: "body".into(),
                kind: RegionKind::Body,
                cells,
            }],
            notches: Vec::new(),
            wires: Vec::new(),
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    #[inline]
    pub fn coords(&self, c: usize) -> (usize, usize, usize) {
        let i = c % self.nx;
        let j = (c / self.nx) % self.ny;
        let k = c / (self.nx * self.ny);
        (i, j, k)
    }

    /// Cell-center position in meters.
    pub fn position(&self, c: usize) -> (f64, f64, f64) {
        let (i, j, k) = self.coords(c);
        (
            (i as f64 + 0.5) * self.cell.dx,
            (j as f64 + 0.5) * self.cell.dy,
            (k as f64 + 0.5) * self.cell.dz,
        )
    }

    #[inline]
    pub fn is_occupied(&self, c: usize) -> bool {
        self.occupied[c]
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupied
    }

    pub fn occupied_count(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }

    pub fn occupied_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&c| self.occupied[c])
    }

    /// Region id of an occupied cell.
    pub fn region_of(&self, c: usize) -> Option<usize> {
        match self.region_of[c] {
            NO_REGION => None,
            r => Some(r as usize),
        }
    }

    pub fn region_by_name(&self, name: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.name == name)
    }

    /// Id of the X-Cell region at (row, column), if any.
    pub fn xcell(&self, row: usize, column: usize) -> Option<usize> {
        self.regions.iter().position(|r| {
            matches!(r.kind, RegionKind::XCell { row: rr, column: cc, .. } if rr == row && cc == column)
        })
    }

    pub fn x_wire(&self, row: usize) -> Option<&WireInfo> {
        self.wires
            .iter()
            .find(|w| w.axis == Axis::X && w.index == row)
    }

    pub fn y_wire(&self, q: usize) -> Option<&WireInfo> {
        self.wires.iter().find(|w| w.axis == Axis::Y && w.index == q)
    }

    /// Occupied neighbor of `c` one step along `axis` in direction `sign`.
    #[inline]
    pub fn neighbor(&self, c: usize, axis: usize, forward: bool) -> Option<usize> {
        let (i, j, k) = self.coords(c);
        let (n, stride, pos) = match axis {
            0 => (self.nx, 1, i),
            1 => (self.ny, self.nx, j),
            _ => (self.nz, self.nx * self.ny, k),
        };
        let nb = if forward {
            if pos + 1 >= n {
                return None;
            }
            c + stride
        } else {
            if pos == 0 {
                return None;
            }
            c - stride
        };
        self.occupied[nb].then_some(nb)
    }

    /// Same occupancy and cell size, so fields can be transferred.
    pub fn same_grid(&self, other: &Mesh) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.nz == other.nz
            && self.cell == other.cell
            && self.occupied == other.occupied
    }
}

fn to_cells(what: &str, value: f64, cell: f64) -> Result<usize> {
    let n = value / cell;
    let r = n.round();
    if r < 1.0 || (n - r).abs() > 1e-6 * r.max(1.0) {
        return Err(Error::NonIntegralDimension {
            what: what.to_string(),
            value,
            cell,
        });
    }
    Ok(r as usize)
}

/// Integer rectangle in layer cells, possibly with negative coordinates
/// before the bounding box is shifted to the origin.
#[derive(Debug, Clone, Copy)]
struct IRect {
    i0: i64,
    i1: i64,
    j0: i64,
    j1: i64,
}

impl IRect {
    fn shifted(&self, di: i64, dj: i64) -> CellRect {
        CellRect {
            i0: (self.i0 + di) as usize,
            i1: (self.i1 + di) as usize,
            j0: (self.j0 + dj) as usize,
            j1: (self.j1 + dj) as usize,
        }
    }
}

/// Build the mesh described by `spec`.
///
/// Occupancy is the union of the wire rectangles minus the notch bites of
/// each wire. Every occupied cell is labelled with exactly one domain
/// region; X-Cells take both their X-NW domain and their Y-NW domain.
pub fn build_mesh(spec: &GeometrySpec, cell: CellSize) -> Result<Mesh> {
    cell.validate()?;
    spec.validate()?;
    let w = to_cells("wire width", spec.wire_width, cell.dy)?;
    let w_x = to_cells("wire width", spec.wire_width, cell.dx)?;
    let p = to_cells("pitch", spec.pitch, cell.dx)?;
    let p_y = to_cells("pitch", spec.pitch, cell.dy)?;
    let nz = to_cells("thickness", spec.thickness, cell.dz)?;
    if nz != 1 {
        return Err(Error::InvalidParameter(
            "device meshes are a single layer of cells".into(),
        ));
    }
    let notch = match &spec.notch {
        Some(n) => Some((
            to_cells("notch depth", n.depth, cell.dy)?,
            to_cells("notch depth", n.depth, cell.dx)?,
            to_cells("notch width", n.width, cell.dx)?,
            to_cells("notch width", n.width, cell.dy)?,
        )),
        None => None,
    };

    let rows = spec.n_xnw;
    let spacing = (spec.row_spacing * p_y) as i64;
    let len = (spec.domains * p) as i64;
    // Row r centerline (in y cells, relative): row 0 on top.
    let center = |r: usize| ((rows - 1 - r) as i64) * spacing;
    let half_w = w as i64 / 2;
    let x_rects: Vec<IRect> = (0..rows)
        .map(|r| IRect {
            i0: 0,
            i1: len,
            j0: center(r) - half_w,
            j1: center(r) - half_w + w as i64,
        })
        .collect();

    let y_rects: Vec<(IRect, usize)> = spec
        .ynws
        .iter()
        .enumerate()
        .map(|(q, y)| {
            let n_dom = spec.ynw_domains(q) as i64;
            let i0 = (y.column * p) as i64 + (p as i64 - w_x as i64) / 2;
            // Top of domain 0: the top row's Y domain is centered on its
            // centerline, `extra_above` domains sit above it.
            let top = center(0) + p_y as i64 / 2 + y.extra_above as i64 * p_y as i64;
            let j1 = top;
            let j0 = top - n_dom * p_y as i64;
            (
                IRect {
                    i0,
                    i1: i0 + w_x as i64,
                    j0,
                    j1,
                },
                n_dom as usize,
            )
        })
        .collect();

    let mut min_i = 0i64;
    let mut max_i = len;
    let mut min_j = i64::MAX;
    let mut max_j = i64::MIN;
    for r in x_rects.iter().chain(y_rects.iter().map(|(r, _)| r)) {
        min_i = min_i.min(r.i0);
        max_i = max_i.max(r.i1);
        min_j = min_j.min(r.j0);
        max_j = max_j.max(r.j1);
    }
    let (di, dj) = (-min_i, -min_j);
    let nx = (max_i - min_i) as usize;
    let ny = (max_j - min_j) as usize;
    let n = nx * ny;
    let idx = |i: usize, j: usize| i + nx * j;

    let mut occupied = vec![false; n];
    let mut region_of = vec![NO_REGION; n];
    let mut regions: Vec<Region> = Vec::new();
    let mut notches: Vec<NotchRegion> = Vec::new();
    let mut wires: Vec<WireInfo> = Vec::new();

    let xcell_columns: Vec<usize> = spec.ynws.iter().map(|y| y.column).collect();

    // Region ids: X-NW domains first (X-Cells replace them), then pure Y
    // domains.
    let mut xcell_region = std::collections::HashMap::new();
    for (r, xr) in x_rects.iter().enumerate() {
        let rect = xr.shifted(di, dj);
        let mut doms = Vec::with_capacity(spec.domains);
        for c in 0..spec.domains {
            let id = regions.len();
            let kind = match xcell_columns.iter().position(|&col| col == c) {
                Some(q) => {
                    let index = spec.ynws[q].extra_above + r * spec.row_spacing;
                    xcell_region.insert((q, index), id);
                    RegionKind::XCell {
                        row: r,
                        column: c,
                        ynw: q,
                        index,
                    }
                }
                None => RegionKind::XDomain { row: r, column: c },
            };
            let name = match kind {
                RegionKind::XCell { .. } => format!("xcell{r}.{c}"),
                _ => format!("x{r}.d{c}"),
            };
            regions.push(Region {
                name,
                kind,
                cells: Vec::new(),
            });
            doms.push(id);
        }
        wires.push(WireInfo {
            axis: Axis::X,
            index: r,
            rect,
            domains: doms,
            pitch_cells: p,
        });
    }
    for (q, (yr, n_dom)) in y_rects.iter().enumerate() {
        let rect = yr.shifted(di, dj);
        let mut doms = Vec::with_capacity(*n_dom);
        for k in 0..*n_dom {
            if let Some(&id) = xcell_region.get(&(q, k)) {
                doms.push(id);
                continue;
            }
            let id = regions.len();
            regions.push(Region {
                name: format!("y{q}.d{k}"),
                kind: RegionKind::YDomain { ynw: q, index: k },
                cells: Vec::new(),
            });
            doms.push(id);
        }
        wires.push(WireInfo {
            axis: Axis::Y,
            index: q,
            rect,
            domains: doms,
            pitch_cells: p_y,
        });
    }

    // Notch bites per wire, kept as (wire, rect) so they only carve their own
    // wire.
    let mut bites: Vec<(usize, CellRect, String)> = Vec::new();
    if let Some((depth_y, depth_x, width_x, width_y)) = notch {
        for (wi, wire) in wires.iter().enumerate() {
            let r = wire.rect;
            let n_dom = wire.domains.len();
            for b in 1..n_dom {
                match wire.axis {
                    Axis::X => {
                        let bx = r.i0 + b * p;
                        let i0 = bx - width_x / 2;
                        let i1 = i0 + width_x;
                        bites.push((
                            wi,
                            CellRect { i0, i1, j0: r.j1 - depth_y, j1: r.j1 },
                            format!("notch.x{}.b{}.top", wire.index, b),
                        ));
                        bites.push((
                            wi,
                            CellRect { i0, i1, j0: r.j0, j1: r.j0 + depth_y },
                            format!("notch.x{}.b{}.bottom", wire.index, b),
                        ));
                    }
                    Axis::Y => {
                        let by = r.j1 - b * p_y;
                        let j0 = by - width_y / 2;
                        let j1 = j0 + width_y;
                        bites.push((
                            wi,
                            CellRect { i0: r.i0, i1: r.i0 + depth_x, j0, j1 },
                            format!("notch.y{}.b{}.left", wire.index, b),
                        ));
                        bites.push((
                            wi,
                            CellRect { i0: r.i1 - depth_x, i1: r.i1, j0, j1 },
                            format!("notch.y{}.b{}.right", wire.index, b),
                        ));
                    }
                }
            }
        }
    }
    let bitten = |wi: usize, i: usize, j: usize| {
        bites
            .iter()
            .any(|(bw, rect, _)| *bw == wi && rect.contains(i, j))
    };

    // Paint X-NWs, then Y-NWs.
    for (wi, wire) in wires.iter().enumerate() {
        let r = wire.rect;
        for j in r.j0..r.j1 {
            for i in r.i0..r.i1 {
                if bitten(wi, i, j) {
                    continue;
                }
                let dom = match wire.axis {
                    Axis::X => (i - r.i0) / p,
                    Axis::Y => (r.j1 - 1 - j) / p_y,
                };
                let id = wire.domains[dom] as u32;
                let c = idx(i, j);
                if region_of[c] != NO_REGION && region_of[c] != id {
                    let other = &regions[region_of[c] as usize].name;
                    let mine = &regions[id as usize].name;
                    // A Y-NW crossing an X-NW only overlays its own X-Cell.
                    return Err(Error::OverlapConflict(format!(
                        "cell ({i}, {j}) claimed by {other} and {mine}"
                    )));
                }
                occupied[c] = true;
                region_of[c] = id;
            }
        }
    }

    for c in 0..n {
        if region_of[c] != NO_REGION {
            regions[region_of[c] as usize].cells.push(c);
        }
    }
    for (_, rect, name) in &bites {
        let mut cells = Vec::new();
        for j in rect.j0..rect.j1 {
            for i in rect.i0..rect.i1 {
                let c = idx(i, j);
                if !occupied[c] {
                    cells.push(c);
                }
            }
        }
        notches.push(NotchRegion {
            name: name.clone(),
            cells,
        });
    }

    if occupied.iter().all(|o| !o) {
        return Err(Error::InvalidParameter("occupancy mask is empty".into()));
    }

    Ok(Mesh {
        nx,
        ny,
        nz: 1,
        cell,
        occupied,
        region_of,
        regions,
        notches,
        wires,
    })
}

/// Bundle of `n_xnw` parallel X-NWs crossed by `ynws`, with the wire and
/// notch dimensions of `base`.
pub fn bundle(
    base: &GeometrySpec,
    n_xnw: usize,
    ynws: &[YWireSpec],
    cell: CellSize,
) -> Result<Mesh> {
    if n_xnw == 0 {
        return Err(Error::PlacementOutOfRange("bundle needs n_xnw >= 1".into()));
    }
    let spec = GeometrySpec {
        kind: GeometryKind::Bundle,
        n_xnw,
        ynws: ynws.to_vec(),
        ..base.clone()
    };
    build_mesh(&spec, cell)
}
