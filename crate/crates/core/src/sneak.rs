//! Lumped resistor network of a bundle and its sneak paths.
//!
//! Every X-NW runs from its bit line `BL` through an on shift-line device,
//! along its wire segments and X-Cells, and through a second on device to
//! its sink `BL̄`, which is the ground node. Y-NWs join the X-Cells of
//! consecutive rows; each Y segment sits behind an off Y-NW access device.
//! The Y-NW's own end lines float during an X shift, so they carry no
//! current.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{self, Write};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::amr::{link_resistance, ResistanceModel};
use crate::error::{Error, Result};
use crate::geometry::{Axis, CellSize};
use crate::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    WireSegment,
    XCellLink,
    AccessDevice,
}

impl BranchKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BranchKind::WireSegment => "wire_segment",
            BranchKind::XCellLink => "xcell_link",
            BranchKind::AccessDevice => "access_device",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceState {
    On,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub a: usize,
    pub b: usize,
    /// Resistance of wire branches. Devices take theirs from their state.
    pub ohms: f64,
    pub kind: BranchKind,
    pub state: Option<DeviceState>,
    /// True for branches of a Y-NW.
    pub y_path: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Source {
    /// Current `amps` injected into `node`, returning through ground.
    Current { node: usize, amps: f64 },
    /// `volts` from ground to `node`.
    Voltage { node: usize, volts: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResistorNetwork {
    pub names: Vec<String>,
    pub ground: usize,
    pub branches: Vec<Branch>,
    pub sources: Vec<Source>,
    pub r_on: f64,
    pub r_off: f64,
}

impl ResistorNetwork {
    pub fn new(r_on: f64, r_off: f64) -> Self {
        Self {
            names: vec!["gnd".into()],
            ground: 0,
            branches: Vec::new(),
            sources: Vec::new(),
            r_on,
            r_off,
        }
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.names.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn add_resistor(&mut self, a: usize, b: usize, ohms: f64, kind: BranchKind) -> usize {
        self.branches.push(Branch {
            a,
            b,
            ohms,
            kind,
            state: None,
            y_path: false,
        });
        self.branches.len() - 1
    }

    pub fn add_device(&mut self, a: usize, b: usize, state: DeviceState) -> usize {
        self.branches.push(Branch {
            a,
            b,
            ohms: f64::NAN,
            kind: BranchKind::AccessDevice,
            state: Some(state),
            y_path: false,
        });
        self.branches.len() - 1
    }

    /// Effective resistance of a branch; may be infinite.
    pub fn resistance(&self, b: &Branch) -> f64 {
        match b.state {
            Some(DeviceState::On) => self.r_on,
            Some(DeviceState::Off) => self.r_off,
            None => b.ohms,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_on > 0.0 && self.r_off >= self.r_on) {
            return Err(Error::InvalidParameter(format!(
                "devices need 0 < R_on <= R_off, got {} and {}",
                self.r_on, self.r_off
            )));
        }
        let n = self.node_count();
        for (k, b) in self.branches.iter().enumerate() {
            let r = self.resistance(b);
            if b.a >= n || b.b >= n || b.a == b.b {
                return Err(Error::InvalidParameter(format!("branch {k} has bad nodes")));
            }
            if !(r > 0.0) {
                return Err(Error::InvalidParameter(format!("branch {k} has resistance {r}")));
            }
        }
        for s in &self.sources {
            let node = match s {
                Source::Current { node, .. } | Source::Voltage { node, .. } => *node,
            };
            if node >= n || node == self.ground {
                return Err(Error::InvalidParameter(format!("source at bad node {node}")));
            }
        }
        Ok(())
    }
}

/// Node potentials and branch currents (`a` to `b`).
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub potentials: Vec<f64>,
    pub currents: Vec<f64>,
    /// Current delivered by each source, in source order.
    pub source_currents: Vec<f64>,
}

/// Nodal analysis with voltage sources as extra unknowns.
pub fn solve(net: &ResistorNetwork) -> Result<Solution> {
    net.validate()?;
    let n = net.node_count();
    // Floating nodes make the system singular.
    let mut adj = vec![Vec::new(); n];
    for b in &net.branches {
        if net.resistance(b).is_finite() {
            adj[b.a].push(b.b);
            adj[b.b].push(b.a);
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([net.ground]);
    seen[net.ground] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    if let Some(f) = seen.iter().position(|s| !s) {
        return Err(Error::SingularSystem(format!(
            "node {} ({}) is not connected to ground",
            f, net.names[f]
        )));
    }

    let idx = |u: usize| if u == net.ground { None } else { Some(if u < net.ground { u } else { u - 1 }) };
    let nv = n - 1;
    let vs: Vec<usize> = (0..net.sources.len())
        .filter(|&k| matches!(net.sources[k], Source::Voltage { .. }))
        .collect();
    let dim = nv + vs.len();
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    for b in &net.branches {
        let g = 1.0 / net.resistance(b);
        if g == 0.0 {
            continue;
        }
        let (ia, ib) = (idx(b.a), idx(b.b));
        if let Some(i) = ia {
            a[(i, i)] += g;
        }
        if let Some(j) = ib {
            a[(j, j)] += g;
        }
        if let (Some(i), Some(j)) = (ia, ib) {
            a[(i, j)] -= g;
            a[(j, i)] -= g;
        }
    }
    for s in &net.sources {
        if let Source::Current { node, amps } = *s {
            rhs[idx(node).unwrap()] += amps;
        }
    }
    for (row, &k) in vs.iter().enumerate() {
        let Source::Voltage { node, volts } = net.sources[k] else { unreachable!() };
        let i = idx(node).unwrap();
        let r = nv + row;
        // The source current enters `node`.
        a[(i, r)] -= 1.0;
        a[(r, i)] += 1.0;
        rhs[r] = volts;
    }
    let x = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("nodal matrix is singular".into()))?;
    let mut potentials = vec![0.0; n];
    for u in 0..n {
        if let Some(i) = idx(u) {
            potentials[u] = x[i];
        }
    }
    let currents = net
        .branches
        .iter()
        .map(|b| (potentials[b.a] - potentials[b.b]) / net.resistance(b))
        .collect();
    let mut vs_iter = vs.iter().enumerate();
    let source_currents = net
        .sources
        .iter()
        .map(|s| match s {
            Source::Current { amps, .. } => *amps,
            Source::Voltage { .. } => {
                let (row, _) = vs_iter.next().unwrap();
                x[nv + row]
            }
        })
        .collect();
    Ok(Solution {
        potentials,
        currents,
        source_currents,
    })
}

impl Solution {
    /// Largest |net current| at any non-ground node.
    pub fn kcl_residual(&self, net: &ResistorNetwork) -> f64 {
        let mut sum = vec![0.0; net.node_count()];
        for (b, i) in net.branches.iter().zip(&self.currents) {
            sum[b.a] -= i;
            sum[b.b] += i;
        }
        for (s, i) in net.sources.iter().zip(&self.source_currents) {
            match s {
                Source::Current { node, .. } | Source::Voltage { node, .. } => sum[*node] += i,
            }
        }
        sum.iter()
            .enumerate()
            .filter(|(u, _)| *u != net.ground)
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }

    /// `(Σ I²R, Σ source power)`.
    pub fn power_balance(&self, net: &ResistorNetwork) -> (f64, f64) {
        let dissipated = net
            .branches
            .iter()
            .zip(&self.currents)
            .map(|(b, i)| {
                let r = net.resistance(b);
                if r.is_finite() {
                    i * i * r
                } else {
                    0.0
                }
            })
            .sum();
        let delivered = net
            .sources
            .iter()
            .zip(&self.source_currents)
            .map(|(s, i)| match s {
                Source::Current { node, .. } | Source::Voltage { node, .. } => self.potentials[*node] * i,
            })
            .sum();
        (dissipated, delivered)
    }
}

/// `I = j·w·t`.
pub fn density_to_current(j: f64, width: f64, thickness: f64) -> f64 {
    j * width * thickness
}

// ---------------------------------------------------------------------------
// Bundle networks

/// How the bit lines are driven.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    /// Ideal current source per energized bit line, A.
    Current(f64),
    /// Ideal voltage per energized bit line, V.
    Voltage(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    ShiftOne,
    ShiftAll,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::ShiftOne => "shift_one",
            Scenario::ShiftAll => "shift_all",
        }
    }
}

/// Layout and electrical defaults of a bundle network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BundleSpec {
    pub n_xnw: usize,
    /// Domains per X-NW.
    pub domains: usize,
    /// Y-NW columns.
    pub y_columns: Vec<usize>,
    /// Y-NW domains above the top row.
    pub y_extra_above: usize,
    pub y_extra_below: usize,
    /// Cells per domain along a wire.
    pub pitch_cells: usize,
    /// Cells across a wire.
    pub width_cells: usize,
    pub cell: CellSize,
    pub model: ResistanceModel,
    pub r_on: f64,
    pub r_off: f64,
    /// Domain signs per X-NW; `None` uses the worst case.
    pub pattern: Option<Vec<Vec<bool>>>,
    /// Row holding the alternating pattern in the worst case.
    pub worst_row: usize,
    /// Energized row for `ShiftOne`.
    pub driven_row: usize,
    pub drive: Drive,
}

/// Off-state resistance of the access devices, Ω. Chosen so an off
/// device leaks a few percent of a shift current at the potential of a
/// mid-wire X-Cell.
pub const DEFAULT_R_OFF: f64 = 100e3;
pub const DEFAULT_R_ON: f64 = 1e3;

impl Default for BundleSpec {
    fn default() -> Self {
        Self {
            n_xnw: 8,
            domains: 8,
            y_columns: vec![4],
            y_extra_above: 1,
            y_extra_below: 0,
            pitch_cells: 40,
            width_cells: 20,
            cell: CellSize::default(),
            model: ResistanceModel::default(),
            r_on: DEFAULT_R_ON,
            r_off: DEFAULT_R_OFF,
            pattern: None,
            worst_row: 1,
            driven_row: 1,
            drive: Drive::Current(density_to_current(1.1e12, 40e-9, 1e-9)),
        }
    }
}

impl BundleSpec {
    /// `n_xnw` wires with `n_y` Y-NWs spread over the interior columns.
    pub fn scaled(n_xnw: usize, n_y: usize) -> Self {
        let base = Self::default();
        let domains = base.domains.max(n_y + 1);
        let y_columns = if n_y == 1 {
            vec![domains / 2]
        } else {
            (1..=n_y).map(|k| k * domains / (n_y + 1)).collect()
        };
        Self {
            n_xnw,
            domains,
            y_columns,
            ..base
        }
    }

    /// Explicit pattern or the worst case: one alternating row, the rest
    /// uniform.
    pub fn bits(&self) -> Vec<Vec<bool>> {
        self.pattern.clone().unwrap_or_else(|| {
            (0..self.n_xnw)
                .map(|r| {
                    (0..self.domains)
                        .map(|d| if r == self.worst_row { d % 2 == 0 } else { true })
                        .collect()
                })
                .collect()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_xnw == 0 || self.domains == 0 || self.pitch_cells == 0 || self.width_cells == 0 {
            return Err(Error::InvalidPlacement("bundle counts must be >= 1".into()));
        }
        let mut cols = self.y_columns.clone();
        cols.sort_unstable();
        if cols.windows(2).any(|w| w[0] == w[1]) || cols.last().is_some_and(|&c| c >= self.domains) {
            return Err(Error::InvalidPlacement(format!(
                "Y-NW columns {:?} must be distinct and below {}",
                self.y_columns, self.domains
            )));
        }
        if self.driven_row >= self.n_xnw {
            return Err(Error::InvalidPlacement(format!("driven row {} outside the bundle", self.driven_row)));
        }
        let bits = self.bits();
        if bits.len() != self.n_xnw || bits.iter().any(|r| r.len() != self.domains) {
            return Err(Error::InvalidPlacement("pattern does not match the bundle".into()));
        }
        Ok(())
    }
}

/// Series resistance of a uniform-width strip whose cells along the flow
/// have the given magnetizations, from cell `from` to cell `to` (centres).
fn chain(m: &[Vec3], from: usize, to: usize, width: usize, cell: CellSize, flow: Axis, model: &ResistanceModel) -> f64 {
    let (lo, hi) = if from <= to { (from, to) } else { (to, from) };
    (lo..hi).map(|s| link_resistance(m[s], m[s + 1], cell, flow, model)).sum::<f64>() / width as f64
}

fn lead(m: Vec3, width: usize, cell: CellSize, flow: Axis, model: &ResistanceModel) -> f64 {
    0.5 * link_resistance(m, m, cell, flow, model) / width as f64
}

fn cells_of(bits: &[bool], pitch: usize) -> Vec<Vec3> {
    bits.iter()
        .flat_map(|&b| std::iter::repeat(if b { Vec3::Z } else { -Vec3::Z }).take(pitch))
        .collect()
}

/// Names of the interesting nodes of a bundle network.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleNodes {
    /// Bit line of each row.
    pub bl: Vec<usize>,
    /// X-Cell node per row and Y-NW.
    pub xcell: Vec<Vec<usize>>,
}

/// Builds the bundle network without sources.
pub fn build_array_network(spec: &BundleSpec) -> Result<(ResistorNetwork, BundleNodes)> {
    spec.validate()?;
    let bits = spec.bits();
    let (p, w, cell, model) = (spec.pitch_cells, spec.width_cells, spec.cell, &spec.model);
    let mut net = ResistorNetwork::new(spec.r_on, spec.r_off);
    let mut cols = spec.y_columns.clone();
    cols.sort_unstable();
    let mut bl = Vec::new();
    let mut xcell = Vec::new();
    for (r, row) in bits.iter().enumerate() {
        let m = cells_of(row, p);
        let last = m.len() - 1;
        let b = net.add_node(format!("bl{r}"));
        let left = net.add_node(format!("x{r}.left"));
        let right = net.add_node(format!("x{r}.right"));
        net.add_device(b, left, DeviceState::On);
        net.add_device(right, net.ground, DeviceState::On);
        bl.push(b);
        let mut prev = (left, 0usize);
        let mut lead_left = lead(m[0], w, cell, Axis::X, model);
        let mut nodes = vec![0; spec.y_columns.len()];
        for &c in &cols {
            let node = net.add_node(format!("xcell{r}.{c}"));
            let at = c * p + p / 2;
            let r_seg = lead_left + chain(&m, prev.1, at, w, cell, Axis::X, model);
            net.add_resistor(prev.0, node, r_seg, BranchKind::WireSegment);
            lead_left = 0.0;
            prev = (node, at);
            let q = spec.y_columns.iter().position(|&y| y == c).unwrap();
            nodes[q] = node;
        }
        let r_seg = lead_left + chain(&m, prev.1, last, w, cell, Axis::X, model) + lead(m[last], w, cell, Axis::X, model);
        net.add_resistor(prev.0, right, r_seg, BranchKind::WireSegment);
        xcell.push(nodes);
    }
    for (q, &c) in spec.y_columns.iter().enumerate() {
        // Domain signs along the Y-NW, top first; own domains are +z.
        let mut ybits = vec![true; spec.y_extra_above];
        ybits.extend(bits.iter().map(|row| row[c]));
        ybits.extend(std::iter::repeat(true).take(spec.y_extra_below));
        let m = cells_of(&ybits, p);
        // Only the X-Cells carry current: the Y-NW's own domains end at
        // access devices that are off and whose lines float during an X
        // shift.
        let ynodes: Vec<(usize, usize)> = (0..spec.n_xnw)
            .map(|r| (xcell[r][q], (r + spec.y_extra_above) * p + p / 2))
            .collect();
        for pair in ynodes.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let r_seg = chain(&m, a.1, b.1, w, cell, Axis::Y, model);
            let mid = net.add_node(format!("y{q}.gate{}", a.1 / p));
            let k1 = net.add_resistor(a.0, mid, r_seg, BranchKind::XCellLink);
            let k2 = net.add_device(mid, b.0, DeviceState::Off);
            net.branches[k1].y_path = true;
            net.branches[k2].y_path = true;
        }
    }
    Ok((net, BundleNodes { bl, xcell }))
}

/// Leakage through the Y-NWs during an X shift.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeakageReport {
    pub scenario: Scenario,
    /// `(branch index, current A)` for every Y-NW branch.
    pub y_currents: Vec<(usize, f64)>,
    pub max_leakage: f64,
    /// Current delivered into each energized bit line, A.
    pub injected: Vec<f64>,
    /// `max_leakage` over the mean injected current, %.
    pub percent: f64,
}

/// Energizes the scenario's bit lines and measures Y-NW branch currents.
pub fn leakage_analysis(spec: &BundleSpec, scenario: Scenario) -> Result<LeakageReport> {
    let (mut net, nodes) = build_array_network(spec)?;
    let rows: Vec<usize> = match scenario {
        Scenario::ShiftOne => vec![spec.driven_row],
        Scenario::ShiftAll => (0..spec.n_xnw).collect(),
    };
    for &r in &rows {
        net.sources.push(match spec.drive {
            Drive::Current(a) => Source::Current { node: nodes.bl[r], amps: a },
            Drive::Voltage(v) => Source::Voltage { node: nodes.bl[r], volts: v },
        });
    }
    leakage_of(&net, scenario)
}

/// Leakage report of a network whose Y-NW branches are flagged.
pub fn leakage_of(net: &ResistorNetwork, scenario: Scenario) -> Result<LeakageReport> {
    let sol = solve(net)?;
    let y_currents: Vec<(usize, f64)> = net
        .branches
        .iter()
        .enumerate()
        .filter(|(_, b)| b.y_path)
        .map(|(k, _)| (k, sol.currents[k]))
        .collect();
    let max_leakage = y_currents.iter().map(|c| c.1.abs()).fold(0.0, f64::max);
    let injected = sol.source_currents.clone();
    let mean = injected.iter().map(|i| i.abs()).sum::<f64>() / injected.len().max(1) as f64;
    let percent = if mean > 0.0 { 100.0 * max_leakage / mean } else { 0.0 };
    Ok(LeakageReport {
        scenario,
        y_currents,
        max_leakage,
        injected,
        percent,
    })
}

/// Leakage percentages for a list of off resistances.
pub fn r_off_sweep(spec: &BundleSpec, scenario: Scenario, r_offs: &[f64]) -> Result<Vec<(f64, LeakageReport)>> {
    r_offs
        .iter()
        .map(|&r| {
            let s = BundleSpec { r_off: r, ..spec.clone() };
            Ok((r, leakage_analysis(&s, scenario)?))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// I/O

pub const EDGE_HEADER: &str = "# xdwm network v1";

/// Plain-text edge list: one `node a b ohms kind state` line per branch,
/// preceded by node names and followed by sources.
pub fn write_edge_list(net: &ResistorNetwork) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{EDGE_HEADER} ground={} r_on={:e} r_off={:e}", net.ground, net.r_on, net.r_off);
    for (k, name) in net.names.iter().enumerate() {
        let _ = writeln!(s, "node {k} {name}");
    }
    for b in &net.branches {
        let state = match b.state {
            Some(DeviceState::On) => "on",
            Some(DeviceState::Off) => "off",
            None => "-",
        };
        let y = if b.y_path { " y" } else { "" };
        let _ = writeln!(s, "branch {} {} {:e} {} {state}{y}", b.a, b.b, b.ohms, b.kind.as_str());
    }
    for src in &net.sources {
        let _ = match src {
            Source::Current { node, amps } => writeln!(s, "current {node} {amps:e}"),
            Source::Voltage { node, volts } => writeln!(s, "voltage {node} {volts:e}"),
        };
    }
    s
}

pub fn parse_edge_list(text: &str) -> Result<ResistorNetwork> {
    let mut net = ResistorNetwork::new(DEFAULT_R_ON, DEFAULT_R_OFF);
    net.names.clear();
    for (k, raw) in text.lines().enumerate() {
        let n = k + 1;
        let err = |msg: String| Error::Parse { line: n, msg };
        let l = raw.trim();
        if let Some(h) = l.strip_prefix(EDGE_HEADER) {
            for kv in h.split_whitespace() {
                let (key, v) = kv.split_once('=').ok_or_else(|| err(format!("bad header field {kv:?}")))?;
                let num = v.parse::<f64>().map_err(|_| err(format!("bad number {v:?}")))?;
                match key {
                    "ground" => net.ground = num as usize,
                    "r_on" => net.r_on = num,
                    "r_off" => net.r_off = num,
                    _ => return Err(err(format!("unknown header field {key:?}"))),
                }
            }
            continue;
        }
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = l.split_whitespace().collect();
        let int = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad index {s:?}")));
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number {s:?}")));
        match parts.as_slice() {
            ["node", id, name] => {
                if int(id)? != net.names.len() {
                    return Err(err("nodes must be listed in order".into()));
                }
                net.names.push(name.to_string());
            }
            ["branch", a, b, ohms, kind, state, rest @ ..] => {
                let kind = match *kind {
                    "wire_segment" => BranchKind::WireSegment,
                    "xcell_link" => BranchKind::XCellLink,
                    "access_device" => BranchKind::AccessDevice,
                    _ => return Err(err(format!("unknown kind {kind:?}"))),
                };
                let state = match *state {
                    "on" => Some(DeviceState::On),
                    "off" => Some(DeviceState::Off),
                    "-" => None,
                    _ => return Err(err(format!("unknown state {state:?}"))),
                };
                net.branches.push(Branch {
                    a: int(a)?,
                    b: int(b)?,
                    ohms: num(ohms)?,
                    kind,
                    state,
                    y_path: rest == ["y"],
                });
            }
            ["current", node, a] => net.sources.push(Source::Current { node: int(node)?, amps: num(a)? }),
            ["voltage", node, v] => net.sources.push(Source::Voltage { node: int(node)?, volts: num(v)? }),
            _ => return Err(err(format!("unrecognised line {l:?}"))),
        }
    }
    Ok(net)
}

/// Leakage reports as CSV with the electrical defaults in the header.
pub fn write_leakage_csv(w: &mut impl Write, spec: &BundleSpec, reports: &[(String, LeakageReport)]) -> io::Result<()> {
    let drive = match spec.drive {
        Drive::Current(a) => format!("current:{a:e}A"),
        Drive::Voltage(v) => format!("voltage:{v:e}V"),
    };
    writeln!(
        w,
        "# xdwm leakage v1 rho={:e} amr={} r_on={:e} r_off={:e} drive={drive}",
        spec.model.rho, spec.model.amr, spec.r_on, spec.r_off
    )?;
    writeln!(w, "case,scenario,max_leakage_a,injected_a,percent")?;
    for (name, r) in reports {
        let inj = r.injected.iter().map(|i| i.abs()).sum::<f64>() / r.injected.len().max(1) as f64;
        writeln!(w, "{name},{},{:.6e},{:.6e},{:.6}", r.scenario.as_str(), r.max_leakage, inj, r.percent)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_pair() {
        let mut net = ResistorNetwork::new(1.0, 1.0);
        let a = net.add_node("a");
        let b = net.add_node("b");
        net.add_resistor(a, b, 100.0, BranchKind::WireSegment);
        net.add_resistor(b, net.ground, 300.0, BranchKind::WireSegment);
        net.sources.push(Source::Voltage { node: a, volts: 1.0 });
        let s = solve(&net).unwrap();
        assert!((s.source_currents[0] - 1.0 / 400.0).abs() < 1e-15);
        assert!((s.currents[1] - 1.0 / 400.0).abs() < 1e-15);
    }

    #[test]
    fn shift_current() {
        assert!((density_to_current(1.1e12, 40e-9, 1e-9) - 44e-6).abs() < 1e-18);
    }
}
