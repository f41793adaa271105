//! Domain-wall experiments on the micromagnetic model: seeding and
//! tracking walls, velocity runs, shift-current windows, cross stability
//! and the two-wire X-then-Y shift demo.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DemagMode, MagnetizationField};
use crate::geometry::{build_mesh, Axis, CellSize, GeometrySpec, Mesh, RegionKind, WireInfo, YWireSpec};
use crate::llg::{CurrentMap, Llg, SimState, SolverConfig};
use crate::material::{MaterialParams, PhysicalConstants};
use crate::vec3::Vec3;

/// Everything a micromagnetic run needs besides the geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DwContext {
    pub params: MaterialParams,
    pub consts: PhysicalConstants,
    pub solver: SolverConfig,
    pub demag: DemagMode,
    pub cell: CellSize,
    /// Torque threshold used when relaxing seeded walls. Walls in finite
    /// wires creep under the end stray fields, so this sits above the
    /// solver's own relaxation threshold.
    pub seed_torque: f64,
}

impl Default for DwContext {
    fn default() -> Self {
        Self {
            params: MaterialParams::default(),
            consts: PhysicalConstants::SI,
            solver: SolverConfig::default(),
            demag: DemagMode::default(),
            cell: CellSize::default(),
            seed_torque: 1e-3,
        }
    }
}

impl DwContext {
    pub fn mesh(&self, spec: &GeometrySpec) -> Result<Mesh> {
        build_mesh(spec, self.cell)
    }

    pub fn integrator(&self, mesh: &Mesh) -> Result<Llg> {
        Llg::new(mesh, self.params, self.consts, self.demag, self.solver)
    }

    fn seeding_integrator(&self, mesh: &Mesh) -> Result<Llg> {
        let cfg = SolverConfig {
            relax_torque: self.seed_torque,
            ..self.solver
        };
        Llg::new(mesh, self.params, self.consts, self.demag, cfg)
    }

    /// Bloch profile parameter sqrt(A/K_eff).
    pub fn wall_param(&self) -> f64 {
        self.params.wall_width(&self.consts) / std::f64::consts::PI
    }
}

/// `v = βγħP/(2eαMs)·J`, the steady wall speed of the one-dimensional
/// model below breakdown.
pub fn analytic_dw_velocity(j: f64, p: &MaterialParams, c: &PhysicalConstants) -> f64 {
    p.beta * c.gamma * c.hbar * p.polarization / (2.0 * c.e * p.alpha * p.ms) * j
}

// ---------------------------------------------------------------------------
// Seeding

/// Region signs: `true` is +z. One entry per mesh region.
pub type Pattern = Vec<bool>;

/// All regions of `mesh` set to `up`.
pub fn uniform_pattern(mesh: &Mesh, up: bool) -> Pattern {
    vec![up; mesh.regions.len()]
}

/// Writes `bits` onto the domains of wire `w` (an index into `mesh.wires`).
pub fn set_wire_bits(pattern: &mut Pattern, mesh: &Mesh, w: usize, bits: &[bool]) -> Result<()> {
    let wire = mesh
        .wires
        .get(w)
        .ok_or_else(|| Error::InvalidParameter(format!("no wire {w}")))?;
    if bits.len() != wire.domains.len() {
        return Err(Error::InvalidParameter(format!(
            "wire {w} has {} domains, got {} bits",
            wire.domains.len(),
            bits.len()
        )));
    }
    for (&r, &b) in wire.domains.iter().zip(bits) {
        pattern[r] = b;
    }
    Ok(())
}

/// Coordinate of cell `(i, j)` along `wire` in cells, from the wire start
/// (left end for X-NWs, top for Y-NWs), measured at the cell centre.
fn along(wire: &WireInfo, i: usize, j: usize) -> f64 {
    match wire.axis {
        Axis::X => (i - wire.rect.i0) as f64 + 0.5,
        Axis::Y => (wire.rect.j1 - 1 - j) as f64 + 0.5,
    }
}

/// Smooth magnetization for a domain pattern. Where neighbouring domains
/// of a wire differ, a Bloch profile of parameter `delta` (m) is laid
/// across the boundary, tilting towards the wire's transverse in-plane
/// axis so the wall carries torque from the first step.
pub fn pattern_field(mesh: &Mesh, pattern: &[bool], delta: f64) -> MagnetizationField {
    let sign = |r: usize| if pattern[r] { 1.0 } else { -1.0 };
    MagnetizationField::from_fn(mesh, |c| {
        let Some(r) = mesh.region_of(c) else {
            return Vec3::Z;
        };
        let (i, j, _) = mesh.coords(c);
        let wire = mesh
            .wires
            .iter()
            .find(|w| w.axis == Axis::X && w.rect.contains(i, j))
            .or_else(|| mesh.wires.iter().find(|w| w.rect.contains(i, j)));
        let Some(wire) = wire else {
            return Vec3::Z * sign(r);
        };
        let (p, d_len) = match wire.axis {
            Axis::X => (wire.pitch_cells, mesh.cell.dx),
            Axis::Y => (wire.pitch_cells, mesh.cell.dy),
        };
        let s = along(wire, i, j);
        let k = ((s / p as f64) as usize).min(wire.domains.len() - 1);
        // Nearest boundary with a sign change.
        let mut best: Option<(f64, f64, f64)> = None;
        for b in [k, k + 1] {
            if b == 0 || b >= wire.domains.len() {
                continue;
            }
            let (sl, sr) = (sign(wire.domains[b - 1]), sign(wire.domains[b]));
            if sl == sr {
                continue;
            }
            let x = (s - (b * p) as f64) * d_len;
            if best.map_or(true, |(bx, _, _)| x.abs() < bx.abs()) {
                best = Some((x, sl, sr));
            }
        }
        match best {
            None => Vec3::Z * sign(r),
            Some((x, sl, sr)) => {
                let mz = 0.5 * (sl + sr) + 0.5 * (sr - sl) * (x / delta).tanh();
                let t = (1.0 - mz * mz).max(0.0).sqrt();
                match wire.axis {
                    Axis::X => Vec3::new(0.0, t, mz),
                    Axis::Y => Vec3::new(t, 0.0, mz),
                }
            }
        }
    })
}

/// Seeds `pattern` and relaxes it with the context's seeding threshold.
pub fn seed_pattern(ctx: &DwContext, mesh: &Mesh, pattern: &[bool]) -> Result<SimState> {
    let mut state = SimState::new(pattern_field(mesh, pattern, ctx.wall_param()));
    ctx.seeding_integrator(mesh)?.relax(&mut state)?;
    Ok(state)
}

/// One wall on wire `w` at domain boundary `boundary`: domains before it
/// +z, from it on −z, everything else +z.
pub fn seed_wall(ctx: &DwContext, mesh: &Mesh, w: usize, boundary: usize) -> Result<SimState> {
    let wire = mesh
        .wires
        .get(w)
        .ok_or_else(|| Error::InvalidParameter(format!("no wire {w}")))?;
    if boundary == 0 || boundary >= wire.domains.len() {
        return Err(Error::InvalidParameter(format!(
            "boundary {boundary} outside 1..{}",
            wire.domains.len()
        )));
    }
    let bits: Vec<bool> = (0..wire.domains.len()).map(|d| d < boundary).collect();
    let mut pattern = uniform_pattern(mesh, true);
    set_wire_bits(&mut pattern, mesh, w, &bits)?;
    seed_pattern(ctx, mesh, &pattern)
}

/// Single wall on a notch-free X-NW at `x0` (m from the left end), +z on
/// the left.
pub fn wall_at(mesh: &Mesh, row: usize, x0: f64, delta: f64) -> Result<MagnetizationField> {
    let wire = mesh
        .x_wire(row)
        .ok_or_else(|| Error::InvalidParameter(format!("no X-NW row {row}")))?
        .clone();
    Ok(MagnetizationField::from_fn(mesh, |c| {
        let (i, j, _) = mesh.coords(c);
        if !wire.rect.contains(i, j) {
            return Vec3::Z;
        }
        let x = along(&wire, i, j) * mesh.cell.dx - x0;
        let mz = -(x / delta).tanh();
        Vec3::new(0.0, (1.0 - mz * mz).max(0.0).sqrt(), mz)
    }))
}

// ---------------------------------------------------------------------------
// Tracking

/// Width-averaged m_z along wire `w`, one value per cell along the axis.
pub fn mz_profile(m: &MagnetizationField, mesh: &Mesh, w: usize) -> Vec<f64> {
    let wire = &mesh.wires[w];
    let r = wire.rect;
    let mut out = Vec::with_capacity(wire.len_cells());
    for s in 0..wire.len_cells() {
        let (mut sum, mut n) = (0.0, 0usize);
        for t in 0..wire.width_cells() {
            let (i, j) = match wire.axis {
                Axis::X => (r.i0 + s, r.j0 + t),
                Axis::Y => (r.i0 + t, r.j1 - 1 - s),
            };
            let c = mesh.index(i, j, 0);
            if mesh.is_occupied(c) {
                sum += m.get(c).z;
                n += 1;
            }
        }
        out.push(if n > 0 { sum / n as f64 } else { 0.0 });
    }
    out
}

/// Zero crossings of a profile sampled at cell centres of length `d`,
/// linearly interpolated, in metres from the wire start.
pub fn zero_crossings(profile: &[f64], d: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for s in 0..profile.len().saturating_sub(1) {
        let (a, b) = (profile[s], profile[s + 1]);
        if (a >= 0.0) != (b >= 0.0) {
            out.push((s as f64 + 0.5 + a / (a - b)) * d);
        }
    }
    out
}

fn along_len(mesh: &Mesh, w: usize) -> f64 {
    match mesh.wires[w].axis {
        Axis::X => mesh.cell.dx,
        Axis::Y => mesh.cell.dy,
    }
}

/// Positions of all walls on wire `w`.
pub fn track_walls(m: &MagnetizationField, mesh: &Mesh, w: usize) -> Vec<f64> {
    zero_crossings(&mz_profile(m, mesh, w), along_len(mesh, w))
}

/// Position of the single wall on wire `w`.
pub fn track_wall(m: &MagnetizationField, mesh: &Mesh, w: usize) -> Result<f64> {
    let walls = track_walls(m, mesh, w);
    if walls.len() == 1 {
        Ok(walls[0])
    } else {
        Err(Error::WallCountMismatch {
            wire: w,
            expected: 1,
            found: walls.len(),
        })
    }
}

/// Wall position samples of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DwTrace {
    pub wire: usize,
    /// `(time s, position m)`
    pub samples: Vec<(f64, f64)>,
}

impl DwTrace {
    /// Least-squares slope of position against time over samples at or
    /// after `t_from`.
    pub fn slope_from(&self, t_from: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.samples.iter().copied().filter(|s| s.0 >= t_from).collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let xm = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for (t, x) in &pts {
            sxy += (t - tm) * (x - xm);
            sxx += (t - tm) * (t - tm);
        }
        (sxx > 0.0).then(|| sxy / sxx)
    }
}

// ---------------------------------------------------------------------------
// Velocity

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VelocityConfig {
    /// Domains of the notch-free wire.
    pub domains: usize,
    /// Current density along +x, A/m².
    pub j: f64,
    /// Driven time, s.
    pub duration: f64,
    /// Initial wall position from the left end, m.
    pub start: f64,
    /// Sampling interval of the trace, s.
    pub sample_every: f64,
    /// Leading fraction of the run left out of the fit.
    pub discard: f64,
    /// Closest approach to a wire end before the run counts as exited, m.
    pub end_margin: f64,
}

impl Default for VelocityConfig {
    fn default() -> Self {
        Self {
            domains: 4,
            j: 1.1e12,
            duration: 1e-9,
            start: 80e-9,
            sample_every: 10e-12,
            discard: 0.2,
            end_margin: 10e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityResult {
    pub j: f64,
    pub v: f64,
    pub v_analytic: f64,
    pub trace: DwTrace,
    pub field_evaluations: u64,
}

impl VelocityResult {
    pub fn rel_err(&self) -> f64 {
        if self.v_analytic == 0.0 {
            self.v.abs()
        } else {
            (self.v - self.v_analytic).abs() / self.v_analytic.abs()
        }
    }
}

/// Drives a single wall along a plain wire with uniform current and fits
/// its speed.
pub fn measure_velocity(ctx: &DwContext, cfg: &VelocityConfig) -> Result<VelocityResult> {
    if !(cfg.duration > 0.0 && cfg.sample_every > 0.0 && (0.0..1.0).contains(&cfg.discard)) {
        return Err(Error::InvalidParameter(
            "velocity run needs duration > 0, sample_every > 0, 0 <= discard < 1".into(),
        ));
    }
    let spec = GeometrySpec::plain_wire(cfg.domains);
    let mesh = ctx.mesh(&spec)?;
    let len = spec.wire_length();
    if !(cfg.start > cfg.end_margin && cfg.start < len - cfg.end_margin) {
        return Err(Error::InvalidParameter(format!("wall start {:e} m outside the wire", cfg.start)));
    }
    let mut state = SimState::new(wall_at(&mesh, 0, cfg.start, ctx.wall_param())?);
    ctx.seeding_integrator(&mesh)?.relax(&mut state)?;

    let mut llg = ctx.integrator(&mesh)?;
    llg.set_current(Some(&CurrentMap::uniform(&mesh, Vec3::new(cfg.j, 0.0, 0.0))));
    let mut trace = DwTrace { wire: 0, samples: vec![(0.0, track_wall(&state.m, &mesh, 0)?)] };
    let mut next = cfg.sample_every;
    let mut failure: Option<Error> = None;
    // Sample on the accepted-step grid nearest above each sampling time;
    // stop at the first sample that loses the wall.
    let t_end = cfg.duration;
    while state.time < t_end && failure.is_none() {
        let target = next.min(t_end);
        llg.run_until(&mut state, target, |_| {})?;
        match track_wall(&state.m, &mesh, 0) {
            Ok(x) if x > cfg.end_margin && x < len - cfg.end_margin => trace.samples.push((state.time, x)),
            _ => failure = Some(Error::WallExited { wire: 0, time: state.time }),
        }
        next += cfg.sample_every;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let v = trace
        .slope_from(cfg.discard * cfg.duration)
        .ok_or_else(|| Error::InvalidParameter("too few samples for a velocity fit".into()))?;
    Ok(VelocityResult {
        j: cfg.j,
        v,
        v_analytic: analytic_dw_velocity(cfg.j, &ctx.params, &ctx.consts),
        trace,
        field_evaluations: llg.field_evaluations(),
    })
}

// ---------------------------------------------------------------------------
// Shift window

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftOutcome {
    Stuck,
    Shifted,
    Overshot,
}

impl ShiftOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            ShiftOutcome::Stuck => "stuck",
            ShiftOutcome::Shifted => "shifted",
            ShiftOutcome::Overshot => "overshot",
        }
    }
}

/// Pulse timing of one shift trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShiftProtocol {
    /// Zero-current time before the pulse, s.
    pub pre_delay: f64,
    /// Pulse length, s. The same for every density of a search.
    pub pulse: f64,
    /// Zero-current time after the pulse, s.
    pub settle: f64,
}

impl Default for ShiftProtocol {
    fn default() -> Self {
        Self {
            pre_delay: 0.5e-9,
            pulse: 1e-9,
            settle: 1e-9,
        }
    }
}

impl ShiftProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.pre_delay >= 0.0 && self.pulse >= 0.0 && self.settle >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter("pulse timings must be >= 0".into()))
        }
    }
}

/// Classifies a wall displacement `d` against the pitch: within a quarter
/// pitch of one pitch is a clean shift.
pub fn classify_shift(d: f64, pitch: f64) -> ShiftOutcome {
    if d < 0.75 * pitch {
        ShiftOutcome::Stuck
    } else if d <= 1.25 * pitch {
        ShiftOutcome::Shifted
    } else {
        ShiftOutcome::Overshot
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftPoint {
    pub j: f64,
    pub outcome: ShiftOutcome,
    /// Final minus initial wall position; NaN when the wall left the wire.
    pub displacement: f64,
    pub walls_found: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftWindow {
    /// Smallest density that shifted cleanly.
    pub j_low: f64,
    /// Largest density that shifted cleanly.
    pub j_high: f64,
    /// Grid spacing around the bounds.
    pub resolution: f64,
    pub points: Vec<ShiftPoint>,
    /// Grid indices `k` where the outcome at `k` ranks below the one at
    /// `k - 1`.
    pub violations: Vec<usize>,
}

impl ShiftWindow {
    /// Midpoint of the window.
    pub fn j_avg(&self) -> f64 {
        0.5 * (self.j_low + self.j_high)
    }

    pub fn is_monotone(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Indices where classification order stuck < shifted < overshot breaks.
pub fn monotonicity_violations(points: &[ShiftPoint]) -> Vec<usize> {
    (1..points.len()).filter(|&k| points[k].outcome < points[k - 1].outcome).collect()
}

/// One shift trial from a relaxed wall at domain boundary `boundary` of
/// X-NW row 0.
pub fn shift_trial(
    ctx: &DwContext,
    mesh: &Mesh,
    seeded: &SimState,
    boundary: usize,
    j: f64,
    protocol: &ShiftProtocol,
    thickness: f64,
) -> Result<ShiftPoint> {
    let wire = mesh.x_wire(0).ok_or_else(|| Error::InvalidParameter("no X-NW".into()))?;
    let pitch = wire.pitch_cells as f64 * mesh.cell.dx;
    let start = boundary as f64 * pitch;
    let mut state = seeded.clone();
    let mut llg = ctx.integrator(mesh)?;
    llg.run_until(&mut state, protocol.pre_delay, |_| {})?;
    if j != 0.0 && protocol.pulse > 0.0 {
        llg.set_current(Some(&CurrentMap::drive_x(mesh, &[0], j.abs(), j > 0.0, thickness)?));
        llg.run_until(&mut state, protocol.pre_delay + protocol.pulse, |_| {})?;
        llg.set_current(None);
    }
    llg.run_until(&mut state, protocol.pre_delay + protocol.pulse + protocol.settle, |_| {})?;
    let walls = track_walls(&state.m, mesh, 0);
    let (outcome, displacement) = match walls.as_slice() {
        [] => (ShiftOutcome::Overshot, f64::NAN),
        // Several crossings: follow the leading one.
        ws => {
            let lead = if j >= 0.0 {
                ws.iter().copied().fold(f64::MIN, f64::max) - start
            } else {
                start - ws.iter().copied().fold(f64::MAX, f64::min)
            };
            (classify_shift(lead, pitch), lead)
        }
    };
    Ok(ShiftPoint {
        j,
        outcome,
        displacement,
        walls_found: walls.len(),
    })
}

/// Classifies every density of `j_grid` (ascending) on the wire described
/// by `spec`, starting from one relaxed wall at `boundary`, and returns
/// the clean-shift window.
pub fn find_shift_window(
    ctx: &DwContext,
    spec: &GeometrySpec,
    boundary: usize,
    j_grid: &[f64],
    protocol: &ShiftProtocol,
) -> Result<ShiftWindow> {
    protocol.validate()?;
    if j_grid.is_empty() || j_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("density grid must be non-empty and ascending".into()));
    }
    let mesh = ctx.mesh(spec)?;
    let seeded = seed_wall(ctx, &mesh, 0, boundary)?;
    let points: Vec<ShiftPoint> = j_grid
        .par_iter()
        .map(|&j| shift_trial(ctx, &mesh, &seeded, boundary, j, protocol, spec.thickness))
        .collect::<Result<_>>()?;
    window_from_points(points)
}

/// Builds the window summary from classified points.
pub fn window_from_points(points: Vec<ShiftPoint>) -> Result<ShiftWindow> {
    let shifted: Vec<usize> = (0..points.len())
        .filter(|&k| points[k].outcome == ShiftOutcome::Shifted)
        .collect();
    let (Some(&lo), Some(&hi)) = (shifted.first(), shifted.last()) else {
        let list: Vec<String> = points
            .iter()
            .map(|p| format!("{:e}:{}", p.j, p.outcome.as_str()))
            .collect();
        return Err(Error::NoWindow(list.join(", ")));
    };
    let gap = |k: usize| {
        let mut g = f64::INFINITY;
        if k > 0 {
            g = g.min(points[k].j - points[k - 1].j);
        }
        if k + 1 < points.len() {
            g = g.min(points[k + 1].j - points[k].j);
        }
        if g.is_finite() {
            g
        } else {
            0.0
        }
    };
    Ok(ShiftWindow {
        j_low: points[lo].j,
        j_high: points[hi].j,
        resolution: gap(lo).max(gap(hi)),
        violations: monotonicity_violations(&points),
        points,
    })
}

/// Plain notched wire used for window searches: four domains, wall
/// starting at the first boundary.
pub fn window_wire() -> GeometrySpec {
    GeometrySpec::notched_wire(4)
}

/// The same wire with one X-Cell in the domain the wall crosses.
pub fn window_wire_with_xcell() -> GeometrySpec {
    GeometrySpec::cross_overlay(4, YWireSpec::at(1))
}

// ---------------------------------------------------------------------------
// Cross stability

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityPoint {
    /// Cross arm length, m.
    pub length: f64,
    /// Cross arm width, m.
    pub width: f64,
    pub stable: bool,
    pub min_abs_mz: f64,
    /// Some cell ended with m_z < 0.
    pub reversed: bool,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityMap {
    pub lengths: Vec<f64>,
    pub widths: Vec<f64>,
    pub probe: StabilityProbe,
    /// Row-major: `points[iw * lengths.len() + il]`.
    pub points: Vec<StabilityPoint>,
}

impl StabilityMap {
    pub fn at(&self, il: usize, iw: usize) -> &StabilityPoint {
        &self.points[iw * self.lengths.len() + il]
    }

    /// Point with the given dimensions, matched to within a tenth of a
    /// nanometre.
    pub fn find(&self, length: f64, width: f64) -> Option<&StabilityPoint> {
        self.points
            .iter()
            .find(|p| (p.length - length).abs() < 1e-10 && (p.width - width).abs() < 1e-10)
    }
}

/// How a cross is probed for stability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilityProbe {
    /// Stable when every cell keeps |m_z| above this.
    pub threshold: f64,
    /// Amplitude of the random in-plane kick added to +z, per cell. An
    /// exactly uniform state feels no torque in a one-cell-thick film.
    pub tilt: f64,
    pub seed: u64,
}

impl Default for StabilityProbe {
    fn default() -> Self {
        Self {
            threshold: 0.9,
            tilt: 0.1,
            seed: 0,
        }
    }
}

/// Relaxes a lone `length` × `width` cross from a kicked +z state and
/// classifies it. A relaxation that runs out of steps is reported
/// unstable.
pub fn cross_stability(ctx: &DwContext, length: f64, width: f64, probe: &StabilityProbe) -> Result<StabilityPoint> {
    let mesh = ctx.mesh(&GeometrySpec::isolated_cross(length, width))?;
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed);
    let m = MagnetizationField::from_fn(&mesh, |_| {
        let (a, b): (f64, f64) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        Vec3::new(probe.tilt * a, probe.tilt * b, 1.0).normalized()
    });
    let mut state = SimState::new(m);
    let converged = match ctx.integrator(&mesh)?.relax(&mut state) {
        Ok(_) => true,
        Err(Error::NotConverged { .. }) => false,
        Err(e) => return Err(e),
    };
    let mut min_abs = f64::INFINITY;
    let mut reversed = false;
    for c in mesh.occupied_cells() {
        let mz = state.m.get(c).z;
        min_abs = min_abs.min(mz.abs());
        reversed |= mz < 0.0;
    }
    Ok(StabilityPoint {
        length,
        width,
        stable: converged && !reversed && min_abs > probe.threshold,
        min_abs_mz: min_abs,
        reversed,
        converged,
    })
}

/// Sweeps cross dimensions. Points run concurrently and are merged in
/// grid order, so the map does not depend on scheduling.
pub fn stability_map(ctx: &DwContext, lengths: &[f64], widths: &[f64], probe: &StabilityProbe) -> Result<StabilityMap> {
    if lengths.is_empty() || widths.is_empty() {
        return Err(Error::InvalidParameter("stability sweep needs lengths and widths".into()));
    }
    let jobs: Vec<(f64, f64)> = widths
        .iter()
        .flat_map(|&w| lengths.iter().map(move |&l| (l, w)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(l, w)| cross_stability(ctx, l, w, probe))
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityMap {
        lengths: lengths.to_vec(),
        widths: widths.to_vec(),
        probe: *probe,
        points,
    })
}

/// `start, start + step, …` up to `end` inclusive (to within a thousandth
/// of a step).
pub fn range_inclusive(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-3).floor().max(-1.0) as i64;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

// ---------------------------------------------------------------------------
// X-then-Y demo

/// Per-domain signs after one phase of the demo.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitSnapshot {
    pub phase: String,
    /// X-NW domains, row 0 (top) first.
    pub rows: Vec<Vec<bool>>,
    /// Domains of each Y-NW from the top; X-Cells repeat their row value.
    pub ynws: Vec<Vec<bool>>,
}

/// Per-domain `sign(<m_z>)`.
pub fn snapshot(m: &MagnetizationField, mesh: &Mesh, phase: &str) -> BitSnapshot {
    let bit = |r: usize| m.average(&mesh.regions[r].cells).z >= 0.0;
    let mut rows = Vec::new();
    let mut ynws = Vec::new();
    for w in &mesh.wires {
        let bits: Vec<bool> = w.domains.iter().map(|&r| bit(r)).collect();
        match w.axis {
            Axis::X => rows.push(bits),
            Axis::Y => ynws.push(bits),
        }
    }
    BitSnapshot {
        phase: phase.to_string(),
        rows,
        ynws,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XCellSample {
    pub time: f64,
    /// Average magnetization of the top X-Cell.
    pub top: Vec3,
    /// Average magnetization of the bottom X-Cell.
    pub bottom: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemoConfig {
    /// Domain signs of the two X-NWs, left to right.
    pub initial: Vec<Vec<bool>>,
    /// X-NW domains per row.
    pub domains: usize,
    /// Column of the Y-NW.
    pub column: usize,
    /// Shift density for both phases, A/m². The default sits inside the
    /// window of a wall leaving an X-Cell; 1.7e12 already collapses the
    /// single-domain bit there.
    pub j: f64,
    pub protocol: ShiftProtocol,
    pub sample_every: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            initial: vec![vec![true, false, true, true], vec![false, true, false, false]],
            domains: 4,
            column: 2,
            j: 1.3e12,
            protocol: ShiftProtocol {
                pre_delay: 0.0,
                ..ShiftProtocol::default()
            },
            sample_every: 10e-12,
        }
    }
}

impl DemoConfig {
    pub fn geometry(&self) -> GeometrySpec {
        GeometrySpec::bundle(self.initial.len(), self.domains, vec![YWireSpec::at(self.column)])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoResult {
    /// Initial, after the X shift, after the Y shift.
    pub snapshots: Vec<BitSnapshot>,
    pub trace: Vec<XCellSample>,
    /// Largest in-plane component of the X-Cell averages at the end of
    /// each settle phase.
    pub residual_in_plane: Vec<f64>,
}

impl DemoResult {
    /// Sign sequence of the top X-Cell through the phases.
    pub fn top_xcell_bits(&self, column: usize) -> Vec<bool> {
        self.snapshots.iter().map(|s| s.rows[0][column]).collect()
    }
}

/// What the bit-level model predicts for the demo: one X shift of every
/// row to the right, then one Y shift up, with growing end domains.
pub fn predict_demo(cfg: &DemoConfig) -> Result<Vec<BitSnapshot>> {
    use crate::array::{self, ArrayState, Direction, Edge, Fill, Rows};
    let grid = cfg.initial.iter().map(|r| r.iter().map(|&b| Some(b)).collect()).collect();
    let mut s = ArrayState::from_grid(grid, 0)?;
    s.fill = Fill::Replicate;
    s.edge = Edge::Lossy;
    let y = s.add_ynw(cfg.column, 0..cfg.initial.len(), 0, 0)?;
    let snap = |s: &ArrayState, phase: &str| BitSnapshot {
        phase: phase.to_string(),
        rows: s.grid().iter().map(|r| r.iter().map(|v| v.unwrap_or(false)).collect()).collect(),
        ynws: vec![s.ynw_values(y).iter().map(|v| v.unwrap_or(false)).collect()],
    };
    let mut out = vec![snap(&s, "initial")];
    s = array::shift_x(&s, Direction::Right, &Rows::All)?;
    out.push(snap(&s, "after_x"));
    s = array::shift_y(&s, y, Direction::Up)?;
    out.push(snap(&s, "after_y"));
    Ok(out)
}

/// Two-wire bundle with one Y-NW: all X-NWs shift one domain to the
/// right, then the Y-NW shifts one domain up.
pub fn xdwm_shift_demo(ctx: &DwContext, cfg: &DemoConfig) -> Result<DemoResult> {
    cfg.protocol.validate()?;
    let spec = cfg.geometry();
    let mesh = ctx.mesh(&spec)?;
    let mut pattern = uniform_pattern(&mesh, true);
    for (r, bits) in cfg.initial.iter().enumerate() {
        let w = mesh
            .wires
            .iter()
            .position(|w| w.axis == Axis::X && w.index == r)
            .ok_or_else(|| Error::InvalidParameter(format!("no X-NW row {r}")))?;
        set_wire_bits(&mut pattern, &mesh, w, bits)?;
    }
    let mut state = seed_pattern(ctx, &mesh, &pattern)?;
    let xcells: Vec<&[usize]> = mesh
        .regions
        .iter()
        .filter(|r| matches!(r.kind, RegionKind::XCell { .. }))
        .map(|r| r.cells.as_slice())
        .collect();
    let (top, bottom) = (xcells[0], xcells[xcells.len() - 1]);

    let mut snapshots = vec![snapshot(&state.m, &mesh, "initial")];
    let mut trace = Vec::new();
    let mut residual = Vec::new();
    let mut llg = ctx.integrator(&mesh)?;
    let rows: Vec<usize> = (0..cfg.initial.len()).collect();
    let phases = [
        ("after_x", CurrentMap::drive_x(&mesh, &rows, cfg.j, true, spec.thickness)?),
        ("after_y", CurrentMap::drive_y(&mesh, 0, cfg.j, true, spec.thickness)?),
    ];
    let p = cfg.protocol;
    for (name, current) in &phases {
        let t0 = state.time;
        let mut next = t0;
        let mut sample = |st: &SimState| {
            if st.time >= next {
                trace.push(XCellSample {
                    time: st.time,
                    top: st.m.average(top),
                    bottom: st.m.average(bottom),
                });
                next += cfg.sample_every;
            }
        };
        llg.set_current(None);
        llg.run_until(&mut state, t0 + p.pre_delay, &mut sample)?;
        if p.pulse > 0.0 && cfg.j != 0.0 {
            llg.set_current(Some(current));
            llg.run_until(&mut state, t0 + p.pre_delay + p.pulse, &mut sample)?;
            llg.set_current(None);
        }
        llg.run_until(&mut state, t0 + p.pre_delay + p.pulse + p.settle, &mut sample)?;
        let r = [state.m.average(top), state.m.average(bottom)]
            .iter()
            .map(|a| a.x.abs().max(a.y.abs()))
            .fold(0.0, f64::max);
        residual.push(r);
        snapshots.push(snapshot(&state.m, &mesh, name));
    }
    Ok(DemoResult {
        snapshots,
        trace,
        residual_in_plane: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_velocity_value() {
        let v = analytic_dw_velocity(1.1e12, &MaterialParams::default(), &PhysicalConstants::SI);
        assert!((v - 152.9).abs() < 0.2, "{v}");
    }

    #[test]
    fn crossings_interpolate() {
        let prof = [1.0, 1.0, 0.5, -0.5, -1.0];
        let x = zero_crossings(&prof, 2e-9);
        assert_eq!(x.len(), 1);
        assert!((x[0] - 6e-9).abs() < 1e-18);
    }

    #[test]
    fn classification_bands() {
        let p = 80e-9;
        assert_eq!(classify_shift(10e-9, p), ShiftOutcome::Stuck);
        assert_eq!(classify_shift(61e-9, p), ShiftOutcome::Shifted);
        assert_eq!(classify_shift(100e-9, p), ShiftOutcome::Shifted);
        assert_eq!(classify_shift(101e-9, p), ShiftOutcome::Overshot);
    }

    #[test]
    fn inclusive_ranges() {
        assert_eq!(range_inclusive(40e-9, 110e-9, 10e-9).len(), 8);
        assert_eq!(range_inclusive(50e-9, 300e-9, 50e-9).len(), 6);
    }
}
