//! Landau-Lifshitz-Gilbert dynamics with Zhang-Li spin-transfer torque.
//!
//! The implicit Gilbert form
//!
//! ```text
//! dm/dt = −γ0 m×H + α m×dm/dt − (u·∇)m + β m×(u·∇)m
//! ```
//!
//! is integrated in its explicit form `(T + α m×T)/(1+α²)`, where `T` is
//! everything except the Gilbert term. `γ0 = γ·μ0` since fields are in A/m.

mod current;
mod frames;

pub use current::{CurrentMap, Terminal, TerminalRole};
pub use frames::{read_frames, write_frame, write_header, write_snapshot_csv, Frame, CSV_HEADER, FRAME_MAGIC, FRAME_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{neighbor_table, DemagMode, FieldEvaluator, MagnetizationField, NONE};
use crate::geometry::Mesh;
use crate::material::{MaterialParams, PhysicalConstants};
use crate::vec3::Vec3;

/// Which prefactor turns current density into the drift velocity `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SttConvention {
    /// `u = μB·J·P / (2e·Ms)`
    Half,
    /// `u = μB·J·P / (e·Ms)`
    #[default]
    Full,
}

/// Spin drift velocity for current density `j` (A/m²), parallel to `j`.
pub fn stt_velocity_u(j: Vec3, p: &MaterialParams, c: &PhysicalConstants, conv: SttConvention) -> Vec3 {
    let full = c.mu_b * p.polarization / (c.e * p.ms);
    let pre = match conv {
        SttConvention::Full => full,
        SttConvention::Half => 0.5 * full,
    };
    j * pre
}

/// Drift velocity map for a whole current map.
pub fn velocity_map(
    current: &CurrentMap,
    p: &MaterialParams,
    c: &PhysicalConstants,
    conv: SttConvention,
) -> Vec<Vec3> {
    current
        .as_slice()
        .iter()
        .map(|&j| stt_velocity_u(j, p, c, conv))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// First trial step, s.
    pub dt_init: f64,
    /// Largest allowed local error per step, max-norm on m.
    pub tolerance: f64,
    /// Step size cap, s.
    pub max_dt: f64,
    /// Renormalize m every this many accepted steps.
    pub renormalize_every: usize,
    pub stt_convention: SttConvention,
    /// Relaxation stops once max |m×h_eff|/Ms drops below this.
    pub relax_torque: f64,
    pub relax_max_steps: usize,
    /// Keep the precession term while relaxing. Off by default; the
    /// precession-free flow reaches the same minima faster.
    pub relax_precession: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt_init: 1e-14,
            tolerance: 1e-5,
            max_dt: 1e-12,
            renormalize_every: 1,
            stt_convention: SttConvention::Full,
            relax_torque: 1e-4,
            relax_max_steps: 200_000,
            relax_precession: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt_init > 0.0
            && self.tolerance > 0.0
            && self.max_dt >= self.dt_init
            && self.renormalize_every >= 1
            && self.relax_torque > 0.0
            && [self.dt_init, self.tolerance, self.max_dt, self.relax_torque]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "solver config needs dt_init > 0, max_dt >= dt_init, tolerance > 0".into(),
            ))
        }
    }
}

/// Time-stepping state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub time: f64,
    pub m: MagnetizationField,
    pub steps: usize,
}

impl SimState {
    pub fn new(m: MagnetizationField) -> Self {
        Self { time: 0.0, m, steps: 0 }
    }
}

/// Smallest step before the integrator gives up.
pub const MIN_DT: f64 = 1e-18;

/// What the right-hand side includes.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Dynamics {
    Llg,
    /// `−(γ0/2) m×(m×H)`: the α = 1 damping flow without precession.
    Descent,
}

struct Rhs<'a> {
    occupied: &'a [bool],
    nbrs: &'a [[u32; 6]],
    inv_d: [f64; 3],
    gamma0: f64,
    alpha: f64,
    beta: f64,
}

impl Rhs<'_> {
    /// Spatial derivative `(u·∇)m` at cell `c`.
    #[inline]
    fn advect(&self, m: &[Vec3], c: usize, u: Vec3) -> Vec3 {
        let mut d = Vec3::ZERO;
        for axis in 0..3 {
            let ua = u.component(axis);
            if ua == 0.0 {
                continue;
            }
            let (b, f) = (self.nbrs[c][2 * axis], self.nbrs[c][2 * axis + 1]);
            let grad = match (b != NONE, f != NONE) {
                (true, true) => (m[f as usize] - m[b as usize]) * (0.5 * self.inv_d[axis]),
                (false, true) => (m[f as usize] - m[c]) * self.inv_d[axis],
                (true, false) => (m[c] - m[b as usize]) * self.inv_d[axis],
                (false, false) => Vec3::ZERO,
            };
            d += grad * ua;
        }
        d
    }

    /// Writes dm/dt; returns max |m×h| over occupied cells.
    fn eval(&self, dyn_: Dynamics, m: &[Vec3], h: &[Vec3], u: Option<&[Vec3]>, out: &mut [Vec3]) -> f64 {
        let mut torque = 0.0f64;
        let k = 1.0 / (1.0 + self.alpha * self.alpha);
        for c in 0..m.len() {
            if !self.occupied[c] {
                out[c] = Vec3::ZERO;
                continue;
            }
            let mc = m[c];
            let mxh = mc.cross(h[c]);
            torque = torque.max(mxh.norm());
            match dyn_ {
                Dynamics::Descent => {
                    out[c] = mc.cross(mxh) * (-0.5 * self.gamma0);
                }
                Dynamics::Llg => {
                    let mut t = mxh * (-self.gamma0);
                    if let Some(u) = u {
                        let uc = u[c];
                        if uc != Vec3::ZERO {
                            let mut d = self.advect(m, c, uc);
                            // Keep only the part normal to m.
                            d -= mc * mc.dot(d);
                            t -= d;
                            t += mc.cross(d) * self.beta;
                        }
                    }
                    out[c] = (t + mc.cross(t) * self.alpha) * k;
                }
            }
        }
        torque
    }
}

/// dm/dt for one field configuration. `u` is the drift velocity per cell.
pub fn llg_rhs(
    m: &MagnetizationField,
    h_eff: &[Vec3],
    u: Option<&[Vec3]>,
    mesh: &Mesh,
    p: &MaterialParams,
    c: &PhysicalConstants,
) -> Vec<Vec3> {
    let nbrs = neighbor_table(mesh);
    let rhs = Rhs {
        occupied: mesh.occupancy(),
        nbrs: &nbrs,
        inv_d: [1.0 / mesh.cell.dx, 1.0 / mesh.cell.dy, 1.0 / mesh.cell.dz],
        gamma0: c.gamma0(),
        alpha: p.alpha,
        beta: p.beta,
    };
    let mut out = vec![Vec3::ZERO; mesh.len()];
    rhs.eval(Dynamics::Llg, m.as_slice(), h_eff, u, &mut out);
    out
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth minus fourth order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Result of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub dt: f64,
    pub error: f64,
    pub rejected: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxReport {
    pub steps: usize,
    /// Final max |m×h_eff|/Ms.
    pub torque: f64,
    pub time: f64,
}

/// Adaptive integrator bound to one mesh and material.
pub struct Llg {
    eval: FieldEvaluator,
    cfg: SolverConfig,
    occupied: Vec<bool>,
    nbrs: Vec<[u32; 6]>,
    inv_d: [f64; 3],
    u: Option<Vec<Vec3>>,
    dt: f64,
    /// Derivative at the current state, reused as the first stage.
    fsal: Option<(Dynamics, f64)>,
    k: Vec<Vec<Vec3>>,
    h: Vec<Vec3>,
    y: Vec<Vec3>,
    accepted: usize,
}

impl std::fmt::Debug for Llg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Llg").field("cfg", &self.cfg).field("dt", &self.dt).finish()
    }
}

impl Llg {
    pub fn new(
        mesh: &Mesh,
        params: MaterialParams,
        consts: PhysicalConstants,
        demag: DemagMode,
        cfg: SolverConfig,
    ) -> Result<Self> {
        params.validate()?;
        consts.validate()?;
        cfg.validate()?;
        let n = mesh.len();
        Ok(Self {
            eval: FieldEvaluator::new(mesh, params, consts, demag),
            cfg,
            occupied: mesh.occupancy().to_vec(),
            nbrs: neighbor_table(mesh),
            inv_d: [1.0 / mesh.cell.dx, 1.0 / mesh.cell.dy, 1.0 / mesh.cell.dz],
            u: None,
            dt: cfg.dt_init,
            fsal: None,
            k: vec![vec![Vec3::ZERO; n]; 7],
            h: vec![Vec3::ZERO; n],
            y: vec![Vec3::ZERO; n],
            accepted: 0,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn params(&self) -> &MaterialParams {
        self.eval.params()
    }

    pub fn consts(&self) -> &PhysicalConstants {
        self.eval.consts()
    }

    pub fn field_evaluations(&self) -> u64 {
        self.eval.evaluations()
    }

    /// Current step size guess.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Switch the drive. `None` or an all-zero map turns STT off.
    pub fn set_current(&mut self, current: Option<&CurrentMap>) {
        self.u = current.filter(|c| !c.is_zero()).map(|c| {
            velocity_map(c, self.eval.params(), self.eval.consts(), self.cfg.stt_convention)
        });
        self.fsal = None;
    }

    /// Set drift velocities directly.
    pub fn set_velocity(&mut self, u: Option<Vec<Vec3>>) {
        self.u = u;
        self.fsal = None;
    }

    pub fn energies(&mut self, state: &SimState) -> crate::field::Energies {
        self.eval.energies(state.m.as_slice())
    }

    /// Derivative at `self.y` into `k[stage]`; returns max |m×h|.
    fn rhs_into(&mut self, dyn_: Dynamics, stage: usize) -> f64 {
        self.eval.h_eff(&self.y, &mut self.h);
        let rhs = Rhs {
            occupied: &self.occupied,
            nbrs: &self.nbrs,
            inv_d: self.inv_d,
            gamma0: self.eval.consts().gamma0(),
            alpha: self.eval.params().alpha,
            beta: self.eval.params().beta,
        };
        let u = self.u.as_deref();
        let mut out = std::mem::take(&mut self.k[stage]);
        let t = rhs.eval(dyn_, &self.y, &self.h, u, &mut out);
        self.k[stage] = out;
        t
    }

    /// Max |m×h_eff|/Ms of a state.
    pub fn torque(&mut self, state: &SimState) -> f64 {
        self.y.copy_from_slice(state.m.as_slice());
        let t = self.rhs_into(Dynamics::Descent, 0);
        self.fsal = None;
        t / self.eval.params().ms
    }

    fn try_step(&mut self, dyn_: Dynamics, state: &mut SimState, dt_cap: f64) -> Result<StepInfo> {
        let n = self.y.len();
        if !matches!(self.fsal, Some((d, _)) if d == dyn_) {
            self.y.copy_from_slice(state.m.as_slice());
            let t = self.rhs_into(dyn_, 0);
            self.fsal = Some((dyn_, t));
        }
        let mut rejected = 0;
        loop {
            let dt = self.dt.min(dt_cap).min(self.cfg.max_dt);
            if dt < MIN_DT {
                return Err(Error::StepSizeUnderflow { dt, time: state.time });
            }
            let m0 = state.m.as_slice();
            let mut t_last = 0.0;
            for s in 1..7 {
                for c in 0..n {
                    if !self.occupied[c] {
                        continue;
                    }
                    let mut acc = m0[c];
                    for (r, a) in A[s].iter().enumerate().take(s) {
                        if *a != 0.0 {
                            acc += self.k[r][c] * (a * dt);
                        }
                    }
                    self.y[c] = acc;
                }
                t_last = self.rhs_into(dyn_, s);
            }
            // y now holds the fifth-order solution; k[6] its derivative.
            let mut err = 0.0f64;
            for c in 0..n {
                if !self.occupied[c] {
                    continue;
                }
                let mut e = Vec3::ZERO;
                for (s, w) in E.iter().enumerate() {
                    if *w != 0.0 {
                        e += self.k[s][c] * *w;
                    }
                }
                err = err.max((e * dt).max_abs());
            }
            if err <= self.cfg.tolerance {
                let m = state.m.as_mut_slice();
                m.copy_from_slice(&self.y);
                self.accepted += 1;
                if self.accepted % self.cfg.renormalize_every == 0 {
                    for c in 0..n {
                        if self.occupied[c] {
                            m[c] = m[c].normalized();
                        }
                    }
                }
                state.time += dt;
                state.steps += 1;
                self.k.swap(0, 6);
                self.fsal = Some((dyn_, t_last));
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * (self.cfg.tolerance / err).powf(0.2)).clamp(0.2, 5.0)
                };
                // A capped step says nothing about the natural step size.
                if dt >= self.dt * 0.999 {
                    self.dt = (dt * grow).min(self.cfg.max_dt);
                }
                return Ok(StepInfo { dt, error: err, rejected });
            }
            rejected += 1;
            // k[0] still belongs to the unchanged state.
            self.dt = dt * 0.5;
        }
    }

    /// One adaptive step of the full dynamics.
    pub fn step(&mut self, state: &mut SimState) -> Result<StepInfo> {
        self.try_step(Dynamics::Llg, state, f64::INFINITY)
    }

    /// Advance to exactly `t_end`, calling `observe` after every accepted
    /// step.
    pub fn run_until(
        &mut self,
        state: &mut SimState,
        t_end: f64,
        mut observe: impl FnMut(&SimState),
    ) -> Result<()> {
        while state.time < t_end {
            let remaining = t_end - state.time;
            if remaining < MIN_DT {
                state.time = t_end;
                break;
            }
            self.try_step(Dynamics::Llg, state, remaining)?;
            observe(state);
        }
        Ok(())
    }

    /// Relax with the current switched off until the torque criterion holds.
    pub fn relax(&mut self, state: &mut SimState) -> Result<RelaxReport> {
        self.relax_with(state, |_, _| {})
    }

    /// [`Llg::relax`] reporting `(steps, torque)` before every step.
    pub fn relax_with(&mut self, state: &mut SimState, mut observe: impl FnMut(usize, f64)) -> Result<RelaxReport> {
        let saved = self.u.take();
        self.fsal = None;
        let dyn_ = if self.cfg.relax_precession { Dynamics::Llg } else { Dynamics::Descent };
        let ms = self.eval.params().ms;
        let t0 = state.time;
        let mut steps = 0;
        let result = loop {
            if !matches!(self.fsal, Some((d, _)) if d == dyn_) {
                self.y.copy_from_slice(state.m.as_slice());
                let t = self.rhs_into(dyn_, 0);
                self.fsal = Some((dyn_, t));
            }
            let torque = self.fsal.map_or(f64::INFINITY, |f| f.1) / ms;
            observe(steps, torque);
            if torque < self.cfg.relax_torque {
                break Ok(RelaxReport { steps, torque, time: state.time - t0 });
            }
            if steps >= self.cfg.relax_max_steps {
                break Err(Error::NotConverged { torque, steps });
            }
            if let Err(e) = self.try_step(dyn_, state, f64::INFINITY) {
                break Err(e);
            }
            steps += 1;
        };
        // Relaxation time is not physical time.
        state.time = t0;
        self.u = saved;
        self.fsal = None;
        result
    }
}

/// One-shot relaxation with a fresh integrator.
pub fn relax(
    state: &mut SimState,
    cfg: &SolverConfig,
    params: &MaterialParams,
    mesh: &Mesh,
    demag: DemagMode,
) -> Result<RelaxReport> {
    Llg::new(mesh, *params, PhysicalConstants::SI, demag, *cfg)?.relax(state)
}
