//! Effective field `H_eff = H_ex + H_d + H_anis` and the matching energies.
//!
//! Every field is the negative energy gradient, `h = −(1/μ0 Ms V) ∂E/∂m`,
//! so the energy functions below are the reference for each term.

mod demag;

pub use demag::{dipole_tensor, newell_tensor, DemagKernel, Tensor};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::material::{MaterialParams, PhysicalConstants};
use crate::vec3::Vec3;

/// Unit magnetization per cell. Stored over the full grid; unoccupied cells
/// hold the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationField {
    m: Vec<Vec3>,
}

impl MagnetizationField {
    /// Same direction in every occupied cell.
    pub fn uniform(mesh: &Mesh, dir: Vec3) -> Self {
        Self::from_fn(mesh, |_| dir)
    }

    /// Direction per occupied cell from `f(cell)`, normalized.
    pub fn from_fn(mesh: &Mesh, mut f: impl FnMut(usize) -> Vec3) -> Self {
        let m = (0..mesh.len())
            .map(|c| {
                if mesh.is_occupied(c) {
                    f(c).normalized()
                } else {
                    Vec3::ZERO
                }
            })
            .collect();
        Self { m }
    }

    /// Wraps raw data; occupied cells must carry unit vectors.
    pub fn from_vec(mesh: &Mesh, m: Vec<Vec3>) -> Result<Self> {
        if m.len() != mesh.len() {
            return Err(Error::InvalidParameter("magnetization size mismatch".into()));
        }
        let mut out = Self { m };
        for c in 0..mesh.len() {
            if !mesh.is_occupied(c) {
                out.m[c] = Vec3::ZERO;
            } else if (out.m[c].norm() - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidParameter(format!("cell {c} is not a unit vector")));
            }
        }
        Ok(out)
    }

    #[inline]
    pub fn as_slice(&self) -> &[Vec3] {
        &self.m
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Vec3] {
        &mut self.m
    }

    pub fn into_vec(self) -> Vec<Vec3> {
        self.m
    }

    #[inline]
    pub fn get(&self, c: usize) -> Vec3 {
        self.m[c]
    }

    /// Sets and normalizes one occupied cell.
    pub fn set(&mut self, c: usize, v: Vec3) {
        if self.m[c] != Vec3::ZERO || v != Vec3::ZERO {
            self.m[c] = v.normalized();
        }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Rescales every occupied cell to unit length.
    pub fn normalize(&mut self, mesh: &Mesh) {
        for c in mesh.occupied_cells() {
            self.m[c] = self.m[c].normalized();
        }
    }

    /// Largest `|‖m‖ − 1|` over occupied cells.
    pub fn max_norm_error(&self, mesh: &Mesh) -> f64 {
        mesh.occupied_cells()
            .map(|c| (self.m[c].norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Mean over a set of cells.
    pub fn average(&self, cells: &[usize]) -> Vec3 {
        if cells.is_empty() {
            return Vec3::ZERO;
        }
        let mut s = Vec3::ZERO;
        for &c in cells {
            s += self.m[c];
        }
        s * (1.0 / cells.len() as f64)
    }

    /// Largest per-cell difference to another field on the same grid.
    pub fn max_diff(&self, other: &MagnetizationField) -> f64 {
        self.m
            .iter()
            .zip(&other.m)
            .map(|(a, b)| (*a - *b).max_abs())
            .fold(0.0, f64::max)
    }
}

/// How the magnetostatic term is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemagMode {
    /// Newell-tensor convolution through FFTs.
    #[default]
    Fft,
    /// Same tensor, pairwise sum. O(N²); oracle use only.
    Direct,
    /// Thin-film shortcut `h_d = −Ms·m_z·ẑ`.
    Local,
    /// No magnetostatics.
    Off,
}

/// Field terms per cell, A/m.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTerms {
    pub h_ex: Vec<Vec3>,
    pub h_d: Vec<Vec3>,
    pub h_anis: Vec<Vec3>,
    pub h_eff: Vec<Vec3>,
}

/// Energy contributions, J.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Energies {
    pub exchange: f64,
    pub demag: f64,
    pub anisotropy: f64,
}

impl Energies {
    pub fn total(&self) -> f64 {
        self.exchange + self.demag + self.anisotropy
    }
}

pub(crate) const NONE: u32 = u32::MAX;

/// Occupied-neighbor table: [−x, +x, −y, +y, −z, +z].
pub(crate) fn neighbor_table(mesh: &Mesh) -> Vec<[u32; 6]> {
    (0..mesh.len())
        .map(|c| {
            let mut nb = [NONE; 6];
            if mesh.is_occupied(c) {
                for axis in 0..3 {
                    for (s, fwd) in [false, true].into_iter().enumerate() {
                        if let Some(n) = mesh.neighbor(c, axis, fwd) {
                            nb[2 * axis + s] = n as u32;
                        }
                    }
                }
            }
            nb
        })
        .collect()
}

fn inv_sq(mesh: &Mesh) -> [f64; 3] {
    let c = mesh.cell;
    [1.0 / (c.dx * c.dx), 1.0 / (c.dy * c.dy), 1.0 / (c.dz * c.dz)]
}

fn exchange_into(
    m: &[Vec3],
    nbrs: &[[u32; 6]],
    occupied: &[bool],
    inv: [f64; 3],
    pre: f64,
    out: &mut [Vec3],
) {
    for c in 0..m.len() {
        if !occupied[c] {
            out[c] = Vec3::ZERO;
            continue;
        }
        let mc = m[c];
        let mut lap = Vec3::ZERO;
        for (slot, &n) in nbrs[c].iter().enumerate() {
            if n != NONE {
                lap += (m[n as usize] - mc) * inv[slot / 2];
            }
        }
        out[c] = lap * pre;
    }
}

/// Exchange field `(2A/μ0 Ms)∇²m` with free boundaries at mask edges.
pub fn exchange_field(m: &MagnetizationField, p: &MaterialParams, mesh: &Mesh) -> Vec<Vec3> {
    let c = PhysicalConstants::SI;
    let mut out = vec![Vec3::ZERO; mesh.len()];
    exchange_into(
        m.as_slice(),
        &neighbor_table(mesh),
        mesh.occupancy(),
        inv_sq(mesh),
        2.0 * p.a_ex / (c.mu0 * p.ms),
        &mut out,
    );
    out
}

/// Uniaxial field `(2Ku/μ0 Ms)(m·ẑ)ẑ`.
pub fn anisotropy_field(m: &MagnetizationField, p: &MaterialParams, mesh: &Mesh) -> Vec<Vec3> {
    let pre = 2.0 * p.ku / (PhysicalConstants::SI.mu0 * p.ms);
    (0..mesh.len())
        .map(|c| {
            if mesh.is_occupied(c) {
                Vec3::new(0.0, 0.0, pre * m.get(c).z)
            } else {
                Vec3::ZERO
            }
        })
        .collect()
}

/// Magnetostatic field by FFT convolution with the Newell tensor.
///
/// Builds the kernel on every call; use [`FieldEvaluator`] for repeated
/// evaluation on one mesh.
pub fn demag_field(m: &MagnetizationField, p: &MaterialParams, mesh: &Mesh) -> Vec<Vec3> {
    let mut out = vec![Vec3::ZERO; mesh.len()];
    DemagKernel::new(mesh).field(m.as_slice(), p.ms, &mut out);
    out
}

/// Pairwise-sum version of [`demag_field`].
pub fn demag_field_direct(m: &MagnetizationField, p: &MaterialParams, mesh: &Mesh) -> Vec<Vec3> {
    let mut out = vec![Vec3::ZERO; mesh.len()];
    DemagKernel::new(mesh).direct(m.as_slice(), p.ms, &mut out);
    out
}

/// All three terms and their sum.
pub fn effective(m: &MagnetizationField, p: &MaterialParams, mesh: &Mesh, mode: DemagMode) -> FieldTerms {
    FieldEvaluator::new(mesh, *p, PhysicalConstants::SI, mode).terms(m.as_slice())
}

/// Reusable evaluator holding the neighbor table, the demag kernel and
/// scratch buffers for one mesh.
#[derive(Debug)]
pub struct FieldEvaluator {
    params: MaterialParams,
    consts: PhysicalConstants,
    mode: DemagMode,
    occupied: Vec<bool>,
    nbrs: Vec<[u32; 6]>,
    inv: [f64; 3],
    volume: f64,
    kernel: Option<DemagKernel>,
    scratch: Vec<Vec3>,
    evals: u64,
}

impl FieldEvaluator {
    pub fn new(mesh: &Mesh, params: MaterialParams, consts: PhysicalConstants, mode: DemagMode) -> Self {
        let kernel = matches!(mode, DemagMode::Fft | DemagMode::Direct).then(|| DemagKernel::new(mesh));
        Self {
            params,
            consts,
            mode,
            occupied: mesh.occupancy().to_vec(),
            nbrs: neighbor_table(mesh),
            inv: inv_sq(mesh),
            volume: mesh.cell.volume(),
            kernel,
            scratch: vec![Vec3::ZERO; mesh.len()],
            evals: 0,
        }
    }

    pub fn params(&self) -> &MaterialParams {
        &self.params
    }

    pub fn consts(&self) -> &PhysicalConstants {
        &self.consts
    }

    pub fn mode(&self) -> DemagMode {
        self.mode
    }

    /// Number of `h_eff` evaluations so far.
    pub fn evaluations(&self) -> u64 {
        self.evals
    }

    fn ex_pre(&self) -> f64 {
        2.0 * self.params.a_ex / (self.consts.mu0 * self.params.ms)
    }

    fn anis_pre(&self) -> f64 {
        2.0 * self.params.ku / (self.consts.mu0 * self.params.ms)
    }

    fn demag_into(&mut self, m: &[Vec3], out: &mut [Vec3]) {
        let ms = self.params.ms;
        match self.mode {
            DemagMode::Fft => self.kernel.as_mut().expect("kernel").field(m, ms, out),
            DemagMode::Direct => self.kernel.as_ref().expect("kernel").direct(m, ms, out),
            DemagMode::Local => {
                for (c, o) in out.iter_mut().enumerate() {
                    *o = if self.occupied[c] { Vec3::new(0.0, 0.0, -ms * m[c].z) } else { Vec3::ZERO };
                }
            }
            DemagMode::Off => out.fill(Vec3::ZERO),
        }
    }

    /// `h_eff` only, written into `out`.
    pub fn h_eff(&mut self, m: &[Vec3], out: &mut [Vec3]) {
        self.evals += 1;
        let mut hd = std::mem::take(&mut self.scratch);
        self.demag_into(m, &mut hd);
        exchange_into(m, &self.nbrs, &self.occupied, self.inv, self.ex_pre(), out);
        let ka = self.anis_pre();
        for c in 0..m.len() {
            if self.occupied[c] {
                out[c] += hd[c];
                out[c].z += ka * m[c].z;
            }
        }
        self.scratch = hd;
    }

    /// Separate terms, for diagnostics and tests.
    pub fn terms(&mut self, m: &[Vec3]) -> FieldTerms {
        let n = m.len();
        let mut h_ex = vec![Vec3::ZERO; n];
        let mut h_d = vec![Vec3::ZERO; n];
        exchange_into(m, &self.nbrs, &self.occupied, self.inv, self.ex_pre(), &mut h_ex);
        self.demag_into(m, &mut h_d);
        let ka = self.anis_pre();
        let h_anis: Vec<Vec3> = (0..n)
            .map(|c| if self.occupied[c] { Vec3::new(0.0, 0.0, ka * m[c].z) } else { Vec3::ZERO })
            .collect();
        let h_eff = (0..n).map(|c| h_ex[c] + h_d[c] + h_anis[c]).collect();
        FieldTerms { h_ex, h_d, h_anis, h_eff }
    }

    /// Energies of `m`. The demag energy uses the evaluator's demag mode.
    pub fn energies(&mut self, m: &[Vec3]) -> Energies {
        let v = self.volume;
        let (a, ku, ms, mu0) = (self.params.a_ex, self.params.ku, self.params.ms, self.consts.mu0);
        let mut exchange = 0.0;
        let mut anisotropy = 0.0;
        for c in 0..m.len() {
            if !self.occupied[c] {
                continue;
            }
            // Each link once: forward neighbors only.
            for axis in 0..3 {
                let n = self.nbrs[c][2 * axis + 1];
                if n != NONE {
                    let d = m[n as usize] - m[c];
                    exchange += a * d.dot(d) * self.inv[axis] * v;
                }
            }
            anisotropy -= ku * m[c].z * m[c].z * v;
        }
        let mut hd = std::mem::take(&mut self.scratch);
        self.demag_into(m, &mut hd);
        let demag = -0.5 * mu0 * ms * v * (0..m.len()).map(|c| m[c].dot(hd[c])).sum::<f64>();
        self.scratch = hd;
        Energies { exchange, demag, anisotropy }
    }

    pub fn total_energy(&mut self, m: &[Vec3]) -> f64 {
        self.energies(m).total()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CellSize;

    fn params() -> MaterialParams {
        MaterialParams::default()
    }

    #[test]
    fn uniform_state_has_no_exchange_field() {
        let mesh = Mesh::cuboid(10, 6, 1, CellSize::default()).unwrap();
        let m = MagnetizationField::uniform(&mesh, Vec3::Z);
        assert!(exchange_field(&m, &params(), &mesh).iter().all(|h| h.max_abs() == 0.0));
    }

    #[test]
    fn anisotropy_field_value() {
        let mesh = Mesh::cuboid(3, 3, 1, CellSize::default()).unwrap();
        let p = params();
        let h = anisotropy_field(&MagnetizationField::uniform(&mesh, Vec3::Z), &p, &mesh);
        let expect = 2.0 * 0.59e6 / (1.256_637_062_12e-6 * 6.0e5);
        assert!((h[4].z - expect).abs() < 1e-9 * expect);
        let h = anisotropy_field(&MagnetizationField::uniform(&mesh, Vec3::X), &p, &mesh);
        assert!(h.iter().all(|v| *v == Vec3::ZERO));
        let iso = MaterialParams { ku: 0.0, ..p };
        let h = anisotropy_field(&MagnetizationField::uniform(&mesh, Vec3::Z), &iso, &mesh);
        assert!(h.iter().all(|v| *v == Vec3::ZERO));
    }

    #[test]
    fn local_mode_on_wide_film_tracks_full_demag() {
        let mesh = Mesh::cuboid(64, 64, 1, CellSize::default()).unwrap();
        let m = MagnetizationField::uniform(&mesh, Vec3::Z);
        let full = effective(&m, &params(), &mesh, DemagMode::Fft);
        let local = effective(&m, &params(), &mesh, DemagMode::Local);
        let avg = |h: &[Vec3]| h.iter().map(|v| v.z).sum::<f64>() / h.len() as f64;
        let (a, b) = (avg(&full.h_eff), avg(&local.h_eff));
        assert!((a - b).abs() < 0.1 * b.abs(), "{a} vs {b}");
    }

    #[test]
    fn terms_sum_exactly() {
        let mesh = Mesh::cuboid(8, 4, 1, CellSize::default()).unwrap();
        let m = MagnetizationField::from_fn(&mesh, |c| Vec3::new((c as f64).sin(), 0.3, 1.0));
        let t = effective(&m, &params(), &mesh, DemagMode::Fft);
        for c in 0..mesh.len() {
            assert_eq!(t.h_eff[c], t.h_ex[c] + t.h_d[c] + t.h_anis[c]);
        }
    }

    #[test]
    fn interactions_off_gives_tiny_field() {
        let mesh = Mesh::cuboid(6, 6, 1, CellSize::default()).unwrap();
        let p = MaterialParams { ku: 0.0, a_ex: 1e-40, ms: 1e-6, ..params() };
        let m = MagnetizationField::from_fn(&mesh, |c| Vec3::new(1.0, c as f64, 0.5));
        let t = effective(&m, &p, &mesh, DemagMode::Fft);
        assert!(t.h_eff.iter().all(|h| h.max_abs() < 1e-3));
    }
}
