//! Magnetostatic (demagnetizing) field.
//!
//! The field of cell `j` at cell `i` is `h_i = −N(r_i − r_j)·Ms·m_j`, with
//! `N` the Newell tensor for two equal cuboid cells. The convolution is
//! evaluated with zero-padded real FFTs; [`DemagKernel::direct`] does the
//! same sum pairwise and serves as the oracle for the transform path.

use std::f64::consts::PI;
use std::sync::Arc;

use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::geometry::{CellSize, Mesh};
use crate::vec3::Vec3;

/// Displacements beyond this many (largest) cell edges use the point-dipole
/// limit: the 27-term Newell difference loses all precision far away.
const DIPOLE_CUTOFF_CELLS: f64 = 24.0;

#[inline]
fn asinh_ratio(num: f64, den_sq: f64) -> f64 {
    // asinh(num / sqrt(den_sq)), callers guarantee den_sq > 0.
    (num / den_sq.sqrt()).asinh()
}

/// Newell's `f`, even in every argument.
fn newell_f(x: f64, y: f64, z: f64) -> f64 {
    let (x, y, z) = (x.abs(), y.abs(), z.abs());
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let r = (x2 + y2 + z2).sqrt();
    if r == 0.0 {
        return 0.0;
    }
    let mut f = (2.0 * x2 - y2 - z2) * r / 6.0;
    if y > 0.0 && x2 + z2 > 0.0 {
        f += 0.5 * y * (z2 - x2) * asinh_ratio(y, x2 + z2);
    }
    if z > 0.0 && x2 + y2 > 0.0 {
        f += 0.5 * z * (y2 - x2) * asinh_ratio(z, x2 + y2);
    }
    if x > 0.0 && y > 0.0 && z > 0.0 {
        f -= x * y * z * (y * z / (x * r)).atan();
    }
    f
}

/// Newell's `g`, odd in `x` and `y`, even in `z`.
fn newell_g(x: f64, y: f64, z: f64) -> f64 {
    let sign = x.signum() * y.signum();
    let (x, y, z) = (x.abs(), y.abs(), z.abs());
    if x == 0.0 || y == 0.0 {
        return 0.0;
    }
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let r = (x2 + y2 + z2).sqrt();
    let mut g = -x * y * r / 3.0;
    g += x * y * z * asinh_ratio(z, x2 + y2);
    g += y / 6.0 * (3.0 * z2 - y2) * asinh_ratio(x, y2 + z2);
    g += x / 6.0 * (3.0 * z2 - x2) * asinh_ratio(y, x2 + z2);
    if z > 0.0 {
        g -= z * z2 / 6.0 * (x * y / (z * r)).atan();
        g -= z * y2 / 2.0 * (x * z / (y * r)).atan();
        g -= z * x2 / 2.0 * (y * z / (x * r)).atan();
    }
    sign * g
}

#[inline]
fn weight(i: i32) -> f64 {
    if i == 0 {
        2.0
    } else {
        -1.0
    }
}

/// 27-point second difference `Σ w_i w_j w_k F(a + i·da, b + j·db, c + k·dc)`.
fn newell_sum(func: fn(f64, f64, f64) -> f64, a: f64, b: f64, c: f64, da: f64, db: f64, dc: f64) -> f64 {
    let mut s = 0.0;
    for i in -1..=1 {
        for j in -1..=1 {
            for k in -1..=1 {
                let w = weight(i) * weight(j) * weight(k);
                s += w * func(a + i as f64 * da, b + j as f64 * db, c + k as f64 * dc);
            }
        }
    }
    s
}

/// Symmetric demagnetization tensor between two cells.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor {
    pub xx: f64,
    pub yy: f64,
    pub zz: f64,
    pub xy: f64,
    pub xz: f64,
    pub yz: f64,
}

impl Tensor {
    #[inline]
    pub fn apply(&self, v: Vec3) -> Vec3 {
        Vec3::new(
            self.xx * v.x + self.xy * v.y + self.xz * v.z,
            self.xy * v.x + self.yy * v.y + self.yz * v.z,
            self.xz * v.x + self.yz * v.y + self.zz * v.z,
        )
    }
}

/// Newell tensor for a displacement `(x, y, z)` (meters) between two cells.
pub fn newell_tensor(x: f64, y: f64, z: f64, cell: CellSize) -> Tensor {
    let (dx, dy, dz) = (cell.dx, cell.dy, cell.dz);
    let edge = dx.max(dy).max(dz);
    let r2 = x * x + y * y + z * z;
    if r2.sqrt() > DIPOLE_CUTOFF_CELLS * edge {
        return dipole_tensor(x, y, z, cell);
    }
    let pre = 1.0 / (4.0 * PI * dx * dy * dz);
    Tensor {
        xx: pre * newell_sum(newell_f, x, y, z, dx, dy, dz),
        yy: pre * newell_sum(newell_f, y, x, z, dy, dx, dz),
        zz: pre * newell_sum(newell_f, z, y, x, dz, dy, dx),
        xy: pre * newell_sum(newell_g, x, y, z, dx, dy, dz),
        xz: pre * newell_sum(newell_g, x, z, y, dx, dz, dy),
        yz: pre * newell_sum(newell_g, y, z, x, dy, dz, dx),
    }
}

/// Far-field limit: both cells as point dipoles.
pub fn dipole_tensor(x: f64, y: f64, z: f64, cell: CellSize) -> Tensor {
    let r2 = x * x + y * y + z * z;
    let r = r2.sqrt();
    let pre = cell.volume() / (4.0 * PI * r2 * r);
    let q = |a: f64, b: f64| 3.0 * a * b / r2;
    Tensor {
        xx: pre * (1.0 - q(x, x)),
        yy: pre * (1.0 - q(y, y)),
        zz: pre * (1.0 - q(z, z)),
        xy: -pre * q(x, y),
        xz: -pre * q(x, z),
        yz: -pre * q(y, z),
    }
}

/// Real-space tensor table over all displacements of a mesh, shared by the
/// FFT and the pairwise path.
#[derive(Debug, Clone)]
struct TensorTable {
    nx: usize,
    ny: usize,
    /// Indexed by (|di|, |dj|, |dk|); signs restored by parity.
    data: Vec<Tensor>,
}

impl TensorTable {
    fn new(mesh: &Mesh) -> Self {
        let (nx, ny, nz) = (mesh.nx, mesh.ny, mesh.nz);
        let mut data = vec![Tensor::default(); nx * ny * nz];
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let mut t = newell_tensor(
                        i as f64 * mesh.cell.dx,
                        j as f64 * mesh.cell.dy,
                        k as f64 * mesh.cell.dz,
                        mesh.cell,
                    );
                    // Odd components vanish on the symmetry planes; pin them
                    // to exact zeros so N(r) = N(−r) holds bit for bit.
                    if i == 0 || j == 0 {
                        t.xy = 0.0;
                    }
                    if i == 0 || k == 0 {
                        t.xz = 0.0;
                    }
                    if j == 0 || k == 0 {
                        t.yz = 0.0;
                    }
                    data[i + nx * (j + ny * k)] = t;
                }
            }
        }
        Self { nx, ny, data }
    }

    #[inline]
    fn get(&self, di: i64, dj: i64, dk: i64) -> Tensor {
        let t = self.data[di.unsigned_abs() as usize
            + self.nx * (dj.unsigned_abs() as usize + self.ny * dk.unsigned_abs() as usize)];
        let (sx, sy, sz) = (sgn(di), sgn(dj), sgn(dk));
        Tensor {
            xy: t.xy * sx * sy,
            xz: t.xz * sx * sz,
            yz: t.yz * sy * sz,
            ..t
        }
    }
}

#[inline]
fn sgn(v: i64) -> f64 {
    if v < 0 {
        -1.0
    } else {
        1.0
    }
}

/// Precomputed demag kernel and FFT plans for one mesh.
pub struct DemagKernel {
    nx: usize,
    ny: usize,
    nz: usize,
    px: usize,
    py: usize,
    pz: usize,
    hx: usize,
    table: TensorTable,
    occupied: Vec<bool>,
    /// Kernel spectra (all real by parity), indexed [xx, yy, zz, xy, xz, yz].
    spectra: [Vec<f64>; 6],
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fft_y: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    fft_z: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    work: Workspace,
}

struct Workspace {
    real: Vec<f64>,
    spec: [Vec<Complex64>; 3],
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
    rscratch: Vec<Complex64>,
}

impl std::fmt::Debug for Workspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Workspace")
    }
}

impl std::fmt::Debug for DemagKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DemagKernel")
            .field("n", &(self.nx, self.ny, self.nz))
            .field("padded", &(self.px, self.py, self.pz))
            .finish()
    }
}

fn padded(n: usize) -> usize {
    if n > 1 {
        2 * n
    } else {
        1
    }
}

impl DemagKernel {
    pub fn new(mesh: &Mesh) -> Self {
        let (nx, ny, nz) = (mesh.nx, mesh.ny, mesh.nz);
        let (px, py, pz) = (padded(nx).max(2), padded(ny), padded(nz));
        let hx = px / 2 + 1;
        let mut rplanner = RealFftPlanner::<f64>::new();
        let r2c = rplanner.plan_fft_forward(px);
        let c2r = rplanner.plan_fft_inverse(px);
        let mut planner = FftPlanner::<f64>::new();
        let fft_y = (py > 1).then(|| (planner.plan_fft_forward(py), planner.plan_fft_inverse(py)));
        let fft_z = (pz > 1).then(|| (planner.plan_fft_forward(pz), planner.plan_fft_inverse(pz)));
        let nspec = hx * py * pz;
        let scratch_len = [
            fft_y.as_ref().map_or(0, |f| f.0.get_inplace_scratch_len().max(f.1.get_inplace_scratch_len())),
            fft_z.as_ref().map_or(0, |f| f.0.get_inplace_scratch_len().max(f.1.get_inplace_scratch_len())),
        ]
        .into_iter()
        .max()
        .unwrap_or(0);
        let rscratch_len = r2c.get_scratch_len().max(c2r.get_scratch_len());
        let work = Workspace {
            real: vec![0.0; px],
            spec: [
                vec![Complex64::default(); nspec],
                vec![Complex64::default(); nspec],
                vec![Complex64::default(); nspec],
            ],
            line: vec![Complex64::default(); py.max(pz)],
            scratch: vec![Complex64::default(); scratch_len],
            rscratch: vec![Complex64::default(); rscratch_len],
        };
        let table = TensorTable::new(mesh);
        let mut kernel = Self {
            nx,
            ny,
            nz,
            px,
            py,
            pz,
            hx,
            table,
            occupied: mesh.occupancy().to_vec(),
            spectra: Default::default(),
            r2c,
            c2r,
            fft_y,
            fft_z,
            work,
        };
        kernel.build_spectra();
        kernel
    }

    fn build_spectra(&mut self) {
        let (px, py, pz) = (self.px, self.py, self.pz);
        let disp = |p: usize, padded: usize, n: usize| -> Option<i64> {
            if padded == 1 {
                return Some(0);
            }
            if p < n {
                Some(p as i64)
            } else if p > padded - n {
                Some(p as i64 - padded as i64)
            } else {
                None
            }
        };
        let mut spectra: [Vec<f64>; 6] = Default::default();
        let mut full = vec![0.0; px * py * pz];
        for comp in 0..6 {
            for k in 0..pz {
                for j in 0..py {
                    for i in 0..px {
                        let v = match (disp(i, px, self.nx), disp(j, py, self.ny), disp(k, pz, self.nz)) {
                            (Some(di), Some(dj), Some(dk)) => {
                                let t = self.table.get(di, dj, dk);
                                [t.xx, t.yy, t.zz, t.xy, t.xz, t.yz][comp]
                            }
                            _ => 0.0,
                        };
                        full[i + px * (j + py * k)] = v;
                    }
                }
            }
            self.forward(&full, 0, px * py * pz);
            let spec = &self.work.spec[0];
            spectra[comp] = spec.iter().map(|c| c.re).collect();
        }
        self.spectra = spectra;
    }

    /// Forward transform of a padded real array into `work.spec[slot]`.
    /// Rows beyond the physical extent are known to be zero when `rows`
    /// says so.
    fn forward(&mut self, full: &[f64], slot: usize, _len: usize) {
        let (px, py, pz, hx) = (self.px, self.py, self.pz, self.hx);
        let w = &mut self.work;
        let spec = &mut w.spec[slot];
        for k in 0..pz {
            for j in 0..py {
                let row = &full[px * (j + py * k)..px * (j + py * k) + px];
                let out = &mut spec[hx * (j + py * k)..hx * (j + py * k) + hx];
                if row.iter().all(|v| *v == 0.0) {
                    out.fill(Complex64::default());
                    continue;
                }
                w.real.copy_from_slice(row);
                self.r2c
                    .process_with_scratch(&mut w.real, out, &mut w.rscratch)
                    .expect("r2c sizes");
            }
        }
        transform_yz(spec, hx, py, pz, &self.fft_y, &self.fft_z, &mut w.line, &mut w.scratch, true);
    }

    /// Demagnetizing field of magnetization `m` (unit vectors, zero outside
    /// the mask) for saturation magnetization `ms`; result in A/m.
    pub fn field(&mut self, m: &[Vec3], ms: f64, out: &mut [Vec3]) {
        let (nx, ny, nz) = (self.nx, self.ny, self.nz);
        let (px, py, pz, hx) = (self.px, self.py, self.pz, self.hx);
        let three_d = nz > 1;
        // Forward transforms of Ms·m components.
        for comp in 0..3 {
            if !three_d && comp == 2 {
                // handled below with the same code path
            }
            let w = &mut self.work;
            let spec = &mut w.spec[comp];
            for k in 0..pz {
                for j in 0..py {
                    let out_row = &mut spec[hx * (j + py * k)..hx * (j + py * k) + hx];
                    if j >= ny || k >= nz {
                        out_row.fill(Complex64::default());
                        continue;
                    }
                    w.real.fill(0.0);
                    let base = nx * (j + ny * k);
                    let mut any = false;
                    for i in 0..nx {
                        let v = m[base + i].component(comp);
                        if v != 0.0 {
                            any = true;
                        }
                        w.real[i] = ms * v;
                    }
                    if !any {
                        out_row.fill(Complex64::default());
                        continue;
                    }
                    self.r2c
                        .process_with_scratch(&mut w.real, out_row, &mut w.rscratch)
                        .expect("r2c sizes");
                }
            }
            transform_yz(spec, hx, py, pz, &self.fft_y, &self.fft_z, &mut w.line, &mut w.scratch, true);
        }

        // Pointwise tensor product, in place.
        let [sxx, syy, szz, sxy, sxz, syz] = &self.spectra;
        let [a, b, c] = &mut self.work.spec;
        if three_d {
            for idx in 0..a.len() {
                let (mx, my, mz) = (a[idx], b[idx], c[idx]);
                a[idx] = -(mx * sxx[idx] + my * sxy[idx] + mz * sxz[idx]);
                b[idx] = -(mx * sxy[idx] + my * syy[idx] + mz * syz[idx]);
                c[idx] = -(mx * sxz[idx] + my * syz[idx] + mz * szz[idx]);
            }
        } else {
            // Single layer: the xz and yz couplings vanish identically.
            for idx in 0..a.len() {
                let (mx, my) = (a[idx], b[idx]);
                a[idx] = -(mx * sxx[idx] + my * sxy[idx]);
                b[idx] = -(mx * sxy[idx] + my * syy[idx]);
                c[idx] = -(c[idx] * szz[idx]);
            }
        }

        let norm = 1.0 / (px * py * pz) as f64;
        for o in out.iter_mut() {
            *o = Vec3::ZERO;
        }
        for comp in 0..3 {
            let w = &mut self.work;
            let spec = &mut w.spec[comp];
            transform_yz(spec, hx, py, pz, &self.fft_y, &self.fft_z, &mut w.line, &mut w.scratch, false);
            for k in 0..nz {
                for j in 0..ny {
                    let row = &mut spec[hx * (j + py * k)..hx * (j + py * k) + hx];
                    // The c2r input must have real DC/Nyquist bins.
                    row[0].im = 0.0;
                    row[hx - 1].im = 0.0;
                    self.c2r
                        .process_with_scratch(row, &mut w.real, &mut w.rscratch)
                        .expect("c2r sizes");
                    let base = nx * (j + ny * k);
                    for i in 0..nx {
                        let c = base + i;
                        if self.occupied[c] {
                            let v = w.real[i] * norm;
                            match comp {
                                0 => out[c].x = v,
                                1 => out[c].y = v,
                                _ => out[c].z = v,
                            }
                        }
                    }
                }
            }
        }
    }

    /// Pairwise O(N²) evaluation with the same tensor table.
    pub fn direct(&self, m: &[Vec3], ms: f64, out: &mut [Vec3]) {
        let (nx, ny) = (self.nx, self.ny);
        let cells: Vec<usize> = (0..m.len()).filter(|&c| self.occupied[c]).collect();
        let coord = |c: usize| {
            (
                (c % nx) as i64,
                ((c / nx) % ny) as i64,
                (c / (nx * ny)) as i64,
            )
        };
        for o in out.iter_mut() {
            *o = Vec3::ZERO;
        }
        for &i in &cells {
            let (ai, aj, ak) = coord(i);
            let mut h = Vec3::ZERO;
            for &j in &cells {
                let (bi, bj, bk) = coord(j);
                let t = self.table.get(ai - bi, aj - bj, ak - bk);
                h -= t.apply(m[j] * ms);
            }
            out[i] = h;
        }
    }

    /// Tensor between two cells of the mesh.
    pub fn tensor_between(&self, a: usize, b: usize) -> Tensor {
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let (a, b) = (a as i64, b as i64);
        let (ai, aj, ak) = (a % nx, (a / nx) % ny, a / (nx * ny));
        let (bi, bj, bk) = (b % nx, (b / nx) % ny, b / (nx * ny));
        self.table.get(ai - bi, aj - bj, ak - bk)
    }
}

#[allow(clippy::too_many_arguments)]
fn transform_yz(
    spec: &mut [Complex64],
    hx: usize,
    py: usize,
    pz: usize,
    fft_y: &Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    fft_z: &Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
    line: &mut [Complex64],
    scratch: &mut [Complex64],
    forward: bool,
) {
    if let Some((fwd, inv)) = fft_y {
        let plan = if forward { fwd } else { inv };
        let line = &mut line[..py];
        for k in 0..pz {
            for i in 0..hx {
                for j in 0..py {
                    line[j] = spec[i + hx * (j + py * k)];
                }
                plan.process_with_scratch(line, scratch);
                for j in 0..py {
                    spec[i + hx * (j + py * k)] = line[j];
                }
            }
        }
    }
    if let Some((fwd, inv)) = fft_z {
        let plan = if forward { fwd } else { inv };
        let line = &mut line[..pz];
        for j in 0..py {
            for i in 0..hx {
                for k in 0..pz {
                    line[k] = spec[i + hx * (j + py * k)];
                }
                plan.process_with_scratch(line, scratch);
                for k in 0..pz {
                    spec[i + hx * (j + py * k)] = line[k];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_self_tensor_is_one_third() {
        let c = CellSize::new(1e-9, 1e-9, 1e-9);
        let t = newell_tensor(0.0, 0.0, 0.0, c);
        for v in [t.xx, t.yy, t.zz] {
            assert!((v - 1.0 / 3.0).abs() < 1e-12, "{v}");
        }
        assert!(t.xy.abs() < 1e-15 && t.xz.abs() < 1e-15 && t.yz.abs() < 1e-15);
    }

    #[test]
    fn self_tensor_trace_is_one() {
        let c = CellSize::new(2e-9, 2e-9, 1e-9);
        let t = newell_tensor(0.0, 0.0, 0.0, c);
        assert!((t.xx + t.yy + t.zz - 1.0).abs() < 1e-12);
        // Flat cell: out-of-plane factor dominates.
        assert!(t.zz > t.xx && (t.xx - t.yy).abs() < 1e-12);
    }

    #[test]
    fn newell_matches_dipole_near_cutoff() {
        let c = CellSize::new(2e-9, 2e-9, 1e-9);
        for (x, y) in [(20.0, 0.0), (14.0, 14.0), (0.0, 22.0), (17.0, 9.0)] {
            let (x, y) = (x * 2e-9, y * 2e-9);
            let pre = 1.0 / (4.0 * PI * c.volume());
            let exact = Tensor {
                xx: pre * newell_sum(newell_f, x, y, 0.0, c.dx, c.dy, c.dz),
                yy: pre * newell_sum(newell_f, y, x, 0.0, c.dy, c.dx, c.dz),
                zz: pre * newell_sum(newell_f, 0.0, y, x, c.dz, c.dy, c.dx),
                xy: pre * newell_sum(newell_g, x, y, 0.0, c.dx, c.dy, c.dz),
                ..Default::default()
            };
            let d = dipole_tensor(x, y, 0.0, c);
            let scale = d.zz.abs();
            for (a, b) in [(exact.xx, d.xx), (exact.yy, d.yy), (exact.zz, d.zz), (exact.xy, d.xy)] {
                assert!((a - b).abs() < 2e-2 * scale, "{a} vs {b} at ({x},{y})");
            }
        }
    }
}
