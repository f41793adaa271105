mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xdwm::field::{anisotropy_field, demag_field, demag_field_direct, exchange_field, DemagKernel, DemagMode};
use xdwm::{build_mesh, CellSize, GeometrySpec, MagnetizationField, MaterialParams, Mesh, Vec3};

use common::{gradient_check, random_m, MU0};

#[test]
fn cube_demag_factor_is_one_third() {
    let mesh = Mesh::cuboid(16, 16, 16, CellSize::new(1e-9, 1e-9, 1e-9)).unwrap();
    let p = MaterialParams::default();
    let m = MagnetizationField::uniform(&mesh, Vec3::Z);
    let h = demag_field(&m, &p, &mesh);
    let avg = h.iter().map(|v| v.z).sum::<f64>() / h.len() as f64;
    let n = -avg / p.ms;
    assert!((n - 1.0 / 3.0).abs() < 0.02 / 3.0, "N = {n}");
}

#[test]
fn thin_film_interior_field_approaches_minus_ms() {
    let mesh = Mesh::cuboid(128, 128, 1, CellSize::default()).unwrap();
    let p = MaterialParams::default();
    let m = MagnetizationField::uniform(&mesh, Vec3::Z);
    let h = demag_field(&m, &p, &mesh);
    let centre = mesh.index(64, 64, 0);
    assert!((h[centre].z / -p.ms - 1.0).abs() < 0.05, "{}", h[centre].z);
}

#[test]
fn fft_matches_direct_sum() {
    let p = MaterialParams::default();
    // Irregular mask so the padding and the mask both matter.
    let occ: Vec<bool> = (0..64).map(|c| c % 7 != 3).collect();
    for mesh in [
        Mesh::cuboid(8, 8, 1, CellSize::default()).unwrap(),
        Mesh::from_mask(8, 8, 1, CellSize::default(), occ).unwrap(),
        Mesh::cuboid(5, 4, 3, CellSize::new(2e-9, 3e-9, 1e-9)).unwrap(),
    ] {
        let m = random_m(&mesh, 7);
        let a = demag_field(&m, &p, &mesh);
        let b = demag_field_direct(&m, &p, &mesh);
        let scale = b.iter().map(|v| v.max_abs()).fold(0.0, f64::max);
        for c in 0..mesh.len() {
            assert!((a[c] - b[c]).max_abs() <= 1e-9 * scale, "cell {c}: {:?} vs {:?}", a[c], b[c]);
        }
    }
}

#[test]
fn fft_matches_direct_beyond_dipole_cutoff() {
    let p = MaterialParams::default();
    let mesh = Mesh::cuboid(60, 3, 1, CellSize::default()).unwrap();
    let m = random_m(&mesh, 3);
    let a = demag_field(&m, &p, &mesh);
    let b = demag_field_direct(&m, &p, &mesh);
    let scale = b.iter().map(|v| v.max_abs()).fold(0.0, f64::max);
    for c in 0..mesh.len() {
        assert!((a[c] - b[c]).max_abs() <= 1e-9 * scale);
    }
}

#[test]
fn demag_tensor_is_symmetric_between_cells() {
    let mesh = Mesh::cuboid(6, 5, 2, CellSize::default()).unwrap();
    let k = DemagKernel::new(&mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (i, j) = (rng.gen_range(0..mesh.len()), rng.gen_range(0..mesh.len()));
        assert_eq!(k.tensor_between(i, j), k.tensor_between(j, i));
    }
}

/// Laplacian written out from scratch over (i, j) grid coordinates.
fn laplacian_oracle(m: &MagnetizationField, mesh: &Mesh, a: f64, ms: f64) -> Vec<Vec3> {
    let mut out = vec![Vec3::ZERO; mesh.len()];
    for j in 0..mesh.ny {
        for i in 0..mesh.nx {
            let c = mesh.index(i, j, 0);
            if !mesh.is_occupied(c) {
                continue;
            }
            let mut s = Vec3::ZERO;
            let cands = [
                (i.wrapping_sub(1), j, mesh.cell.dx),
                (i + 1, j, mesh.cell.dx),
                (i, j.wrapping_sub(1), mesh.cell.dy),
                (i, j + 1, mesh.cell.dy),
            ];
            for (ii, jj, d) in cands {
                if ii < mesh.nx && jj < mesh.ny && mesh.is_occupied(mesh.index(ii, jj, 0)) {
                    s += (m.get(mesh.index(ii, jj, 0)) - m.get(c)) * (1.0 / (d * d));
                }
            }
            out[c] = s * (2.0 * a / (MU0 * ms));
        }
    }
    out
}

#[test]
fn flipped_cell_exchange_matches_oracle() {
    let mesh = Mesh::cuboid(9, 7, 1, CellSize::default()).unwrap();
    let p = MaterialParams::default();
    let mut m = MagnetizationField::uniform(&mesh, Vec3::Z);
    let c = mesh.index(4, 3, 0);
    m.set(c, -Vec3::Z);
    let h = exchange_field(&m, &p, &mesh);
    let o = laplacian_oracle(&m, &mesh, p.a_ex, p.ms);
    // Four in-plane neighbors each differ by 2ẑ at 2 nm spacing.
    let expect = 2.0 * p.a_ex / (MU0 * p.ms) * 4.0 * 2.0 / (2e-9 * 2e-9);
    assert!((h[c].z - expect).abs() < 1e-9 * expect);
    for k in 0..mesh.len() {
        assert!((h[k] - o[k]).max_abs() <= 1e-9 * expect);
    }
}

#[test]
fn notched_mask_exchange_matches_oracle() {
    let mesh = build_mesh(&GeometrySpec::notched_wire(3), CellSize::default()).unwrap();
    let p = MaterialParams::default();
    let m = random_m(&mesh, 5);
    let h = exchange_field(&m, &p, &mesh);
    let o = laplacian_oracle(&m, &mesh, p.a_ex, p.ms);
    let scale = o.iter().map(|v| v.max_abs()).fold(0.0, f64::max);
    for k in 0..mesh.len() {
        assert!((h[k] - o[k]).max_abs() <= 1e-12 * scale);
    }
}

#[test]
fn exchange_and_anisotropy_are_energy_gradients() {
    let p = MaterialParams::default();
    let err = gradient_check(DemagMode::Off, p, 50, 21);
    assert!(err <= 1e-5, "relative error {err}");
    let only_ex = MaterialParams { ku: 0.0, ..p };
    assert!(gradient_check(DemagMode::Off, only_ex, 50, 22) <= 1e-5);
    let only_anis = MaterialParams { a_ex: 1e-30, ..p };
    assert!(gradient_check(DemagMode::Off, only_anis, 50, 23) <= 1e-5);
}

#[test]
fn demag_is_an_energy_gradient() {
    let err = gradient_check(DemagMode::Fft, MaterialParams::default(), 30, 31);
    assert!(err <= 1e-5, "relative error {err}");
}

#[test]
fn local_terms_touch_only_neighbors() {
    let mesh = Mesh::cuboid(10, 8, 1, CellSize::default()).unwrap();
    let p = MaterialParams::default();
    let m = random_m(&mesh, 9);
    let c = mesh.index(5, 4, 0);
    let mut m2 = m.clone();
    m2.set(c, Vec3::new(0.3, -0.2, -1.0));
    let (e1, e2) = (exchange_field(&m, &p, &mesh), exchange_field(&m2, &p, &mesh));
    let (a1, a2) = (anisotropy_field(&m, &p, &mesh), anisotropy_field(&m2, &p, &mesh));
    let near = [c, c - 1, c + 1, c - mesh.nx, c + mesh.nx];
    for k in 0..mesh.len() {
        if !near.contains(&k) {
            assert_eq!(e1[k], e2[k]);
        }
        if k != c {
            assert_eq!(a1[k], a2[k]);
        }
    }
}

#[test]
fn neighbouring_wires_barely_interact() {
    // Field of the upper wire at the lower wire, relative to its self field.
    let cell = CellSize::default();
    let spec = GeometrySpec::bundle(2, 4, vec![]);
    let mesh = build_mesh(&spec, cell).unwrap();
    let p = MaterialParams::default();
    let top = &mesh.x_wire(0).unwrap().rect;
    let m = MagnetizationField::from_fn(&mesh, |c| {
        let (i, j, _) = mesh.coords(c);
        if top.contains(i, j) {
            Vec3::Z
        } else {
            Vec3::ZERO
        }
    });
    let mut m = m.into_vec();
    for c in 0..mesh.len() {
        if !mesh.is_occupied(c) {
            m[c] = Vec3::ZERO;
        }
    }
    let mut h = vec![Vec3::ZERO; mesh.len()];
    DemagKernel::new(&mesh).field(&m, p.ms, &mut h);
    let bottom = &mesh.x_wire(1).unwrap().rect;
    let mut worst = 0.0f64;
    for c in mesh.occupied_cells() {
        let (i, j, _) = mesh.coords(c);
        if bottom.contains(i, j) {
            worst = worst.max(h[c].norm());
        }
    }
    assert!(worst < 0.01 * p.ms, "cross-talk {}", worst / p.ms);
}
