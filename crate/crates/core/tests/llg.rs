use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xdwm::dw::{track_wall, wall_at};
use xdwm::field::DemagMode;
use xdwm::llg::{llg_rhs, velocity_map, CurrentMap, Llg, SimState, SolverConfig, SttConvention};
use xdwm::{build_mesh, CellSize, GeometrySpec, MagnetizationField, MaterialParams, Mesh, PhysicalConstants, Vec3};

const MU0: f64 = 1.256_637_062_12e-6;

fn wire(domains: usize) -> Mesh {
    build_mesh(&GeometrySpec::plain_wire(domains), CellSize::default()).unwrap()
}

fn llg(mesh: &Mesh, p: MaterialParams, cfg: SolverConfig) -> Llg {
    Llg::new(mesh, p, PhysicalConstants::SI, DemagMode::Fft, cfg).unwrap()
}

fn random_m(mesh: &Mesh, seed: u64) -> MagnetizationField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MagnetizationField::from_fn(mesh, |_| {
        Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalized()
    })
}

#[test]
fn precession_rate_about_a_fixed_field() {
    let mesh = Mesh::cuboid(1, 1, 1, CellSize::default()).unwrap();
    let p = MaterialParams::default();
    let c = PhysicalConstants::SI;
    let h = 3e5;
    for theta in [0.1_f64, 0.7, 1.3, 2.5] {
        let m = MagnetizationField::uniform(&mesh, Vec3::new(theta.sin(), 0.0, theta.cos()));
        let d = llg_rhs(&m, &[Vec3::new(0.0, 0.0, h)], None, &mesh, &p, &c)[0];
        let mv = m.get(0);
        let rate = (mv.x * d.y - mv.y * d.x) / (mv.x * mv.x + mv.y * mv.y);
        let expect = c.gamma * MU0 * h / (1.0 + p.alpha * p.alpha);
        assert!((rate.abs() - expect).abs() < 1e-10 * expect, "{rate} vs {expect}");
        // Damping pulls m towards the field.
        assert!(d.z > 0.0);
    }
}

#[test]
fn single_spin_phase_follows_anisotropy_field() {
    // One cell, no demag: h = Hk·m_z·ẑ, so dφ/dt = γ0·Hk·m_z/(1+α²).
    let mesh = Mesh::cuboid(1, 1, 1, CellSize::default()).unwrap();
    let p = MaterialParams::default();
    let c = PhysicalConstants::SI;
    let hk = 2.0 * p.ku / (MU0 * p.ms);
    let cfg = SolverConfig { tolerance: 1e-8, ..SolverConfig::default() };
    let mut l = Llg::new(&mesh, p, c, DemagMode::Off, cfg).unwrap();
    let th = 0.5_f64;
    let mut s = SimState::new(MagnetizationField::uniform(&mesh, Vec3::new(th.sin(), 0.0, th.cos())));
    let mut samples = vec![(0.0, s.m.get(0))];
    l.run_until(&mut s, 20e-12, |st| samples.push((st.time, st.m.get(0)))).unwrap();
    let (mut phase, mut predicted) = (0.0, 0.0);
    for w in samples.windows(2) {
        let ((t0, a), (t1, b)) = (w[0], w[1]);
        let mut d = b.y.atan2(b.x) - a.y.atan2(a.x);
        if d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        } else if d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        phase += d;
        predicted += 0.5 * (a.z + b.z) * (t1 - t0) * c.gamma * MU0 * hk / (1.0 + p.alpha * p.alpha);
    }
    assert!(predicted > 3.0);
    assert!((phase.abs() - predicted).abs() < 1e-3 * predicted, "{phase} vs {predicted}");
}

#[test]
fn rhs_is_orthogonal_to_m() {
    let mesh = wire(1);
    let p = MaterialParams::default();
    let c = PhysicalConstants::SI;
    let m = random_m(&mesh, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h: Vec<Vec3> = (0..mesh.len()).map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()) * 1e6).collect();
    let u: Vec<Vec3> = (0..mesh.len()).map(|_| Vec3::new(rng.gen_range(-200.0..200.0), 0.0, 0.0)).collect();
    let d = llg_rhs(&m, &h, Some(&u), &mesh, &p, &c);
    for cell in mesh.occupied_cells() {
        let dm = d[cell];
        assert!(m.get(cell).dot(dm).abs() <= 1e-10 * dm.norm(), "cell {cell}");
    }
}

#[test]
fn aligned_field_and_uniform_texture_give_no_torque() {
    let mesh = wire(1);
    let p = MaterialParams::default();
    let c = PhysicalConstants::SI;
    let m = MagnetizationField::uniform(&mesh, Vec3::new(0.3, -0.2, 0.9).normalized());
    let h: Vec<Vec3> = (0..mesh.len()).map(|k| m.get(k) * (1e5 + k as f64)).collect();
    let u = vec![Vec3::new(150.0, 0.0, 0.0); mesh.len()];
    let scale = c.gamma * MU0 * 2e5;
    for d in [llg_rhs(&m, &h, None, &mesh, &p, &c), llg_rhs(&m, &h, Some(&u), &mesh, &p, &c)] {
        let worst = d.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-12 * scale, "{worst}");
    }
}

#[test]
fn uniform_state_stays_put() {
    let mesh = wire(2);
    let mut l = llg(&mesh, MaterialParams::default(), SolverConfig::default());
    let start = MagnetizationField::uniform(&mesh, Vec3::Z);
    let mut s = SimState::new(start.clone());
    l.run_until(&mut s, 1e-9, |_| {}).unwrap();
    assert!(s.m.max_diff(&start) <= 1e-8, "{}", s.m.max_diff(&start));
}

#[test]
fn energy_never_rises_without_current() {
    let mesh = Mesh::cuboid(32, 16, 1, CellSize::default()).unwrap();
    let mut l = llg(&mesh, MaterialParams::default(), SolverConfig::default());
    let mut m = random_m(&mesh, 4);
    // Start near +z so the run stays short.
    for c in 0..mesh.len() {
        m.set(c, (m.get(c) * 0.4 + Vec3::Z).normalized());
    }
    let mut s = SimState::new(m);
    let mut e = vec![l.energies(&s).total()];
    let mut states = Vec::new();
    l.run_until(&mut s, 50e-12, |st| states.push(st.clone())).unwrap();
    for st in &states {
        e.push(l.energies(st).total());
    }
    for w in e.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "{} -> {}", w[0], w[1]);
        assert!(w[1] <= w[0] + 1e-9 * w[0].abs(), "{} -> {}", w[0], w[1]);
    }
    assert!(e[e.len() - 1] < e[0]);
}

fn moving_wall(start: &SimState, mesh: &Mesh, tolerance: f64) -> (SimState, f64) {
    let cfg = SolverConfig { tolerance, ..SolverConfig::default() };
    let mut l = llg(mesh, MaterialParams::default(), cfg);
    let j = CurrentMap::uniform(mesh, Vec3::new(1.1e12, 0.0, 0.0));
    l.set_current(Some(&j));
    let mut s = start.clone();
    let mut worst: f64 = 0.0;
    l.run_until(&mut s, 1e-9, |st| worst = worst.max(st.m.max_norm_error(mesh))).unwrap();
    (s, worst)
}

#[test]
fn norm_is_kept_and_tolerance_halving_converges() {
    let mesh = wire(2);
    let p = MaterialParams::default();
    let m = wall_at(&mesh, 0, 40e-9, p.wall_width(&PhysicalConstants::SI) / std::f64::consts::PI).unwrap();
    let mut start = SimState::new(m);
    // A wall relaxes slowly below 1e-3 and is already at rest for this.
    let cfg = SolverConfig { relax_torque: 1e-3, ..SolverConfig::default() };
    llg(&mesh, p, cfg).relax(&mut start).unwrap();
    let (a, worst) = moving_wall(&start, &mesh, 1e-5);
    assert!(worst <= 1e-6, "{worst}");
    let (b, _) = moving_wall(&start, &mesh, 0.5e-5);
    let (coarse, _) = moving_wall(&start, &mesh, 2e-5);
    // Global error builds up over ~1e4 steps, so the gap is a few times
    // the per-step tolerance; it must shrink as the tolerance does.
    let diff = a.m.max_diff(&b.m);
    let diff_coarse = coarse.m.max_diff(&a.m);
    assert!(diff < 20.0 * 1e-5, "{diff}");
    assert!(diff < diff_coarse, "{diff} vs {diff_coarse}");
    // The wall did move.
    let x = track_wall(&a.m, &mesh, 0).unwrap();
    assert!(x > 80e-9, "{x}");
}

#[test]
fn zero_polarization_is_plain_llg() {
    let mesh = wire(1);
    let p = MaterialParams::default();
    let unpolarized = MaterialParams { polarization: 0.0, ..p };
    let m = random_m(&mesh, 8);
    let j = CurrentMap::uniform(&mesh, Vec3::new(1e12, 0.0, 0.0));
    let u = velocity_map(&j, &unpolarized, &PhysicalConstants::SI, SttConvention::Full);
    let run = |u: Option<Vec<Vec3>>| {
        let mut l = llg(&mesh, p, SolverConfig::default());
        l.set_velocity(u);
        let mut s = SimState::new(m.clone());
        l.run_until(&mut s, 5e-12, |_| {}).unwrap();
        s
    };
    let (with, without) = (run(Some(u)), run(None));
    assert_eq!(with.m, without.m);
    assert_eq!(with.steps, without.steps);
}

#[test]
fn runs_are_deterministic() {
    let mesh = wire(1);
    let m = random_m(&mesh, 12);
    let run = || {
        let mut l = llg(&mesh, MaterialParams::default(), SolverConfig::default());
        let mut s = SimState::new(m.clone());
        l.run_until(&mut s, 5e-12, |_| {}).unwrap();
        s.m
    };
    assert_eq!(run(), run());
}

#[test]
fn relaxed_wall_width_matches_bloch_profile() {
    let mesh = wire(2);
    let p = MaterialParams::default();
    let k_eff = p.ku - 0.5 * MU0 * p.ms * p.ms;
    let width = std::f64::consts::PI * (p.a_ex / k_eff).sqrt();
    // Seed twice too wide; relaxation has to narrow it.
    let m = wall_at(&mesh, 0, 80e-9, 2.0 * width / std::f64::consts::PI).unwrap();
    let mut s = SimState::new(m);
    llg(&mesh, p, SolverConfig::default()).relax(&mut s).unwrap();
    let prof = xdwm::dw::mz_profile(&s.m, &mesh, 0);
    // m_z = tanh((x0 - x)/Δ): the slope at the centre is 1/Δ.
    let k = prof.iter().position(|&v| v < 0.0).unwrap();
    let slope = (prof[k - 1] - prof[k]) / mesh.cell.dx;
    let measured = std::f64::consts::PI / slope;
    assert!((measured / width - 1.0).abs() < 0.2, "{measured} vs {width}");
}

#[test]
fn relax_keeps_uniform_state() {
    let mesh = wire(1);
    let mut s = SimState::new(MagnetizationField::uniform(&mesh, Vec3::Z));
    let rep = llg(&mesh, MaterialParams::default(), SolverConfig::default()).relax(&mut s).unwrap();
    assert_eq!(rep.steps, 0);
    assert_eq!(s.m, MagnetizationField::uniform(&mesh, Vec3::Z));
}

#[test]
fn relax_budget_reports_torque() {
    let mesh = wire(1);
    let cfg = SolverConfig { relax_max_steps: 2, ..SolverConfig::default() };
    let mut s = SimState::new(random_m(&mesh, 3));
    match llg(&mesh, MaterialParams::default(), cfg).relax(&mut s) {
        Err(xdwm::Error::NotConverged { torque, steps }) => {
            assert_eq!(steps, 2);
            assert!(torque > 1e-4);
        }
        other => panic!("{other:?}"),
    }
}
