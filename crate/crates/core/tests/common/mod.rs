//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xdwm::array::{shift_x, shift_y, ArrayState, Direction, Rows, Slot};
use xdwm::Error;
use xdwm::field::{DemagMode, FieldEvaluator};
use xdwm::sneak::{BranchKind, ResistorNetwork, Source};
use xdwm::{build_mesh, CellSize, GeometrySpec, MagnetizationField, MaterialParams, Mesh, PhysicalConstants, Vec3};

pub const MU0: f64 = 1.256_637_062_12e-6;

pub fn random_m(mesh: &Mesh, seed: u64) -> MagnetizationField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    MagnetizationField::from_fn(mesh, |_| {
        Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Central-difference check of h = −(1/μ0 Ms V) ∂E/∂m for one mode.
pub fn gradient_check(mode: DemagMode, p: MaterialParams, trials: usize, seed: u64) -> f64 {
    let mesh = build_mesh(&GeometrySpec::notched_wire(1), CellSize::default()).unwrap();
    let mut ev = FieldEvaluator::new(&mesh, p, PhysicalConstants::SI, mode);
    let m0 = random_m(&mesh, seed);
    let terms = ev.terms(m0.as_slice());
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 1);
    let cells: Vec<usize> = mesh.occupied_cells().collect();
    let v = mesh.cell.volume();
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let c = cells[rng.gen_range(0..cells.len())];
        let axis = rng.gen_range(0..3);
        let eps = 1e-4;
        let mut m = m0.as_slice().to_vec();
        let base = m[c];
        let mut shifted = |d: f64| {
            let mut b = base;
            match axis {
                0 => b.x += d,
                1 => b.y += d,
                _ => b.z += d,
            }
            m[c] = b;
            ev.total_energy(&m)
        };
        let (ep, em) = (shifted(eps), shifted(-eps));
        let grad = (ep - em) / (2.0 * eps);
        let h_fd = -grad / (MU0 * p.ms * v);
        let h = terms.h_eff[c].component(axis);
        let scale = terms.h_eff[c].norm().max(1.0);
        worst = worst.max((h_fd - h).abs() / scale);
    }
    worst
}

/// Gauss-Jordan elimination with partial pivoting on a dense copy.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[r][k] -= f * a[col][k];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

/// Connected random network with current sources, ground at node 0.
pub fn random_network(rng: &mut ChaCha8Rng, n: usize) -> ResistorNetwork {
    let mut net = ResistorNetwork::new(1e3, 1e6);
    for k in 1..n {
        net.add_node(format!("n{k}"));
    }
    // Spanning tree, then extra edges.
    for k in 1..n {
        let p = rng.gen_range(0..k);
        net.add_resistor(p, k, rng.gen_range(10.0..1e4), BranchKind::WireSegment);
    }
    for _ in 0..n {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            net.add_resistor(a, b, rng.gen_range(10.0..1e4), BranchKind::WireSegment);
        }
    }
    for _ in 0..3 {
        let node = rng.gen_range(1..n);
        net.sources.push(Source::Current { node, amps: rng.gen_range(-1e-3..1e-3) });
    }
    net
}

pub fn oracle_potentials(net: &ResistorNetwork) -> Vec<f64> {
    let n = net.node_count();
    let mut a = vec![vec![0.0; n - 1]; n - 1];
    let mut b = vec![0.0; n - 1];
    for br in &net.branches {
        let g = 1.0 / net.resistance(br);
        let (i, j) = (br.a, br.b);
        if i > 0 {
            a[i - 1][i - 1] += g;
        }
        if j > 0 {
            a[j - 1][j - 1] += g;
        }
        if i > 0 && j > 0 {
            a[i - 1][j - 1] -= g;
            a[j - 1][i - 1] -= g;
        }
    }
    for s in &net.sources {
        if let Source::Current { node, amps } = s {
            b[node - 1] += amps;
        }
    }
    let mut v = vec![0.0];
    v.extend(dense_solve(a, b));
    v
}

/// Physical domain locations, independent of how the model stores them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loc {
    Grid(usize, usize),
    Above(usize, usize),
    Below(usize, usize),
}

/// Reference model: a map of locations and, per wire, the ordered list of
/// locations it threads. A lossless shift is a rotation of that list.
pub struct Oracle {
    pub cells: HashMap<Loc, Slot>,
    pub rows: Vec<Vec<Loc>>,
    pub ynws: Vec<Vec<Loc>>,
}

impl Oracle {
    pub fn of(s: &ArrayState) -> Self {
        let mut cells = HashMap::new();
        let mut rows = Vec::new();
        for r in 0..s.rows() {
            let locs: Vec<Loc> = (0..s.cols()).map(|c| Loc::Grid(r, c)).collect();
            for &l in &locs {
                if let Loc::Grid(r, c) = l {
                    cells.insert(l, s.get(r, c));
                }
            }
            rows.push(locs);
        }
        let mut ynws = Vec::new();
        for (q, w) in s.ynws().iter().enumerate() {
            let mut locs = Vec::new();
            for (k, v) in w.above.iter().enumerate() {
                cells.insert(Loc::Above(q, k), *v);
                locs.push(Loc::Above(q, k));
            }
            locs.extend(w.rows.clone().map(|r| Loc::Grid(r, w.column)));
            for (k, v) in w.below.iter().enumerate() {
                cells.insert(Loc::Below(q, k), *v);
                locs.push(Loc::Below(q, k));
            }
            ynws.push(locs);
        }
        Self { cells, rows, ynws }
    }

    /// Rotates one wire; `None` when a stored bit would fall off.
    pub fn rotate(&mut self, locs: &[Loc], towards_start: bool) -> Option<()> {
        let mut vals: Vec<Slot> = locs.iter().map(|l| self.cells[l]).collect();
        let lead = if towards_start { vals[0] } else { vals[vals.len() - 1] };
        if lead.is_some() {
            return None;
        }
        if towards_start {
            vals.rotate_left(1);
        } else {
            vals.rotate_right(1);
        }
        for (l, v) in locs.iter().zip(vals) {
            self.cells.insert(*l, v);
        }
        Some(())
    }

    pub fn matches(&self, s: &ArrayState) -> bool {
        self.cells.iter().all(|(l, v)| {
            *v == match *l {
                Loc::Grid(r, c) => s.get(r, c),
                Loc::Above(q, k) => s.ynws()[q].above[k],
                Loc::Below(q, k) => s.ynws()[q].below[k],
            }
        })
    }
}

pub fn random_state(rng: &mut ChaCha8Rng) -> ArrayState {
    let rows = rng.gen_range(1..=8);
    let data = rng.gen_range(1..=16);
    let pad = rng.gen_range(0..=3);
    let mut s = ArrayState::new(rows, data, pad).unwrap();
    for r in 0..rows {
        for c in 0..s.cols() {
            let v = match rng.gen_range(0..3) {
                0 => None,
                1 => Some(false),
                _ => Some(true),
            };
            s.set(r, c, v);
        }
    }
    let mut used = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        let c = rng.gen_range(0..s.cols());
        if used.contains(&c) {
            continue;
        }
        used.push(c);
        let r0 = rng.gen_range(0..rows);
        let r1 = rng.gen_range(r0 + 1..=rows);
        s.add_ynw(c, r0..r1, rng.gen_range(0..3), rng.gen_range(0..3)).unwrap();
    }
    s
}

pub fn count(s: &ArrayState) -> (usize, usize) {
    let b = s.bits();
    (b.iter().filter(|v| **v).count(), b.iter().filter(|v| !**v).count())
}

/// Runs random lossless shift sequences against the rotation oracle and
/// returns the applied and refused shift counts, or the first disagreement.
pub fn rotation_sequences(sequences: usize, seed: u64) -> Result<(usize, usize), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut applied, mut refused) = (0usize, 0usize);
    for n in 0..sequences {
        let mut s = random_state(&mut rng);
        let mut oracle = Oracle::of(&s);
        let before = count(&s);
        for _ in 0..rng.gen_range(1..=12) {
            let use_y = !s.ynws().is_empty() && rng.gen_bool(0.4);
            let (res, locs, towards) = if use_y {
                let y = rng.gen_range(0..s.ynws().len());
                let up = rng.gen_bool(0.5);
                let d = if up { Direction::Up } else { Direction::Down };
                (shift_y(&s, y, d), vec![oracle.ynws[y].clone()], up)
            } else {
                let left = rng.gen_bool(0.5);
                let d = if left { Direction::Left } else { Direction::Right };
                if rng.gen_bool(0.5) {
                    (shift_x(&s, d, &Rows::All), oracle.rows.clone(), left)
                } else {
                    let r = rng.gen_range(0..s.rows());
                    (shift_x(&s, d, &Rows::Subset(vec![r])), vec![oracle.rows[r].clone()], left)
                }
            };
            let mut trial = Oracle { cells: oracle.cells.clone(), rows: oracle.rows.clone(), ynws: oracle.ynws.clone() };
            let ok = locs.iter().all(|l| trial.rotate(l, towards).is_some());
            match res {
                Ok(next) => {
                    if !ok {
                        return Err(format!("sequence {n}: model shifted where the oracle overflows"));
                    }
                    oracle = trial;
                    s = next;
                    applied += 1;
                }
                Err(Error::Overflow(_)) => {
                    if ok {
                        return Err(format!("sequence {n}: model refused a safe shift"));
                    }
                    refused += 1;
                }
                Err(e) => return Err(format!("sequence {n}: {e}")),
            }
            if !oracle.matches(&s) {
                return Err(format!("sequence {n}: state differs from the oracle"));
            }
            if count(&s) != before {
                return Err(format!("sequence {n}: bit counts changed"));
            }
        }
    }
    Ok((applied, refused))
}
