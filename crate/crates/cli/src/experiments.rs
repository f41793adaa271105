//! Binds a resolved config to one experiment and collects its artifacts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use xdwm::array::{self, ArrayState, Slot};
use xdwm::dw::*;
use xdwm::geometry::Axis;
use xdwm::llg::SimState;
use xdwm::sneak::{leakage_analysis, r_off_sweep, BundleSpec, Drive, Scenario};

use crate::config::{Experiment, RunConfig, DEFAULT_SCRIPT};
use crate::error::CliError;
use crate::plot::{diverging, line_chart, Heatmap, Series, Style};
use crate::table::{num, Table};

/// One output file.
#[derive(Debug, Clone, PartialEq)]
pub enum Artifact {
    /// Table plus extra header comments.
    Csv(Table, Vec<String>),
    Svg { name: String, body: String },
}

impl Artifact {
    pub fn file_name(&self) -> String {
        match self {
            Artifact::Csv(t, _) => format!("{}.csv", t.name),
            Artifact::Svg { name, .. } => format!("{name}.svg"),
        }
    }
}

fn csv(t: Table) -> Artifact {
    Artifact::Csv(t, Vec::new())
}

fn svg(name: &str, body: String) -> Artifact {
    Artifact::Svg { name: name.into(), body }
}

fn bit(b: bool) -> char {
    if b {
        '1'
    } else {
        '0'
    }
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| bit(b)).collect()
}

fn slots(v: &[Slot]) -> String {
    v.iter().map(|s| s.map_or('.', bit)).collect()
}

/// Runs the configured experiment. `desc` is embedded in every plot.
pub fn run(cfg: &RunConfig, desc: &str) -> Result<Vec<Artifact>, CliError> {
    let exp = cfg
        .experiment
        .ok_or_else(|| CliError::ConfigInvalid(vec!["experiment: required".into()]))?;
    match exp {
        Experiment::Relax => relax(cfg, desc),
        Experiment::Velocity => velocity(cfg, desc),
        Experiment::ShiftWindow => shift_window(cfg, desc),
        Experiment::StabilityMap => stability(cfg, desc),
        Experiment::Fig3Demo => fig3(cfg, desc),
        Experiment::Leakage => leakage(cfg, desc),
        Experiment::ArrayReplay => array_replay(cfg),
    }
}

fn relax(cfg: &RunConfig, desc: &str) -> Result<Vec<Artifact>, CliError> {
    let ctx = cfg.context();
    let mesh = ctx.mesh(&cfg.relax.geometry.spec())?;
    let mut pattern = uniform_pattern(&mesh, cfg.relax.up);
    for (r, row) in cfg.relax.bits.iter().enumerate() {
        let w = mesh
            .wires
            .iter()
            .position(|w| w.axis == Axis::X && w.index == r)
            .ok_or_else(|| CliError::ExperimentFailed(format!("relax.bits: no X-NW row {r}")))?;
        set_wire_bits(&mut pattern, &mesh, w, row)?;
    }
    let mut state = SimState::new(pattern_field(&mesh, &pattern, ctx.wall_param()));
    let mut llg = ctx.integrator(&mesh)?;
    let report = llg.relax(&mut state)?;
    let e = llg.energies(&state);

    let mut cells = Table::new("relax_state", &["i", "j", "k", "mx", "my", "mz"]);
    let mut colors = vec![None; mesh.nx * mesh.ny];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in mesh.occupied_cells() {
        let (i, j, k) = mesh.coords(c);
        let m = state.m.get(c);
        cells.push(vec![i.to_string(), j.to_string(), k.to_string(), num(m.x), num(m.y), num(m.z)]);
        lo = lo.min(m.z);
        hi = hi.max(m.z);
        if k == 0 {
            colors[j * mesh.nx + i] = Some(diverging(m.z));
        }
    }
    let mut summary = Table::new(
        "relax_summary",
        &["steps", "torque", "time_ns", "e_exchange", "e_demag", "e_anisotropy", "e_total", "min_mz", "max_mz"],
    );
    summary.push(vec![
        report.steps.to_string(),
        num(report.torque),
        num(report.time * 1e9),
        num(e.exchange),
        num(e.demag),
        num(e.anisotropy),
        num(e.total()),
        num(lo),
        num(hi),
    ]);
    let map = Heatmap {
        title: "Relaxed m_z",
        x_label: &format!("x ({} nm cells)", mesh.cell.dx * 1e9),
        y_label: "y",
        nx: mesh.nx,
        ny: mesh.ny,
        colors,
        x_ticks: Vec::new(),
        y_ticks: Vec::new(),
        legend: vec![(diverging(1.0), "m_z = +1".into()), (diverging(-1.0), "m_z = -1".into())],
    };
    Ok(vec![csv(summary), csv(cells), svg("relax_mz", map.render(desc))])
}

fn velocity(cfg: &RunConfig, desc: &str) -> Result<Vec<Artifact>, CliError> {
    let ctx = cfg.context();
    let results = cfg
        .velocity
        .densities
        .par_iter()
        .map(|&j| measure_velocity(&ctx, &VelocityConfig { j, ..cfg.velocity.run }))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new("velocity", &["J", "v_sim", "v_analytic", "rel_err"]);
    let mut trace = Table::new("velocity_trace", &["J", "t_ns", "x_nm"]);
    for r in &results {
        t.push(vec![num(r.j), num(r.v), num(r.v_analytic), num(r.rel_err())]);
        for &(time, x) in &r.trace.samples {
            trace.push(vec![num(r.j), num(time * 1e9), num(x * 1e9)]);
        }
    }
    let j = t.column("J");
    let chart = line_chart(
        "Domain-wall velocity",
        "J (A/m²)",
        "v (m/s)",
        &[
            Series::new("simulated", &j, &t.column("v_sim"), Style::Both),
            Series::new("analytic", &j, &t.column("v_analytic"), Style::Line),
        ],
        desc,
    );
    Ok(vec![csv(t), csv(trace), svg("velocity", chart)])
}

fn shift_window(cfg: &RunConfig, desc: &str) -> Result<Vec<Artifact>, CliError> {
    let ctx = cfg.context();
    let sw = &cfg.shift_window;
    let mut t = Table::new("shift_window", &["case", "J", "outcome", "displacement_nm", "walls_found"]);
    let mut summary = Table::new(
        "shift_window_summary",
        &["case", "j_low", "j_high", "j_avg", "resolution", "monotone", "j_avg_vs_first_pct"],
    );
    let mut series = Vec::new();
    let mut first_avg = None;
    for case in &sw.cases {
        let spec = case.geometry.spec();
        let mesh = ctx.mesh(&spec)?;
        let seeded = seed_wall(&ctx, &mesh, 0, case.boundary)?;
        let points = case
            .densities
            .par_iter()
            .map(|&j| shift_trial(&ctx, &mesh, &seeded, case.boundary, j, &sw.protocol, spec.thickness))
            .collect::<Result<Vec<_>, _>>()?;
        for p in &points {
            t.push(vec![
                case.name.clone(),
                num(p.j),
                p.outcome.as_str().into(),
                num(p.displacement * 1e9),
                p.walls_found.to_string(),
            ]);
        }
        let js: Vec<f64> = points.iter().map(|p| p.j).collect();
        let ds: Vec<f64> = points.iter().map(|p| p.displacement * 1e9).collect();
        series.push(Series::new(&case.name, &js, &ds, Style::Both));
        match window_from_points(points) {
            Ok(w) => {
                let first = *first_avg.get_or_insert(w.j_avg());
                summary.push(vec![
                    case.name.clone(),
                    num(w.j_low),
                    num(w.j_high),
                    num(w.j_avg()),
                    num(w.resolution),
                    w.is_monotone().to_string(),
                    num(100.0 * (w.j_avg() / first - 1.0)),
                ]);
            }
            Err(xdwm::Error::NoWindow(_)) => {
                let none = || "none".to_string();
                summary.push(vec![case.name.clone(), none(), none(), none(), none(), none(), none()]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let chart = line_chart("Shift displacement after one pulse", "J (A/m²)", "displacement (nm)", &series, desc);
    Ok(vec![csv(t), csv(summary), svg("shift_window", chart)])
}

fn stability(cfg: &RunConfig, desc: &str) -> Result<Vec<Artifact>, CliError> {
    let ctx = cfg.context();
    let (lengths, widths) = (cfg.stability_map.lengths.values(), cfg.stability_map.widths.values());
    let map = stability_map(&ctx, &lengths, &widths, &cfg.probe())?;
    let mut t = Table::new(
        "stability_map",
        &["length_nm", "width_nm", "stable", "min_abs_mz", "reversed", "converged"],
    );
    let (stable_c, unstable_c, stuck_c) = ("#2ca02c", "#d62728", "#bbbbbb");
    let mut colors = Vec::with_capacity(map.points.len());
    for p in &map.points {
        t.push(vec![
            num(p.length * 1e9),
            num(p.width * 1e9),
            p.stable.to_string(),
            num(p.min_abs_mz),
            p.reversed.to_string(),
            p.converged.to_string(),
        ]);
        let c = match (p.converged, p.stable) {
            (false, _) => stuck_c,
            (true, true) => stable_c,
            (true, false) => unstable_c,
        };
        colors.push(Some(c.to_string()));
    }
    let every = lengths.len().div_ceil(10).max(1);
    let label = |k: usize, v: f64| if k % every == 0 { format!("{:.0}", v * 1e9) } else { String::new() };
    let heat = Heatmap {
        title: "Cross stability",
        x_label: "X-Cell length (nm)",
        y_label: "X-Cell width (nm)",
        nx: lengths.len(),
        ny: widths.len(),
        colors,
        x_ticks: lengths.iter().enumerate().map(|(k, &v)| label(k, v)).collect(),
        y_ticks: widths.iter().map(|w| format!("{:.0}", w * 1e9)).collect(),
        legend: vec![
            (stable_c.into(), "stable".into()),
            (unstable_c.into(), "unstable".into()),
            (stuck_c.into(), "not converged".into()),
        ],
    };
    Ok(vec![csv(t), svg("stability_map", heat.render(desc))])
}

fn fig3(cfg: &RunConfig, desc: &str) -> Result<Vec<Artifact>, CliError> {
    let ctx = cfg.context();
    let demo = &cfg.fig3_demo;
    let predicted = predict_demo(demo)?;
    let run = xdwm_shift_demo(&ctx, demo)?;
    let mut t = Table::new("fig3_bits", &["phase", "source", "line", "bits"]);
    for (source, snaps) in [("micromagnetic", &run.snapshots), ("model", &predicted)] {
        for s in snaps.iter() {
            for (r, row) in s.rows.iter().enumerate() {
                t.push(vec![s.phase.clone(), source.into(), format!("x{r}"), bits(row)]);
            }
            for (q, y) in s.ynws.iter().enumerate() {
                t.push(vec![s.phase.clone(), source.into(), format!("y{q}"), bits(y)]);
            }
        }
    }
    let mut summary = Table::new("fig3_summary", &["phase", "matches_model", "top_xcell", "residual_in_plane"]);
    for (k, s) in run.snapshots.iter().enumerate() {
        let residual = if k == 0 { f64::NAN } else { run.residual_in_plane.get(k - 1).copied().unwrap_or(f64::NAN) };
        summary.push(vec![
            s.phase.clone(),
            (predicted.get(k) == Some(s)).to_string(),
            bit(s.rows[0][demo.column]).to_string(),
            num(residual),
        ]);
    }
    let mut trace = Table::new(
        "fig3_trace",
        &["t_ns", "top_mx", "top_my", "top_mz", "bottom_mx", "bottom_my", "bottom_mz"],
    );
    for s in &run.trace {
        trace.push(vec![
            num(s.time * 1e9),
            num(s.top.x),
            num(s.top.y),
            num(s.top.z),
            num(s.bottom.x),
            num(s.bottom.y),
            num(s.bottom.z),
        ]);
    }
    let tt = trace.column("t_ns");
    let chart = line_chart(
        "X-Cell magnetization during the demo",
        "t (ns)",
        "average m_z",
        &[
            Series::new("top X-Cell", &tt, &trace.column("top_mz"), Style::Line),
            Series::new("bottom X-Cell", &tt, &trace.column("bottom_mz"), Style::Line),
        ],
        desc,
    );
    Ok(vec![csv(t), csv(summary), csv(trace), svg("fig3_trace", chart)])
}

fn electrical_note(spec: &BundleSpec) -> String {
    let drive = match spec.drive {
        Drive::Current(a) => format!("current {a:e} A"),
        Drive::Voltage(v) => format!("voltage {v:e} V"),
    };
    format!(
        "rho={:e} amr={} r_on={:e} r_off={:e} drive={drive}",
        spec.model.rho, spec.model.amr, spec.r_on, spec.r_off
    )
}

fn leakage(cfg: &RunConfig, desc: &str) -> Result<Vec<Artifact>, CliError> {
    let l = &cfg.leakage;
    let scenarios = [Scenario::ShiftOne, Scenario::ShiftAll];
    let mut t = Table::new(
        "leakage",
        &["case", "n_xnw", "n_y", "scenario", "max_leakage_a", "injected_a", "percent"],
    );
    for case in &l.cases {
        let spec = l.bundle(case);
        for sc in scenarios {
            let r = leakage_analysis(&spec, sc)?;
            let inj = r.injected.iter().map(|i| i.abs()).sum::<f64>() / r.injected.len().max(1) as f64;
            t.push(vec![
                case.name.clone(),
                case.n_xnw.to_string(),
                case.n_y.to_string(),
                sc.as_str().into(),
                num(r.max_leakage),
                num(inj),
                num(r.percent),
            ]);
        }
    }
    let first = l.bundle(&l.cases[0]);
    let notes = vec![electrical_note(&first)];
    let mut out = vec![Artifact::Csv(t, notes.clone())];
    if !l.r_off_sweep.is_empty() {
        let mut sweep = Table::new("leakage_r_off", &["case", "r_off", "scenario", "percent"]);
        let mut series = Vec::new();
        for sc in scenarios {
            let rows = r_off_sweep(&first, sc, &l.r_off_sweep)?;
            let (xs, ys): (Vec<f64>, Vec<f64>) = rows.iter().map(|(r, rep)| (r.log10(), rep.percent)).unzip();
            for (r, rep) in &rows {
                sweep.push(vec![l.cases[0].name.clone(), num(*r), sc.as_str().into(), num(rep.percent)]);
            }
            series.push(Series::new(sc.as_str(), &xs, &ys, Style::Both));
        }
        let chart = line_chart("Sneak leakage against off resistance", "log10 R_off (Ω)", "leakage (%)", &series, desc);
        out.push(Artifact::Csv(sweep, notes));
        out.push(svg("leakage_r_off", chart));
    }
    Ok(out)
}

fn initial_array(cfg: &RunConfig) -> Result<ArrayState, CliError> {
    let a = &cfg.array_replay;
    let read = |p: &std::path::Path| {
        std::fs::read_to_string(p).map_err(|e| CliError::ExperimentFailed(format!("{}: {e}", p.display())))
    };
    let text = match (&a.grid, &a.grid_file) {
        (Some(g), _) => Some(g.clone()),
        (None, Some(p)) => Some(read(p)?),
        (None, None) => None,
    };
    if let Some(text) = text {
        return Ok(array::parse_grid(&text)?);
    }
    let r = a.random;
    let mut s = ArrayState::new(r.rows, r.cols, r.padding)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for row in 0..r.rows {
        for c in r.padding..r.padding + r.cols {
            s.set(row, c, Some(rng.gen()));
        }
    }
    Ok(s)
}

fn array_replay(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let a = &cfg.array_replay;
    let initial = initial_array(cfg)?;
    let text = match (&a.script, &a.script_file) {
        (Some(s), _) => s.clone(),
        (None, Some(p)) => {
            std::fs::read_to_string(p).map_err(|e| CliError::ExperimentFailed(format!("{}: {e}", p.display())))?
        }
        (None, None) => DEFAULT_SCRIPT.to_string(),
    };
    let script = array::parse_script(&text)?;
    let out = array::replay(&initial, &script)?;
    let mut t = Table::new("replay", &["step", "command", "rows", "ynws"]);
    let line = |s: &ArrayState| {
        let rows: Vec<String> = s.grid().iter().map(|r| slots(r)).collect();
        let ynws: Vec<String> = (0..s.ynws().len()).map(|y| slots(&s.ynw_values(y))).collect();
        (rows.join("/"), ynws.join("/"))
    };
    let (r0, y0) = line(&initial);
    t.push(vec!["0".into(), "initial".into(), r0, y0]);
    for (k, (c, s)) in script.iter().zip(&out.states).enumerate() {
        let (r, y) = line(s);
        t.push(vec![(k + 1).to_string(), format!("{c:?}"), r, y]);
    }
    let mut reads = Table::new("reads", &["read", "value"]);
    for (k, &b) in out.reads.iter().enumerate() {
        reads.push(vec![k.to_string(), bit(b).to_string()]);
    }
    Ok(vec![csv(t), csv(reads)])
}
