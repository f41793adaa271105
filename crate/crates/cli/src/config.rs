//! Run configuration: a TOML file with SI numbers, where lengths and times
//! may also be written as strings with a unit suffix (`"80nm"`, `"1.5 ns"`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xdwm::dw::{DemoConfig, DwContext, ShiftProtocol, StabilityProbe, VelocityConfig};
use xdwm::llg::SolverConfig;
use xdwm::sneak::{BundleSpec, DEFAULT_R_OFF};
use xdwm::{CellSize, DemagMode, GeometrySpec, MaterialParams, PhysicalConstants, YWireSpec};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Relax,
    Velocity,
    ShiftWindow,
    StabilityMap,
    Fig3Demo,
    Leakage,
    ArrayReplay,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Relax,
        Experiment::Velocity,
        Experiment::ShiftWindow,
        Experiment::StabilityMap,
        Experiment::Fig3Demo,
        Experiment::Leakage,
        Experiment::ArrayReplay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Relax => "relax",
            Experiment::Velocity => "velocity",
            Experiment::ShiftWindow => "shift-window",
            Experiment::StabilityMap => "stability-map",
            Experiment::Fig3Demo => "fig3-demo",
            Experiment::Leakage => "leakage",
            Experiment::ArrayReplay => "array-replay",
        }
    }

    /// Config table holding this experiment's settings.
    pub fn section(self) -> &'static str {
        match self {
            Experiment::Relax => "relax",
            Experiment::Velocity => "velocity",
            Experiment::ShiftWindow => "shift_window",
            Experiment::StabilityMap => "stability_map",
            Experiment::Fig3Demo => "fig3_demo",
            Experiment::Leakage => "leakage",
            Experiment::ArrayReplay => "array_replay",
        }
    }
}

/// A device layout by preset name, or spelled out in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum GeometryRef {
    PlainWire { domains: usize },
    NotchedWire { domains: usize },
    CrossOverlay { domains: usize, column: usize },
    Bundle { rows: usize, domains: usize, columns: Vec<usize> },
    IsolatedCross { length: f64, width: f64 },
    Custom { spec: GeometrySpec },
}

impl GeometryRef {
    pub fn spec(&self) -> GeometrySpec {
        match self {
            GeometryRef::PlainWire { domains } => GeometrySpec::plain_wire(*domains),
            GeometryRef::NotchedWire { domains } => GeometrySpec::notched_wire(*domains),
            GeometryRef::CrossOverlay { domains, column } => GeometrySpec::cross_overlay(*domains, YWireSpec::at(*column)),
            GeometryRef::Bundle { rows, domains, columns } => {
                GeometrySpec::bundle(*rows, *domains, columns.iter().map(|&c| YWireSpec::at(c)).collect())
            }
            GeometryRef::IsolatedCross { length, width } => GeometrySpec::isolated_cross(*length, *width),
            GeometryRef::Custom { spec } => spec.clone(),
        }
    }
}

/// `start, start + step, …, end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        xdwm::dw::range_inclusive(self.start, self.end, self.step)
    }

    fn check(&self, what: &str, errs: &mut Vec<String>) {
        if !(self.step > 0.0 && self.start > 0.0 && self.end >= self.start) {
            errs.push(format!("{what}: need 0 < start <= end and step > 0"));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelaxSection {
    pub geometry: GeometryRef,
    /// Direction of every domain not listed in `bits`.
    pub up: bool,
    /// Domain signs per X-NW, top row first.
    pub bits: Vec<Vec<bool>>,
}

impl Default for RelaxSection {
    fn default() -> Self {
        Self {
            geometry: GeometryRef::NotchedWire { domains: 4 },
            up: true,
            bits: vec![vec![true, false, false, true]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VelocitySection {
    /// Current densities, A/m².
    pub densities: Vec<f64>,
    /// Everything but the density.
    pub run: VelocityConfig,
}

impl Default for VelocitySection {
    fn default() -> Self {
        Self {
            densities: vec![1.1e12],
            run: VelocityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowCase {
    pub name: String,
    pub geometry: GeometryRef,
    /// Domain boundary the wall starts on.
    #[serde(default = "one")]
    pub boundary: usize,
    /// Ascending current densities, A/m².
    pub densities: Vec<f64>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShiftWindowSection {
    pub protocol: ShiftProtocol,
    pub cases: Vec<WindowCase>,
}

impl Default for ShiftWindowSection {
    fn default() -> Self {
        Self {
            protocol: ShiftProtocol {
                pre_delay: 0.0,
                ..ShiftProtocol::default()
            },
            cases: vec![
                WindowCase {
                    name: "plain".into(),
                    geometry: GeometryRef::NotchedWire { domains: 4 },
                    boundary: 1,
                    densities: vec![0.8e12, 1.0e12, 1.2e12, 1.4e12, 1.6e12],
                },
                WindowCase {
                    name: "xcell".into(),
                    geometry: GeometryRef::CrossOverlay { domains: 4, column: 1 },
                    boundary: 1,
                    densities: vec![1.4e12, 1.6e12, 1.8e12, 2.0e12],
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StabilitySection {
    pub lengths: Sweep,
    pub widths: Sweep,
    /// Threshold and kick size; the kick seed comes from the run seed.
    pub threshold: f64,
    pub tilt: f64,
}

impl Default for StabilitySection {
    fn default() -> Self {
        let probe = StabilityProbe::default();
        Self {
            lengths: Sweep { start: 50e-9, end: 300e-9, step: 10e-9 },
            widths: Sweep { start: 40e-9, end: 110e-9, step: 10e-9 },
            threshold: probe.threshold,
            tilt: probe.tilt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageCase {
    pub name: String,
    pub n_xnw: usize,
    /// Number of Y-NWs, spread over the interior columns.
    pub n_y: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LeakageSection {
    pub cases: Vec<LeakageCase>,
    pub r_on: f64,
    pub r_off: f64,
    /// Extra off resistances swept on the first case, Ω.
    pub r_off_sweep: Vec<f64>,
}

impl Default for LeakageSection {
    fn default() -> Self {
        let case = |name: &str, n_xnw, n_y| LeakageCase { name: name.into(), n_xnw, n_y };
        Self {
            cases: vec![case("8w-1y", 8, 1), case("32w-1y", 32, 1), case("32w-7y", 32, 7)],
            r_on: xdwm::sneak::DEFAULT_R_ON,
            r_off: DEFAULT_R_OFF,
            r_off_sweep: vec![1e4, 3e4, 1e5, 3e5, 1e6, 1e7],
        }
    }
}

impl LeakageSection {
    pub fn bundle(&self, case: &LeakageCase) -> BundleSpec {
        BundleSpec {
            r_on: self.r_on,
            r_off: self.r_off,
            ..BundleSpec::scaled(case.n_xnw, case.n_y)
        }
    }
}

pub const DEFAULT_SCRIPT: &str = "read 0 0\nshift_x left all\nread 0 0\nshift_x right 1,2\nread 1 0\n";

/// Random array used when no grid is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomArray {
    pub rows: usize,
    pub cols: usize,
    pub padding: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArraySection {
    /// Grid text in the `xdwm-array v1` format.
    pub grid: Option<String>,
    pub grid_file: Option<PathBuf>,
    pub random: RandomArray,
    /// Command script; [`DEFAULT_SCRIPT`] when neither this nor
    /// `script_file` is set.
    pub script: Option<String>,
    pub script_file: Option<PathBuf>,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self {
            grid: None,
            grid_file: None,
            random: RandomArray { rows: 4, cols: 8, padding: 2 },
            script: None,
            script_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub material: MaterialParams,
    pub solver: SolverConfig,
    pub demag: DemagMode,
    pub cell: CellSize,
    pub relax: RelaxSection,
    pub velocity: VelocitySection,
    pub shift_window: ShiftWindowSection,
    pub stability_map: StabilitySection,
    pub fig3_demo: DemoConfig,
    pub leakage: LeakageSection,
    pub array_replay: ArraySection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ctx = DwContext::default();
        Self {
            experiment: None,
            seed: 0,
            out: None,
            material: ctx.params,
            solver: ctx.solver,
            demag: ctx.demag,
            cell: ctx.cell,
            relax: RelaxSection::default(),
            velocity: VelocitySection::default(),
            shift_window: ShiftWindowSection::default(),
            stability_map: StabilitySection::default(),
            fig3_demo: DemoConfig::default(),
            leakage: LeakageSection::default(),
            array_replay: ArraySection::default(),
        }
    }
}

/// Power of ten of a length or time unit.
fn unit_exponent(unit: &str) -> Option<i32> {
    Some(match unit {
        "m" | "s" => 0,
        "mm" | "ms" => -3,
        "um" | "µm" | "us" | "µs" => -6,
        "nm" | "ns" => -9,
        "pm" | "ps" => -12,
        "fs" => -15,
        _ => return None,
    })
}

/// `"80nm"` → 8e-8. Anything else is left alone. The unit only shifts the
/// decimal exponent, so `"1.5ns"` reads exactly as `1.5e-9`.
pub fn parse_quantity(s: &str) -> Option<f64> {
    let s = s.trim();
    let split = s.find(|c: char| c.is_alphabetic() && c != 'e' && c != 'E')?;
    let (num, unit) = s.split_at(split);
    let shift = unit_exponent(unit.trim())?;
    let num = num.trim();
    num.parse::<f64>().ok()?;
    let (mantissa, exp) = num.split_once(['e', 'E']).unwrap_or((num, "0"));
    let exp: i32 = exp.parse().ok()?;
    format!("{mantissa}e{}", exp + shift).parse().ok()
}

fn convert_units(v: &mut toml::Value) {
    match v {
        toml::Value::String(s) => {
            if let Some(x) = parse_quantity(s) {
                *v = toml::Value::Float(x);
            }
        }
        toml::Value::Array(a) => a.iter_mut().for_each(convert_units),
        toml::Value::Table(t) => t.iter_mut().for_each(|(_, x)| convert_units(x)),
        _ => {}
    }
}

/// Input keys that did not survive deserialization.
fn unknown_keys(input: &toml::Value, resolved: &toml::Value, path: &str, out: &mut Vec<String>) {
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match (input, resolved) {
        (toml::Value::Table(a), toml::Value::Table(b)) => {
            for (k, v) in a {
                match b.get(k) {
                    Some(w) => unknown_keys(v, w, &join(k), out),
                    None => out.push(format!("{}: unknown field", join(k))),
                }
            }
        }
        (toml::Value::Array(a), toml::Value::Array(b)) if a.len() == b.len() => {
            for (i, (v, w)) in a.iter().zip(b).enumerate() {
                unknown_keys(v, w, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut value: toml::Value = toml::from_str::<toml::Table>(text)
            .map(toml::Value::Table)
            .map_err(|e| CliError::ConfigInvalid(vec![e.to_string().trim().to_string()]))?;
        convert_units(&mut value);
        let cfg: RunConfig = value
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| CliError::ConfigInvalid(vec![e.to_string().trim().to_string()]))?;
        let resolved = toml::Value::try_from(&cfg).map_err(|e| CliError::ConfigInvalid(vec![e.to_string()]))?;
        let mut errs = Vec::new();
        unknown_keys(&value, &resolved, "", &mut errs);
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(CliError::ConfigInvalid(errs))
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigInvalid(vec![format!("config: cannot read {}: {e}", path.display())]))?;
        let mut cfg = Self::parse(&text)?;
        // Relative script and grid paths are relative to the config file.
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.array_replay.grid_file, &mut cfg.array_replay.script_file].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn context(&self) -> DwContext {
        DwContext {
            params: self.material,
            consts: PhysicalConstants::SI,
            solver: self.solver,
            demag: self.demag,
            cell: self.cell,
            ..DwContext::default()
        }
    }

    pub fn probe(&self) -> StabilityProbe {
        StabilityProbe {
            threshold: self.stability_map.threshold,
            tilt: self.stability_map.tilt,
            seed: self.seed,
        }
    }

    /// Field-level problems, empty when the config can run.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let Some(exp) = self.experiment else {
            let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
            errs.push(format!("experiment: required, one of {}", names.join(", ")));
            return errs;
        };
        if let Err(e) = self.material.validate() {
            errs.push(format!("material: {e}"));
        }
        if let Err(e) = self.solver.validate() {
            errs.push(format!("solver: {e}"));
        }
        if !(self.cell.dx > 0.0 && self.cell.dy > 0.0 && self.cell.dz > 0.0) {
            errs.push("cell: edge lengths must be > 0".into());
        }
        let ascending = |v: &[f64]| !v.is_empty() && v.iter().all(|x| x.is_finite()) && v.windows(2).all(|w| w[1] > w[0]);
        match exp {
            Experiment::Relax => {
                let spec = self.relax.geometry.spec();
                if let Err(e) = spec.validate() {
                    errs.push(format!("relax.geometry: {e}"));
                }
            }
            Experiment::Velocity => {
                if !ascending(&self.velocity.densities) {
                    errs.push("velocity.densities: need at least one finite density, ascending".into());
                }
                let r = &self.velocity.run;
                if !(r.duration > 0.0 && r.sample_every > 0.0 && (0.0..1.0).contains(&r.discard)) {
                    errs.push("velocity.run: need duration > 0, sample_every > 0, 0 <= discard < 1".into());
                }
            }
            Experiment::ShiftWindow => {
                if let Err(e) = self.shift_window.protocol.validate() {
                    errs.push(format!("shift_window.protocol: {e}"));
                }
                if self.shift_window.cases.is_empty() {
                    errs.push("shift_window.cases: need at least one case".into());
                }
                for (i, c) in self.shift_window.cases.iter().enumerate() {
                    if !ascending(&c.densities) {
                        errs.push(format!("shift_window.cases[{i}].densities: need ascending finite densities"));
                    }
                    if let Err(e) = c.geometry.spec().validate() {
                        errs.push(format!("shift_window.cases[{i}].geometry: {e}"));
                    }
                }
            }
            Experiment::StabilityMap => {
                self.stability_map.lengths.check("stability_map.lengths", &mut errs);
                self.stability_map.widths.check("stability_map.widths", &mut errs);
                if !(0.0..1.0).contains(&self.stability_map.threshold) {
                    errs.push("stability_map.threshold: must lie in [0, 1)".into());
                }
            }
            Experiment::Fig3Demo => {
                let d = &self.fig3_demo;
                if d.initial.len() < 2 || d.initial.iter().any(|r| r.len() != d.domains) {
                    errs.push("fig3_demo.initial: need two or more rows of `domains` bits".into());
                }
                if d.column >= d.domains {
                    errs.push("fig3_demo.column: must be below domains".into());
                }
                if let Err(e) = d.protocol.validate() {
                    errs.push(format!("fig3_demo.protocol: {e}"));
                }
            }
            Experiment::Leakage => {
                let l = &self.leakage;
                if l.cases.is_empty() {
                    errs.push("leakage.cases: need at least one case".into());
                }
                for (i, c) in l.cases.iter().enumerate() {
                    if let Err(e) = l.bundle(c).validate() {
                        errs.push(format!("leakage.cases[{i}]: {e}"));
                    }
                }
                if l.r_off_sweep.iter().any(|r| !(*r > 0.0)) {
                    errs.push("leakage.r_off_sweep: resistances must be > 0".into());
                }
            }
            Experiment::ArrayReplay => {
                let a = &self.array_replay;
                if a.grid.is_some() && a.grid_file.is_some() {
                    errs.push("array_replay: give grid or grid_file, not both".into());
                }
                if a.script.is_some() && a.script_file.is_some() {
                    errs.push("array_replay: give script or script_file, not both".into());
                }
                if a.grid.is_none() && a.grid_file.is_none() && (a.random.rows == 0 || a.random.cols == 0) {
                    errs.push("array_replay.random: rows and cols must be >= 1".into());
                }
            }
        }
        errs
    }

    /// The settings that shaped a run: shared fields plus the active
    /// experiment's table.
    pub fn resolved(&self) -> serde_json::Value {
        let full = serde_json::to_value(self).expect("config serializes");
        let mut out = serde_json::Map::new();
        for key in ["experiment", "seed", "material", "solver", "demag", "cell"] {
            out.insert(key.to_string(), full[key].clone());
        }
        if let Some(exp) = self.experiment {
            out.insert(exp.section().to_string(), full[exp.section()].clone());
        }
        serde_json::Value::Object(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantities() {
        assert_eq!(parse_quantity("80nm"), Some(80e-9));
        assert_eq!(parse_quantity("1.5 ns"), Some(1.5e-9));
        assert_eq!(parse_quantity("2e-3 um"), Some(2e-9));
        assert_eq!(parse_quantity("notched_wire"), None);
        assert_eq!(parse_quantity("12"), None);
        assert_eq!(parse_quantity("3 parsecs"), None);
    }
}
