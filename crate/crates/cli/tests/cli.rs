use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use xdwm_cli::{Experiment, RunConfig};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn xdwm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xdwm"))
        .args(args)
        .current_dir(root())
        .output()
        .unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_string_lossy().into_owned()
}

/// File contents without the timestamp line.
fn stable_text(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("# generated"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn error_record(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn leakage_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let o = xdwm(&["--config", "configs/leakage.toml", "--out", &out_arg(tmp.path()), "--golden", "goldens/v1/leakage"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tmp.path().join("leakage_r_off.svg").exists());
}

#[test]
fn array_replay_matches_golden() {
    let tmp = tempfile::tempdir().unwrap();
    let o = xdwm(&[
        "--config",
        "configs/array-replay.toml",
        "--out",
        &out_arg(tmp.path()),
        "--golden",
        "goldens/v1/array-replay",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn value_off_by_twice_the_tolerance_is_a_mismatch() {
    let golden = tempfile::tempdir().unwrap();
    let src = root().join("goldens/v1/leakage");
    for f in ["leakage.csv", "leakage_r_off.csv", "tolerances.toml"] {
        std::fs::copy(src.join(f), golden.path().join(f)).unwrap();
    }
    let path = golden.path().join("leakage.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let line = text.lines().find(|l| l.starts_with("8w-1y,8,1,shift_one")).unwrap();
    let pct: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
    let off = format!("{:.9e}", pct * (1.0 + 2e-6));
    let bad = line.rsplit_once(',').unwrap().0.to_string() + "," + &off;
    std::fs::write(&path, text.replace(line, &bad)).unwrap();

    let tmp = tempfile::tempdir().unwrap();
    let o = xdwm(&[
        "leakage",
        "--out",
        &out_arg(tmp.path()),
        "--config",
        "configs/leakage.toml",
        "--golden",
        &out_arg(golden.path()),
    ]);
    assert_eq!(o.status.code(), Some(4));
    let rec = error_record(&o);
    assert_eq!(rec["error"], "GoldenMismatch");
    let msgs = rec["messages"].as_array().unwrap();
    assert_eq!(msgs.len(), 1, "{msgs:?}");
    assert!(msgs[0].as_str().unwrap().contains("column percent"));
    assert!(tmp.path().join("error.json").exists());
}

#[test]
fn empty_config_is_invalid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("empty.toml");
    std::fs::write(&cfg, "").unwrap();
    let o = xdwm(&["--config", &out_arg(&cfg), "--out", &out_arg(&tmp.path().join("out"))]);
    assert_eq!(o.status.code(), Some(2));
    let rec = error_record(&o);
    assert_eq!(rec["error"], "ConfigInvalid");
    assert!(rec["messages"][0].as_str().unwrap().starts_with("experiment:"));
}

#[test]
fn field_level_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "experiment = \"velocity\"\n[velocity.run]\nduraton = \"1ns\"\n").unwrap();
    let o = xdwm(&["--config", &out_arg(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_record(&o)["messages"][0], "velocity.run.duraton: unknown field");

    std::fs::write(&cfg, "experiment = \"velocity\"\n[velocity]\ndensities = []\n[material]\nalpha = -1.0\n").unwrap();
    let o = xdwm(&["--config", &out_arg(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    let msgs = error_record(&o)["messages"].clone();
    let text = msgs.to_string();
    assert!(text.contains("material:") && text.contains("velocity.densities:"), "{text}");

    let o = xdwm(&["leakage", "--config", "configs/relax.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiment_errors_exit_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("replay.toml");
    // The port of row 0 faces a vacant domain after this shift.
    std::fs::write(&cfg, "experiment = \"array-replay\"\narray_replay.script = \"shift_x right all\\nread 0 0\"\n").unwrap();
    let out = tmp.path().join("out");
    let o = xdwm(&["--config", &out_arg(&cfg), "--out", &out_arg(&out)]);
    assert_eq!(o.status.code(), Some(3));
    let rec: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(rec["error"], "ExperimentFailed");
}

#[test]
fn reruns_are_byte_identical_but_for_the_timestamp() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (dir, extra) in [(&a, "--serial"), (&b, "--workers=3")] {
        let o = xdwm(&["array-replay", "--seed", "11", "--out", &out_arg(dir.path()), extra]);
        assert!(o.status.success());
        let o = xdwm(&["leakage", "--out", &out_arg(&dir.path().join("leak")), extra]);
        assert!(o.status.success());
    }
    for f in ["replay.csv", "reads.csv", "leak/leakage.csv", "leak/leakage_r_off.csv", "leak/leakage_r_off.svg"] {
        assert_eq!(stable_text(&a.path().join(f)), stable_text(&b.path().join(f)), "{f}");
    }
    let o = xdwm(&["array-replay", "--seed", "12", "--out", &out_arg(c.path())]);
    assert!(o.status.success());
    assert_ne!(stable_text(&a.path().join("replay.csv")), stable_text(&c.path().join("replay.csv")));
}

#[test]
fn outputs_embed_the_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let o = xdwm(&["relax", "--config", "configs/relax.toml", "--out", &out_arg(tmp.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["relax_summary.csv", "relax_state.csv"] {
        let text = std::fs::read_to_string(tmp.path().join(f)).unwrap();
        let line = text.lines().find(|l| l.starts_with("# config ")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&line["# config ".len()..]).unwrap();
        assert_eq!(v["experiment"], "relax");
        assert_eq!(v["relax"]["geometry"]["preset"], "notched_wire");
    }
    let svg = std::fs::read_to_string(tmp.path().join("relax_mz.svg")).unwrap();
    assert!(svg.contains("<desc>{&quot;") || svg.contains("<desc>{\""));
}

#[test]
fn config_units_and_sections() {
    let cfg = RunConfig::parse(
        r#"
        experiment = "stability-map"
        seed = 4
        [stability_map]
        lengths = { start = "50nm", end = "0.3um", step = "10 nm" }
        [fig3_demo.protocol]
        pulse = "500ps"
        "#,
    )
    .unwrap();
    assert_eq!(cfg.experiment, Some(Experiment::StabilityMap));
    assert_eq!(cfg.stability_map.lengths.values().len(), 26);
    assert!((cfg.fig3_demo.protocol.pulse - 0.5e-9).abs() < 1e-24);
    assert_eq!(cfg.probe().seed, 4);
    assert!(cfg.validate().is_empty());
    let resolved = cfg.resolved();
    assert!(resolved.get("stability_map").is_some() && resolved.get("fig3_demo").is_none());
}

#[test]
fn every_shipped_config_validates() {
    for e in Experiment::ALL {
        let path = root().join("configs").join(format!("{}.toml", e.name()));
        let cfg = RunConfig::load(&path).unwrap_or_else(|err| panic!("{}: {err}", path.display()));
        assert_eq!(cfg.experiment, Some(e));
        assert!(cfg.validate().is_empty(), "{}: {:?}", e.name(), cfg.validate());
    }
}

#[test]
fn book_config_example_validates() {
    let text = std::fs::read_to_string(root().join("book/src/cli.md")).unwrap();
    let block = text.split("```toml\n").nth(1).unwrap().split("```").next().unwrap();
    let cfg = RunConfig::parse(block).unwrap_or_else(|e| panic!("{e:?}"));
    assert_eq!(cfg.experiment, Some(Experiment::Velocity));
    assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
    assert_eq!(cfg.velocity.run.start, 80e-9);
    assert_eq!(cfg.velocity.densities, vec![0.8e12, 1.1e12]);
}
