use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use xdwm_cli::golden::compare_golden;
use xdwm_cli::{run, write_artifacts, CliError, Experiment, RunConfig};

/// Runs one xdwm experiment and writes its CSV tables and SVG plots.
#[derive(Debug, Parser)]
#[command(name = "xdwm", version)]
struct Args {
    /// Experiment to run; overrides nothing if the config names the same one.
    experiment: Option<Experiment>,
    /// TOML run config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: out/<experiment>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run sweep points one at a time.
    #[arg(long, conflicts_with = "workers")]
    serial: bool,
    /// Worker threads for sweep points [default: all cores].
    #[arg(long)]
    workers: Option<usize>,
    /// Seed for randomized inputs.
    #[arg(long)]
    seed: Option<u64>,
    /// Compare the outputs with the goldens in this directory.
    #[arg(long)]
    golden: Option<PathBuf>,
}

fn resolve(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    match (cfg.experiment, args.experiment) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::ConfigInvalid(vec![format!(
                "experiment: config names {}, command line names {}",
                a.name(),
                b.name()
            )]))
        }
        (None, Some(b)) => cfg.experiment = Some(b),
        _ => {}
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    if args.workers == Some(0) {
        return Err(CliError::ConfigInvalid(vec!["--workers: must be >= 1".into()]));
    }
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(CliError::ConfigInvalid(errs));
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.experiment.map_or("run", |e| e.name())))
}

fn execute(args: &Args, cfg: &RunConfig) -> Result<(), CliError> {
    let threads = if args.serial { 1 } else { args.workers.unwrap_or(0) };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::ExperimentFailed(e.to_string()))?;
    let desc = cfg.resolved().to_string();
    let artifacts = pool.install(|| run(cfg, &desc))?;
    let dir = out_dir(cfg);
    for p in write_artifacts(&dir, cfg, &artifacts)? {
        println!("wrote {}", p.display());
    }
    if let Some(g) = &args.golden {
        let report = compare_golden(&dir, g)?;
        if !report.mismatches.is_empty() {
            return Err(CliError::GoldenMismatch(report.mismatches));
        }
        println!("golden: {} files, {} cells match", report.files, report.cells);
    }
    Ok(())
}

fn fail(e: &CliError, dir: Option<PathBuf>) -> ExitCode {
    let record = serde_json::to_string(&e.record()).expect("error record serializes");
    if let Some(d) = dir {
        if std::fs::create_dir_all(&d).is_ok() {
            let _ = std::fs::write(d.join("error.json"), format!("{record}\n"));
        }
    }
    eprintln!("{record}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match resolve(&args) {
        Ok(c) => c,
        Err(e) => return fail(&e, args.out.clone()),
    };
    match execute(&args, &cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e, Some(out_dir(&cfg))),
    }
}
