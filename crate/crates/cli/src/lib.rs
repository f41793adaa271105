//! Experiment runner behind the `xdwm` binary.

pub mod config;
pub mod error;
pub mod experiments;
pub mod golden;
pub mod plot;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub use config::{Experiment, RunConfig};
pub use error::CliError;
pub use experiments::{run, Artifact};

/// Header lines of every CSV. Only the second one changes between reruns.
pub fn header_lines(cfg: &RunConfig) -> Vec<String> {
    let exp = cfg.experiment.map_or("none", |e| e.name());
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    vec![
        format!("xdwm-cli {} experiment={exp}", env!("CARGO_PKG_VERSION")),
        format!("generated unix={now}"),
        format!("config {}", cfg.resolved()),
    ]
}

/// Writes every artifact into `dir` and returns the paths in order.
pub fn write_artifacts(dir: &Path, cfg: &RunConfig, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let header = header_lines(cfg);
    let mut paths = Vec::new();
    for a in artifacts {
        let path = dir.join(a.file_name());
        match a {
            Artifact::Csv(t, notes) => {
                let mut lines = header.clone();
                lines.extend(notes.iter().cloned());
                t.write(&path, &lines)?;
            }
            Artifact::Svg { body, .. } => {
                std::fs::write(&path, body).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?
            }
        }
        paths.push(path);
    }
    Ok(paths)
}
