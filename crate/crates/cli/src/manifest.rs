//! Sidecar `<artifact>.manifest` files recording how an artifact was made.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<PathBuf>,
    pub seed: u64,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub version: String,
    pub started: u64,
    pub finished: u64,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// `v<crate version>` plus `git describe` output when run inside a checkout.
pub fn version_string() -> String {
    let base = format!("v{}", env!("CARGO_PKG_VERSION"));
    let described = Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    match described {
        Some(d) => format!("{base}-{d}"),
        None => base,
    }
}

impl RunManifest {
    pub fn start(command: &str, config: Option<&Path>, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            config: config.map(Path::to_path_buf),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            version: version_string(),
            started: unix_now(),
            finished: 0,
        }
    }

    pub fn render(&self) -> String {
        let join = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(";");
        format!(
            "command = {}\nconfig = {}\nseed = {}\ninputs = {}\noutputs = {}\nversion = {}\nstarted_unix = {}\nfinished_unix = {}\n",
            self.command,
            self.config.as_ref().map_or("none".to_string(), |p| p.display().to_string()),
            self.seed,
            join(&self.inputs),
            join(&self.outputs),
            self.version,
            self.started,
            self.finished
        )
    }

    /// Writes `<output>.manifest` next to every output.
    pub fn finish(mut self) -> std::io::Result<()> {
        self.finished = unix_now();
        let text = self.render();
        for out in &self.outputs {
            let mut name = out.as_os_str().to_owned();
            name.push(".manifest");
            std::fs::write(PathBuf::from(name), &text)?;
        }
        Ok(())
    }
}
