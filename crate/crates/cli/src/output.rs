use std::path::{Path, PathBuf};
use std::time::Instant;

use irkwave::problems::reproduce::Check;
use serde::Serialize;

/// Where command results go: files under `--output-dir`, or stdout when none is given.
pub struct Output {
    dir: Option<PathBuf>,
    command: Vec<String>,
    config: Option<serde_json::Value>,
    artifacts: Vec<String>,
    checks: Vec<Check>,
    started: Instant,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a serde_json::Value>,
    artifacts: &'a [String],
    version: &'static str,
    wall_time_s: f64,
    checks: &'a [Check],
}

impl Output {
    pub fn new(dir: Option<PathBuf>) -> std::io::Result<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self {
            dir,
            command: std::env::args().collect(),
            config: None,
            artifacts: Vec::new(),
            checks: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn has_dir(&self) -> bool {
        self.dir.is_some()
    }

    pub fn set_config(&mut self, v: serde_json::Value) {
        self.config = Some(v);
    }

    /// Writes `name` under the output directory, or prints the content.
    pub fn emit(&mut self, name: &str, content: &str) -> std::io::Result<()> {
        match &self.dir {
            Some(d) => {
                let path = d.join(name);
                std::fs::write(&path, content)?;
                self.artifacts.push(path.display().to_string());
            }
            None => print!("{content}"),
        }
        Ok(())
    }

    /// Writes to an explicit path regardless of the output directory.
    pub fn emit_path(&mut self, path: &Path, content: &str) -> std::io::Result<()> {
        let path = match (&self.dir, path.is_relative()) {
            (Some(d), true) => d.join(path),
            _ => path.to_path_buf(),
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, content)?;
        self.artifacts.push(path.display().to_string());
        Ok(())
    }

    pub fn add_checks(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Writes the manifest last, when an output directory is in use.
    pub fn finish(self) -> std::io::Result<bool> {
        let ok = self.all_passed();
        if let Some(d) = &self.dir {
            let m = Manifest {
                command: &self.command,
                config: self.config.as_ref(),
                artifacts: &self.artifacts,
                version: env!("CARGO_PKG_VERSION"),
                wall_time_s: self.started.elapsed().as_secs_f64(),
                checks: &self.checks,
            };
            std::fs::write(d.join("manifest.json"), serde_json::to_string_pretty(&m)?)?;
        }
        Ok(ok)
    }
}
