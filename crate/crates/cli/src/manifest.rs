//! Run manifest written next to every set of outputs.

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

/// Marks errors that map to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub struct Manifest {
    pub command: String,
    pub config_path: Option<PathBuf>,
    pub scenario_path: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub solver_command: String,
    pub seed: Option<u64>,
    pub flags: BTreeMap<String, String>,
    /// Inputs that existed, in the order hashed.
    pub inputs: Vec<PathBuf>,
    pub inputs_sha256: String,
    pub outputs: Vec<PathBuf>,
    pub status: String,
    pub wall_time_s: f64,
    started: Instant,
}

/// `--key value` pairs and bare `--switch`es after the subcommand name.
fn parse_flags(argv: &[String]) -> BTreeMap<String, String> {
    let mut flags = BTreeMap::new();
    let mut it = argv.iter().skip(2).peekable();
    while let Some(a) = it.next() {
        let Some(key) = a.strip_prefix("--") else { continue };
        if let Some((k, v)) = key.split_once('=') {
            flags.insert(k.to_string(), v.to_string());
        } else if it.peek().is_some_and(|n| !n.starts_with("--")) {
            let v = it.next().cloned().unwrap_or_default();
            flags
                .entry(key.to_string())
                .and_modify(|old: &mut String| {
                    old.push(',');
                    old.push_str(&v)
                })
                .or_insert(v);
        } else {
            flags.insert(key.to_string(), "true".to_string());
        }
    }
    flags
}

impl Manifest {
    pub fn new(command: &str, argv: &[String]) -> Self {
        Manifest {
            command: command.to_string(),
            config_path: None,
            scenario_path: None,
            output_dir: None,
            solver_command: String::new(),
            seed: None,
            flags: parse_flags(argv),
            inputs: Vec::new(),
            inputs_sha256: String::new(),
            outputs: Vec::new(),
            status: "error".to_string(),
            wall_time_s: 0.0,
            started: Instant::now(),
        }
    }

    /// Hash the files that exist among `paths`, each prefixed by its length.
    pub fn record_inputs(&mut self, paths: impl IntoIterator<Item = PathBuf>) -> Result<()> {
        let mut h = Sha256::new();
        for p in paths {
            if !p.exists() {
                continue;
            }
            let bytes = std::fs::read(&p).with_context(|| format!("reading {}", p.display()))?;
            h.update((bytes.len() as u64).to_le_bytes());
            h.update(&bytes);
            self.inputs.push(p);
        }
        self.inputs_sha256 = hex::encode(h.finalize());
        Ok(())
    }

    pub fn finish(&mut self) {
        self.wall_time_s = self.started.elapsed().as_secs_f64();
    }

    pub fn to_json(&self) -> serde_json::Value {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let list = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>();
        serde_json::json!({
            "command": self.command,
            "version": env!("CARGO_PKG_VERSION"),
            "config_path": path(&self.config_path),
            "scenario_path": path(&self.scenario_path),
            "output_dir": path(&self.output_dir),
            "solver_command": self.solver_command,
            // The bundled solver is deterministic; external solvers may not be.
            "solver_deterministic": self.solver_command.is_empty() || self.solver_command == "bundled",
            "seed": self.seed,
            "flags": self.flags,
            "inputs": list(&self.inputs),
            "inputs_sha256": self.inputs_sha256,
            "outputs": list(&self.outputs),
            "status": self.status,
            "wall_time_s": self.wall_time_s,
        })
    }

    pub fn write(&self) -> Result<()> {
        let Some(dir) = &self.output_dir else { return Ok(()) };
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self.to_json())? + "\n";
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_pairs_switches_and_repeats() {
        let argv: Vec<String> = ["p2a", "compare", "--scheme", "scheme1", "--tiny", "--scheme", "scheme2", "--dt=1800"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let f = parse_flags(&argv);
        assert_eq!(f["scheme"], "scheme1,scheme2");
        assert_eq!(f["tiny"], "true");
        assert_eq!(f["dt"], "1800");
    }

    #[test]
    fn input_hash_depends_on_content() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        std::fs::write(&a, "x").unwrap();
        let mut m1 = Manifest::new("solve", &[]);
        m1.record_inputs([a.clone(), dir.path().join("missing")]).unwrap();
        std::fs::write(&a, "y").unwrap();
        let mut m2 = Manifest::new("solve", &[]);
        m2.record_inputs([a.clone()]).unwrap();
        assert_eq!(m1.inputs.len(), 1);
        assert_ne!(m1.inputs_sha256, m2.inputs_sha256);
    }
}
