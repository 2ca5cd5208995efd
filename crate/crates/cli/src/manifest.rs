//! Per-run record written next to every command's outputs.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

#[derive(Debug)]
pub struct RunManifest {
    command: String,
    seed: Option<u64>,
    config: Vec<(String, String)>,
    inputs: Vec<(PathBuf, String)>,
    outputs: Vec<PathBuf>,
    timings: Vec<(String, f64)>,
    stage_start: Instant,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            seed,
            config: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
            stage_start: Instant::now(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) {
        self.config.push((key.to_string(), value.to_string()));
    }

    /// Records an input file and its SHA-256 digest.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        let digest = sha256_file(path)?;
        self.inputs.push((path.to_path_buf(), digest));
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Closes the current stage and starts the next one.
    pub fn stage(&mut self, name: &str) {
        let now = Instant::now();
        self.timings
            .push((name.to_string(), now.duration_since(self.stage_start).as_secs_f64()));
        self.stage_start = now;
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command\t{}", self.command);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed\t{seed}");
        }
        s.push_str("[config]\n");
        for (k, v) in &self.config {
            let _ = writeln!(s, "{k}\t{v}");
        }
        s.push_str("[inputs]\n");
        for (p, d) in &self.inputs {
            let _ = writeln!(s, "{}\tsha256:{d}", p.display());
        }
        s.push_str("[outputs]\n");
        for p in &self.outputs {
            let _ = writeln!(s, "{}", p.display());
        }
        s.push_str("[timings]\n");
        for (name, secs) in &self.timings {
            let _ = writeln!(s, "{name}\t{secs:.6}");
        }
        s
    }

    /// Writes the manifest to `<primary output>.manifest`.
    pub fn write_beside(&self, primary: &Path) -> Result<PathBuf> {
        let path = manifest_path(primary);
        let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        w.write_all(self.render().as_bytes())?;
        w.flush()?;
        Ok(path)
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let mut name = primary.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().fold(String::new(), |mut acc, b| {
        let _ = write!(acc, "{b:02x}");
        acc
    }))
}
