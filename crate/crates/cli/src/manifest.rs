//! Run directories, manifests and output checksums.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use sha2::{Digest, Sha256};

use crate::config::{Command, RunConfig};

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const CHECKSUM_FILE: &str = "checksums.txt";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Complete,
    BlowUp,
    CheckFailed,
}

impl RunStatus {
    pub fn label(self) -> &'static str {
        match self {
            RunStatus::Complete => "complete",
            RunStatus::BlowUp => "blow_up",
            RunStatus::CheckFailed => "check_failed",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Complete => 0,
            RunStatus::BlowUp => 3,
            RunStatus::CheckFailed => 4,
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [RunStatus::Complete, RunStatus::BlowUp, RunStatus::CheckFailed]
            .into_iter()
            .find(|r| r.label() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_text: String,
    pub code_version: String,
    pub started: f64,
    pub finished: f64,
    pub input_hash: String,
    pub status: RunStatus,
    pub flags: Vec<String>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "command={}", self.command);
        let _ = writeln!(s, "code_version={}", self.code_version);
        let _ = writeln!(s, "started_unix={:.3}", self.started);
        let _ = writeln!(s, "finished_unix={:.3}", self.finished);
        let _ = writeln!(s, "input_hash={}", self.input_hash);
        let _ = writeln!(s, "status={}", self.status.label());
        let _ = writeln!(s, "exit_code={}", self.status.exit_code());
        for f in &self.flags {
            let _ = writeln!(s, "flag={f}");
        }
        for line in self.config_text.lines() {
            let _ = writeln!(s, "config.{line}");
        }
        s
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let mut m = RunManifest {
            command: String::new(),
            config_text: String::new(),
            code_version: String::new(),
            started: f64::NAN,
            finished: f64::NAN,
            input_hash: String::new(),
            status: RunStatus::Complete,
            flags: Vec::new(),
        };
        let mut status = None;
        for line in text.lines() {
            let Some((k, v)) = line.split_once('=') else {
                bail!("malformed manifest line '{line}'");
            };
            if let Some(rest) = k.strip_prefix("config.") {
                let _ = writeln!(m.config_text, "{rest}={v}");
                continue;
            }
            match k {
                "command" => m.command = v.into(),
                "code_version" => m.code_version = v.into(),
                "started_unix" => m.started = v.parse()?,
                "finished_unix" => m.finished = v.parse()?,
                "input_hash" => m.input_hash = v.into(),
                "status" => status = RunStatus::parse(v),
                "exit_code" => {}
                "flag" => m.flags.push(v.into()),
                _ => bail!("unknown manifest key '{k}'"),
            }
        }
        m.status = status.context("manifest has no valid status")?;
        Ok(m)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Relative paths (with `/` separators) of every file under `root`,
/// excluding the manifest and checksum files at the top level.
pub fn output_files(root: &Path) -> anyhow::Result<Vec<String>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<String>) -> anyhow::Result<()> {
        for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
            let path = entry?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path.strip_prefix(root)?;
                let parts: Vec<_> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
                out.push(parts.join("/"));
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(root, root, &mut out)?;
    out.retain(|f| f != MANIFEST_FILE && f != CHECKSUM_FILE);
    out.sort();
    Ok(out)
}

/// `filename digest` lines for every output file.
pub fn checksums(root: &Path) -> anyhow::Result<String> {
    let mut s = String::new();
    for f in output_files(root)? {
        let bytes = fs::read(root.join(&f)).with_context(|| format!("reading {f}"))?;
        let _ = writeln!(s, "{f} {}", sha256_hex(&bytes));
    }
    Ok(s)
}

/// True when `checksums.txt` lists exactly the files present and every digest matches.
pub fn verify_checksums(root: &Path) -> anyhow::Result<bool> {
    let listed = fs::read_to_string(root.join(CHECKSUM_FILE))?;
    Ok(listed == checksums(root)?)
}

/// A run directory named after the configuration hash.
pub struct RunDir {
    pub path: PathBuf,
    pub command: Command,
    pub config: RunConfig,
    pub input_hash: String,
    started: f64,
}

/// What [`RunDir::open`] found.
pub enum Prepared {
    Fresh(RunDir),
    /// A finished run with the same inputs and intact outputs.
    Existing { path: PathBuf, manifest: RunManifest },
}

impl RunDir {
    pub fn dir_name(command: Command, hash: &str) -> String {
        format!("{}-{}", command.name(), &hash[..16])
    }

    /// Opens `parent/<command>-<hash16>`, or reports an identical finished run there.
    pub fn open(parent: &Path, command: Command, config: &RunConfig) -> anyhow::Result<Prepared> {
        let input_hash = config.hash(command);
        let path = parent.join(Self::dir_name(command, &input_hash));
        if let Some(manifest) = finished_run(&path, &input_hash) {
            return Ok(Prepared::Existing { path, manifest });
        }
        Self::create(path, command, config, input_hash).map(Prepared::Fresh)
    }

    /// Uses `path` as is, without the identical-run lookup.
    pub fn at(path: PathBuf, command: Command, config: &RunConfig) -> anyhow::Result<Self> {
        let input_hash = config.hash(command);
        Self::create(path, command, config, input_hash)
    }

    fn create(path: PathBuf, command: Command, config: &RunConfig, input_hash: String) -> anyhow::Result<Self> {
        fs::create_dir_all(&path).with_context(|| format!("creating {}", path.display()))?;
        for stale in [MANIFEST_FILE, CHECKSUM_FILE] {
            let p = path.join(stale);
            if p.exists() {
                fs::remove_file(&p)?;
            }
        }
        Ok(Self {
            path,
            command,
            config: config.clone(),
            input_hash,
            started: unix_now(),
        })
    }

    pub fn write(&self, name: &str, bytes: impl AsRef<[u8]>) -> anyhow::Result<PathBuf> {
        let p = self.path.join(name);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
        Ok(p)
    }

    /// Writes the checksum list and then the manifest.
    pub fn finish(&self, status: RunStatus) -> anyhow::Result<RunManifest> {
        let sums = checksums(&self.path)?;
        fs::write(self.path.join(CHECKSUM_FILE), sums)?;
        let manifest = RunManifest {
            command: self.command.name().into(),
            config_text: self.config.to_text(),
            code_version: env!("CARGO_PKG_VERSION").into(),
            started: self.started,
            finished: unix_now(),
            input_hash: self.input_hash.clone(),
            status,
            flags: self.config.flags(),
        };
        fs::write(self.path.join(MANIFEST_FILE), manifest.to_text())?;
        Ok(manifest)
    }
}

fn finished_run(path: &Path, hash: &str) -> Option<RunManifest> {
    let text = fs::read_to_string(path.join(MANIFEST_FILE)).ok()?;
    let m = RunManifest::parse(&text).ok()?;
    (m.input_hash == hash && verify_checksums(path).ok()?).then_some(m)
}
