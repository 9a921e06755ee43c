//! Output directories that appear whole or not at all.

use crate::error::{CliError, CliResult};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

pub const MANIFEST: &str = "manifest.json";

/// Files produced by one run, kept in memory until committed.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        let name = name.into();
        debug_assert!(!self.files.iter().any(|f| f.0 == name), "{name} written twice");
        self.files.push((name, bytes));
    }

    pub fn json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
        bytes.push(b'\n');
        self.add(name, bytes);
    }

    /// Moves another run's files under `prefix/`.
    pub fn nest(&mut self, prefix: &str, other: Artifacts) {
        for (name, bytes) in other.files {
            self.add(format!("{prefix}/{name}"), bytes);
        }
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|f| f.0 == name).map(|f| f.1.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|f| f.0.as_str())
    }

    /// `(name, sha256)` for every file, sorted by name.
    pub fn digests(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self.files.iter().map(|(n, b)| (n.clone(), sha256_hex(b))).collect();
        out.sort();
        out
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Fails early when `out` cannot receive a fresh run.
pub fn check_target(out: &Path, force: bool) -> CliResult<()> {
    if out.is_file() {
        return Err(CliError::Config(format!("--out {} is a file", out.display())));
    }
    match fs::read_dir(out) {
        Ok(mut entries) => {
            if entries.next().is_some() && !force {
                return Err(CliError::Config(format!(
                    "output directory {} is not empty; pass --force to replace it",
                    out.display()
                )));
            }
            Ok(())
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
        Err(e) => Err(CliError::Io { path: out.to_path_buf(), source: e }),
    }
}

fn sibling(out: &Path, tag: &str) -> PathBuf {
    let name = out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!(".{name}.{tag}-{}", std::process::id()))
}

/// Writes every file into a hidden sibling directory and renames it onto `out`.
pub fn commit(out: &Path, artifacts: &Artifacts, force: bool) -> CliResult<()> {
    check_target(out, force)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(CliError::io(parent))?;
    }
    let staging = sibling(out, "partial");
    let result = (|| {
        fs::create_dir_all(&staging).map_err(CliError::io(&staging))?;
        for (name, bytes) in &artifacts.files {
            let path = staging.join(name);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir).map_err(CliError::io(dir))?;
            }
            fs::write(&path, bytes).map_err(CliError::io(&path))?;
        }
        let old = sibling(out, "old");
        let replaced = out.exists();
        if replaced {
            fs::rename(out, &old).map_err(CliError::io(out))?;
        }
        fs::rename(&staging, out).map_err(CliError::io(out))?;
        if replaced {
            fs::remove_dir_all(&old).map_err(CliError::io(&old))?;
        }
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_dir_all(&staging);
    }
    result
}
