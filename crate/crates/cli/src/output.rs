//! Artifacts are collected in memory and only written once a subcommand has
//! finished, each through a temporary file and a rename, so a failed run
//! leaves `error.json` and nothing half-written.

use crate::error::{CliError, ErrorRecord};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

pub const LOCK_FILE: &str = ".rieszlab.lock";
pub const ERROR_FILE: &str = "error.json";
pub const ENV_OUT: &str = "RIESZLAB_OUT";
pub const DEFAULT_OUT: &str = "rieszlab-out";

#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Other(format!("serializing {name}: {e}")))?;
        bytes.push(b'\n');
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    /// Header row, comma separated, LF line endings.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let wrap = |e: csv::Error| CliError::Other(format!("writing {name}: {e}"));
        w.write_record(header).map_err(wrap)?;
        for r in rows {
            w.write_record(r).map_err(wrap)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Other(format!("writing {name}: {e}")))?;
        self.files.push((name.to_string(), bytes));
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }
}

/// Shortest round-trip decimal form, so identical runs give identical bytes.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// `--out`, then `output.dir`, then `$RIESZLAB_OUT`, then `./rieszlab-out`.
pub fn resolve_dir(flag: Option<&Path>, config: Option<&str>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = config {
        return PathBuf::from(p);
    }
    match std::env::var_os(ENV_OUT) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from(DEFAULT_OUT),
    }
}

/// Exclusive handle on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    lock: PathBuf,
}

impl OutputDir {
    pub fn acquire(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
        let lock = dir.join(LOCK_FILE);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                use std::io::Write;
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self {
                    dir: dir.to_path_buf(),
                    lock,
                })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Locked {
                dir: dir.display().to_string(),
                lock: lock.display().to_string(),
            }),
            Err(e) => Err(CliError::io(format!("creating {}", lock.display()), e)),
        }
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    fn write_atomic(&self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let target = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, bytes).map_err(|e| CliError::io(format!("writing {}", tmp.display()), e))?;
        fs::rename(&tmp, &target).map_err(|e| CliError::io(format!("renaming to {}", target.display()), e))
    }

    /// Write every artifact and clear an `error.json` left by an earlier failure.
    pub fn commit(&self, artifacts: &Artifacts) -> Result<(), CliError> {
        for (name, bytes) in &artifacts.files {
            self.write_atomic(name, bytes)?;
        }
        let stale = self.dir.join(ERROR_FILE);
        if stale.exists() {
            fs::remove_file(&stale).map_err(|e| CliError::io(format!("removing {}", stale.display()), e))?;
        }
        Ok(())
    }

    pub fn write_error(&self, record: &ErrorRecord) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(record).map_err(|e| CliError::Other(e.to_string()))?;
        bytes.push(b'\n');
        self.write_atomic(ERROR_FILE, &bytes)
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}
