//! Atomic file output: everything goes to a temporary file in the target
//! directory and is renamed into place.

use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_with<F>(&self, name: &str, fill: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
    {
        let target = self.path(name);
        let fail = |e: &dyn std::fmt::Display| CliError::Io(format!("{}: {e}", target.display()));
        let tmp = tempfile::NamedTempFile::new_in(&self.root).map_err(|e| fail(&e))?;
        {
            let mut w = std::io::BufWriter::new(tmp.as_file());
            fill(&mut w).map_err(|e| fail(&e))?;
            w.flush().map_err(|e| fail(&e))?;
        }
        tmp.persist(&target).map_err(|e| fail(&e.error))?;
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        self.write_with(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)
        })
    }
}

/// Manifest recorded next to every output set.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub threads: usize,
    pub checker: String,
    pub files: Vec<String>,
    pub config: &'a crate::RunConfig,
}
