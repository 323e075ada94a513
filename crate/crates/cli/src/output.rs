use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::CliError;

/// Output files buffered in memory and committed only after the command has
/// fully succeeded. Each file is written to a temporary sibling and renamed
/// into place.
pub struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn commit(self, verbose: u8) -> Result<(), CliError> {
        let io_err = |what: &str, p: &Path, e: std::io::Error| {
            CliError::input(format!("{what} {}: {e}", p.display()))
        };
        std::fs::create_dir_all(&self.dir)
            .map_err(|e| io_err("cannot create output directory", &self.dir, e))?;
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            let mut tmp = NamedTempFile::new_in(&self.dir)
                .map_err(|e| io_err("cannot create temp file in", &self.dir, e))?;
            tmp.write_all(bytes)
                .and_then(|_| tmp.flush())
                .map_err(|e| io_err("cannot write", &path, e))?;
            tmp.persist(&path)
                .map_err(|e| io_err("cannot rename into", &path, e.error))?;
            if verbose > 0 {
                eprintln!("wrote {}", path.display());
            }
        }
        Ok(())
    }
}
