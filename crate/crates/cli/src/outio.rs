//! Artifact output. Writes are atomic: content lands in a temporary file in
//! the target directory and is renamed into place, so readers never observe
//! a half-written report.

use crate::error::{CliError, CliResult};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Explicit paths are honored as given; default names land in `out_dir`.
pub fn resolve_out(out_dir: &Path, explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| out_dir.join(default_name))
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .map_err(|e| CliError::data(format!("cannot stage write in {}: {e}", dir.display())))?;
    tmp.write_all(bytes)
        .and_then(|()| tmp.flush())
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    tmp.persist(path)
        .map_err(|e| CliError::data(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}
