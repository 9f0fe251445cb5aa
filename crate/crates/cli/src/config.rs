//! Flat key=value configuration files. Keys use the long option names with
//! underscores (`burn_in=500`). Values parse on demand; a flag given on the
//! command line always wins over the file.

use crate::error::{CliError, CliResult};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default)]
pub struct FileConfig {
    entries: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::usage(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "config {} line {}: expected key=value, got {line:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim().to_ascii_lowercase().replace('-', "_");
            entries.insert(key, value.trim().to_string());
        }
        Ok(FileConfig { entries })
    }

    /// Typed lookup; a present but unparseable value is a usage error.
    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::usage(format!("config key {key}: cannot parse {raw:?}"))
            }),
        }
    }

    /// Comma-separated list lookup.
    pub fn get_list<T: FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .split(',')
                .map(|piece| {
                    piece.trim().parse::<T>().map_err(|_| {
                        CliError::usage(format!("config key {key}: cannot parse {piece:?}"))
                    })
                })
                .collect::<CliResult<Vec<T>>>()
                .map(Some),
        }
    }

    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn parses_keys_and_ignores_comments() {
        let f = write_temp("# defaults\nseed = 99\nburn-in=250\n\n; more\nformat=json\n");
        let cfg = FileConfig::load(Some(f.path())).unwrap();
        assert_eq!(cfg.get::<u64>("seed").unwrap(), Some(99));
        assert_eq!(cfg.get::<usize>("burn_in").unwrap(), Some(250));
        assert_eq!(cfg.get_raw("format"), Some("json"));
        assert_eq!(cfg.get::<u64>("absent").unwrap(), None);
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        let f = write_temp("seed 99\n");
        assert!(FileConfig::load(Some(f.path())).is_err());
        let f = write_temp("seed=not-a-number\n");
        let cfg = FileConfig::load(Some(f.path())).unwrap();
        assert!(cfg.get::<u64>("seed").is_err());
    }

    #[test]
    fn parses_lists() {
        let f = write_temp("alpha=0.95, 0.99\n");
        let cfg = FileConfig::load(Some(f.path())).unwrap();
        assert_eq!(
            cfg.get_list::<f64>("alpha").unwrap(),
            Some(vec![0.95, 0.99])
        );
    }

    #[test]
    fn missing_file_is_an_error_but_no_file_is_fine() {
        assert!(FileConfig::load(Some(Path::new("/nonexistent/x.conf"))).is_err());
        assert!(FileConfig::load(None).is_ok());
    }
}
