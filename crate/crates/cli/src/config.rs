//! Run configuration: TOML config file sections, flag overrides, and the
//! persisted resolved config.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use textcpd::{Error, Result};

/// Parsed `--config` file. Each subcommand reads its own table
/// (`[synth]`, `[train]`, ...); a top-level `seed` applies to all of them.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    table: toml::Table,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = fs::read_to_string(path).map_err(|e| Error::File {
            path: path.to_path_buf(),
            source: e,
        })?;
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(ConfigFile { table })
    }

    /// The section for `name`, with missing fields taken from `T::default()`.
    pub fn section<T: DeserializeOwned + Default>(&self, name: &str) -> Result<T> {
        match self.table.get(name) {
            None => Ok(T::default()),
            Some(v) => v
                .clone()
                .try_into()
                .map_err(|e| Error::Config(format!("[{name}] section: {e}"))),
        }
    }

    pub fn seed(&self) -> Result<Option<u64>> {
        match self.table.get("seed") {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(v) => Err(Error::Config(format!("seed must be a non-negative integer, got {v}"))),
        }
    }
}

/// Flag > config file > default.
pub fn resolve_seed(flag: Option<u64>, file: &ConfigFile, section_value: u64) -> Result<u64> {
    Ok(match flag {
        Some(s) => s,
        None => file.seed()?.unwrap_or(section_value),
    })
}

/// Overwrites `target` with the flag value when one was given.
pub fn set<T>(target: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *target = v;
    }
}

/// `<output>.run.toml`, or `run.toml` inside an output directory.
pub fn run_config_path(output: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        output.join("run.toml")
    } else {
        let mut s = output.as_os_str().to_owned();
        s.push(".run.toml");
        PathBuf::from(s)
    }
}

/// Persists the resolved config of one run as TOML.
pub fn write_run_config<T: Serialize>(command: &str, seed: u64, config: &T, path: &Path) -> Result<()> {
    let mut root = toml::Table::new();
    root.insert("command".into(), toml::Value::String(command.into()));
    root.insert("seed".into(), toml::Value::Integer(seed as i64));
    let body = toml::Value::try_from(config).map_err(|e| Error::Config(format!("serializing config: {e}")))?;
    root.insert(command.into(), body);
    let text = toml::to_string(&root).map_err(|e| Error::Config(format!("serializing config: {e}")))?;
    fs::write(path, text).map_err(|e| Error::File {
        path: path.to_path_buf(),
        source: e,
    })
}
