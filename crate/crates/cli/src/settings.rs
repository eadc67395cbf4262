//! Config-file and environment handling: `key=value` lines supply defaults
//! for flags the user did not pass, and SIGREC_DATA_DIR resolves relative
//! corpus paths.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

pub const DATA_DIR_ENV: &str = "SIGREC_DATA_DIR";

/// Parses a `key=value` config file; `#` lines are comments.
pub fn load_config(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("failed to read config file {}", path.display()))?;
    let mut map = HashMap::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((key, value)) => {
                map.insert(key.trim().to_owned(), value.trim().to_owned());
            }
            None => bail!(
                "{}:{}: expected key=value, got `{line}`",
                path.display(),
                line_no + 1
            ),
        }
    }
    Ok(map)
}

/// Flag value if given, else the config-file value, else the default.
pub fn resolve<T: std::str::FromStr>(
    flag: Option<T>,
    config: &HashMap<String, String>,
    key: &str,
    default: T,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match config.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|e| anyhow::anyhow!("config key `{key}`: {e}")),
        None => Ok(default),
    }
}

/// Resolves a corpus input path against SIGREC_DATA_DIR when the path is
/// relative and does not exist as given.
pub fn resolve_data_path(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Ok(dir) = std::env::var(DATA_DIR_ENV) {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}
