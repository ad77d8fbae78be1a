//! Setting resolution: command-line flag, then config file, then default.
//!
//! The config file is line-oriented `key = value`; `#` starts a comment.
//! A key may be scoped to one command as `command.key`; unscoped keys apply
//! to every command that knows them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{CliError, Result};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "QNRATE_OUT_DIR";

/// Resolved settings of one command run, in resolution order.
#[derive(Debug, Default)]
pub struct Settings {
    command: String,
    file: BTreeMap<String, String>,
    used: BTreeSet<String>,
    resolved: Vec<(String, String)>,
}

impl Settings {
    pub fn new(command: &str) -> Self {
        Self { command: command.to_string(), ..Self::default() }
    }

    /// Settings backed by an optional config file.
    pub fn load(command: &str, path: Option<&Path>) -> Result<Self> {
        let mut settings = Self::new(command);
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
            settings.file = parse_config(&text, command)
                .map_err(|msg| CliError::Usage(format!("{}: {msg}", path.display())))?;
        }
        Ok(settings)
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// Resolves `key`, records the value, and returns it.
    pub fn value<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        let v = match self.lookup(key, flag)? {
            Some(v) => v,
            None => default,
        };
        self.record(key, &v);
        Ok(v)
    }

    /// Like [`Settings::value`] for settings without a default; unset values
    /// are recorded as empty.
    pub fn optional<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        let v = self.lookup(key, flag)?;
        match &v {
            Some(v) => self.record(key, v),
            None => self.record(key, ""),
        }
        Ok(v)
    }

    /// A switch is on when the flag is given or the file sets it true.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool> {
        let v = if flag { true } else { self.lookup::<bool>(key, None)?.unwrap_or(false) };
        self.record(key, v);
        Ok(v)
    }

    /// Output path: flag, then file, then `<$QNRATE_OUT_DIR or .>/<default_name>`.
    pub fn out_path(&mut self, flag: Option<PathBuf>, default_name: &str) -> Result<PathBuf> {
        self.out_path_with(flag, default_out_dir().join(default_name))
    }

    /// Output path: flag, then file, then `default`.
    pub fn out_path_with(&mut self, flag: Option<PathBuf>, default: PathBuf) -> Result<PathBuf> {
        let path = match flag {
            Some(p) => {
                self.take_file("out");
                p
            }
            None => self.take_file("out").map(PathBuf::from).unwrap_or(default),
        };
        self.record("out", path.display());
        Ok(path)
    }

    /// Records a derived value that is not looked up anywhere.
    pub fn record(&mut self, key: &str, value: impl fmt::Display) {
        self.resolved.push((key.to_string(), value.to_string()));
    }

    /// Config-file keys this command never asked for.
    pub fn unused(&self) -> Vec<String> {
        self.file.keys().filter(|k| !self.used.contains(*k)).cloned().collect()
    }

    pub fn parameters(&self) -> &[(String, String)] {
        &self.resolved
    }

    fn take_file(&mut self, key: &str) -> Option<String> {
        let v = self.file.get(key).cloned();
        if v.is_some() {
            self.used.insert(key.to_string());
        }
        v
    }

    fn lookup<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            // Mark the file entry as consumed so it is not reported unused.
            self.take_file(key);
            return Ok(flag);
        }
        match self.take_file(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}` = `{raw}`: {e}"))),
            None => Ok(None),
        }
    }
}

/// Directory for outputs written without an explicit path.
pub fn default_out_dir() -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => PathBuf::from("."),
    }
}

/// Keys that apply to `command`, with any `command.` scope stripped. Keys
/// scoped to other commands are dropped.
fn parse_config(text: &str, command: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    let mut scoped = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {}: expected `key = value`", i + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        match key.split_once('.') {
            Some((scope, name)) if scope == command => {
                scoped.insert(name.to_string());
                out.insert(name.to_string(), value.to_string());
            }
            Some(_) => {}
            None => {
                // A scoped entry wins over an unscoped one wherever it appears.
                if !scoped.contains(key) {
                    out.insert(key.to_string(), value.to_string());
                }
            }
        }
    }
    Ok(out)
}

/// Comma-separated list usable as a setting value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse().map_err(|e: T::Err| format!("`{t}`: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(List)
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file_beats_default() {
        let mut s = Settings::new("radius");
        s.file = parse_config("seed = 7\ntrials=3 # comment\nradius.iters = 50\nfactors.q = 9\n", "radius").unwrap();
        assert_eq!(s.value("seed", Some(1u64), 0).unwrap(), 1);
        assert_eq!(s.value("trials", None, 40usize).unwrap(), 3);
        assert_eq!(s.value("iters", None, 200usize).unwrap(), 50);
        assert_eq!(s.value("rho", None, 1.0f64).unwrap(), 1.0);
        assert!(s.unused().is_empty());
        assert_eq!(s.parameters()[0], ("seed".to_string(), "1".to_string()));
    }

    #[test]
    fn scoped_key_overrides_unscoped() {
        let file = parse_config("radius.seed = 2\nseed = 1\n", "radius").unwrap();
        assert_eq!(file["seed"], "2");
        let file = parse_config("radius.seed = 2\nseed = 1\n", "factors").unwrap();
        assert_eq!(file["seed"], "1");
    }

    #[test]
    fn malformed_lines_are_reported() {
        assert!(parse_config("seed 7", "radius").unwrap_err().contains("line 1"));
        let mut s = Settings::new("radius");
        s.file = parse_config("trials = many", "radius").unwrap();
        assert!(s.value("trials", None, 40usize).is_err());
    }

    #[test]
    fn lists_round_trip() {
        let l: List<usize> = "100, 316,1000".parse().unwrap();
        assert_eq!(l.0, vec![100, 316, 1000]);
        assert_eq!(l.to_string(), "100,316,1000");
        assert!("1,x".parse::<List<usize>>().is_err());
    }
}
