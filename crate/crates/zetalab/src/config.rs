//! Run settings: an optional flat `key=value` file overridden by flags.
//!
//! Every value a command reads is recorded with its canonical spelling, and
//! the recorded set becomes the `# config:` header of the output.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Keys accepted in a config file or as `--key` flags.
pub const KEYS: &[&str] = &[
    "x", "T", "ln-x", "y", "ln-y", "k", "two-k", "c0", "seed", "threads", "out", "format",
    "desk-jm", "desk-m", "step-ratio", "dt", "points", "samples", "nodes", "ell", "ell-prime",
    "t-values", "t-samples", "max-factor",
];

/// Accepts `_` for `-` and `t` / `t-max` for `T`.
pub fn canonical_key(raw: &str) -> Option<&'static str> {
    let k = raw.trim().replace('_', "-");
    let k = match k.as_str() {
        "t" | "t-max" => "T",
        other => other,
    };
    KEYS.iter().copied().find(|&known| known == k)
}

/// Parses a flat `key = value` text. `#` starts a comment line.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<&'static str, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key=value, got `{line}`", i + 1))
        })?;
        let key = canonical_key(key)
            .ok_or_else(|| CliError::Usage(format!("config line {}: unknown key `{}`", i + 1, key.trim())))?;
        if out.insert(key, value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key `{key}`", i + 1)));
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<&'static str, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Merged settings for one run.
pub struct Settings {
    values: BTreeMap<&'static str, String>,
    used: RefCell<BTreeMap<&'static str, String>>,
}

impl Settings {
    /// `flags` override `file`.
    pub fn new(file: BTreeMap<&'static str, String>, flags: BTreeMap<&'static str, String>) -> Self {
        let mut values = file;
        values.extend(flags);
        Settings {
            values,
            used: RefCell::new(BTreeMap::new()),
        }
    }

    pub fn is_set(&self, key: &'static str) -> bool {
        self.values.contains_key(key)
    }

    fn parse<T>(&self, key: &'static str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        debug_assert!(KEYS.contains(&key));
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("invalid value `{raw}` for `{key}`: {e}"))),
        }
    }

    fn record(&self, key: &'static str, value: String) {
        self.used.borrow_mut().insert(key, value);
    }

    /// Like [`Self::opt`] but kept out of the resolved header (for settings
    /// such as the output path that do not affect results).
    pub fn peek<T>(&self, key: &'static str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.parse(key)
    }

    pub fn opt<T>(&self, key: &'static str) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.parse::<T>(key)?;
        if let Some(v) = &v {
            self.record(key, v.to_string());
        }
        Ok(v)
    }

    pub fn get<T>(&self, key: &'static str, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let v = self.parse::<T>(key)?.unwrap_or(default);
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn require<T>(&self, key: &'static str) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.opt(key)?
            .ok_or_else(|| CliError::Usage(format!("missing required setting `{key}`")))
    }

    /// Comma-separated list.
    pub fn list<T>(&self, key: &'static str) -> Result<Option<Vec<T>>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let Some(raw) = self.values.get(key) else {
            return Ok(None);
        };
        let items = raw
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<T>()
                    .map_err(|e| CliError::Usage(format!("invalid entry `{s}` in `{key}`: {e}")))
            })
            .collect::<Result<Vec<T>, _>>()?;
        if items.is_empty() {
            return Err(CliError::Usage(format!("`{key}` is empty")));
        }
        self.record_list(key, &items);
        Ok(Some(items))
    }

    pub fn record_list<T: Display>(&self, key: &'static str, items: &[T]) {
        let joined = items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        self.record(key, joined);
    }

    /// Everything read so far, in key order.
    pub fn resolved(&self) -> Vec<(String, String)> {
        self.used
            .borrow()
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_parsing() {
        let m = parse_config_text("# run\nx = 10\nt_max=1e5\n\ntwo_k=4\n").unwrap();
        assert_eq!(m["x"], "10");
        assert_eq!(m["T"], "1e5");
        assert_eq!(m["two-k"], "4");
        let e = parse_config_text("bogus=1").unwrap_err();
        assert!(e.to_string().contains("bogus"));
        assert!(parse_config_text("x 10").is_err());
        assert!(parse_config_text("x=1\nx=2").is_err());
    }

    #[test]
    fn flags_override_file_and_are_recorded() {
        let file = parse_config_text("x=10\nk=2").unwrap();
        let flags = BTreeMap::from([("x", "20".to_string())]);
        let s = Settings::new(file, flags);
        assert_eq!(s.get::<f64>("x", 1.0).unwrap(), 20.0);
        assert_eq!(s.get::<f64>("k", 1.0).unwrap(), 2.0);
        assert_eq!(s.get::<u64>("seed", 7).unwrap(), 7);
        assert_eq!(s.opt::<f64>("dt").unwrap(), None);
        let r = s.resolved();
        assert_eq!(
            r,
            vec![
                ("k".to_string(), "2".to_string()),
                ("seed".to_string(), "7".to_string()),
                ("x".to_string(), "20".to_string()),
            ]
        );
        let bad = Settings::new(BTreeMap::from([("k", "two".to_string())]), BTreeMap::new());
        assert!(bad.get::<f64>("k", 1.0).unwrap_err().to_string().contains("`k`"));
    }
}
