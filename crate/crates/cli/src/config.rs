use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Flat `key=value` configuration with dotted namespaces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

fn parse_line(line: &str, origin: &str) -> Result<Option<(String, String)>, CliError> {
    let line = line.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let (k, v) = line.split_once('=').ok_or_else(|| {
        CliError::Validation(format!("{origin}: expected key=value, got {line:?}"))
    })?;
    let k = k.trim();
    if k.is_empty() {
        return Err(CliError::Validation(format!(
            "{origin}: empty key in {line:?}"
        )));
    }
    Ok(Some((k.to_string(), v.trim().to_string())))
}

impl Config {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            if let Some((k, v)) = parse_line(line, &format!("{origin}:{}", no + 1))? {
                entries.insert(k, v);
            }
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<(), CliError> {
        for o in overrides {
            if let Some((k, v)) = parse_line(o, "command line")? {
                self.entries.insert(k, v);
            }
        }
        Ok(())
    }

    pub fn set_default(&mut self, key: &str, value: &str) {
        self.entries
            .entry(key.to_string())
            .or_insert_with(|| value.to_string());
    }

    pub fn insert(&mut self, key: &str, value: String) {
        self.entries.insert(key.to_string(), value);
    }

    pub fn remove(&mut self, key: &str) {
        self.entries.remove(key);
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Reject keys outside `allowed`; a trailing `*` in an allowed key matches a prefix.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        let unknown: Vec<&str> = self
            .entries
            .keys()
            .filter(|k| {
                !allowed.iter().any(|a| match a.strip_suffix('*') {
                    Some(prefix) => k.starts_with(prefix),
                    None => k == a,
                })
            })
            .map(String::as_str)
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(format!(
                "unknown config keys: {}",
                unknown.join(", ")
            )))
        }
    }

    pub fn require(&self, keys: &[&str]) -> Result<(), CliError> {
        let missing: Vec<&str> = keys
            .iter()
            .copied()
            .filter(|k| !self.entries.contains_key(*k))
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(format!(
                "missing required config keys: {}",
                missing.join(", ")
            )))
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Validation(format!("bad value for {key}: {v:?} ({e})")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim().parse::<T>().map_err(|e| {
                            CliError::Validation(format!("bad entry {x:?} in {key} ({e})"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    /// Canonical `key=value` lines, sorted by key.
    pub fn canonical(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut c = Config::parse("# run\nseed = 4\n\nmodel.epsilon=1e-2\n", "test").unwrap();
        c.apply_overrides(&["model.epsilon=0.1".into()]).unwrap();
        assert_eq!(c.get::<u64>("seed").unwrap(), Some(4));
        assert_eq!(c.get::<f64>("model.epsilon").unwrap(), Some(0.1));
        assert_eq!(c.canonical(), "model.epsilon=0.1\nseed=4\n");
    }

    #[test]
    fn unknown_and_missing_keys_are_listed() {
        let c = Config::parse("seed=1\nfoo=2\nbar.baz=3\n", "test").unwrap();
        let err = c.check_keys(&["seed", "bar.*"]).unwrap_err().to_string();
        assert!(err.contains("foo") && !err.contains("bar.baz"));
        let err = c.require(&["seed", "model"]).unwrap_err().to_string();
        assert!(err.contains("model"));
    }

    #[test]
    fn malformed_values_are_rejected() {
        assert!(Config::parse("novalue\n", "test").is_err());
        let c = Config::parse("grid.n=abc\nsweep.values=1e-1, 1e-2\n", "test").unwrap();
        assert!(c.get::<usize>("grid.n").is_err());
        assert_eq!(
            c.get_list::<f64>("sweep.values").unwrap(),
            Some(vec![0.1, 0.01])
        );
    }
}
