//! Flat `key = value` experiment files.
//!
//! Keys mirror the long command-line flags with `-` or `_` accepted
//! interchangeably. Values given on the command line take precedence.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

pub const KEYS: &[&str] = &[
    "graph",
    "family",
    "n",
    "p",
    "graph_seed",
    "k",
    "k_rule",
    "strategy",
    "trials",
    "seed",
    "max_rounds",
    "allow_illegal_k",
    "retention",
    "out",
    "jobs",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let key = key.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "line {}: unknown key `{key}`",
                    i + 1
                )));
            }
            if values
                .insert(key.clone(), value.trim().to_string())
                .is_some()
            {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    i + 1
                )));
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| Error::Config(format!("`{key}`: cannot parse `{v}`: {e}")))
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_types() {
        let c = ConfigFile::parse("# demo\nfamily = cycle\nmax-rounds=500 # cap\n\ntrials = 3\n")
            .unwrap();
        assert_eq!(c.raw("family"), Some("cycle"));
        assert_eq!(c.get::<u64>("max_rounds").unwrap(), Some(500));
        assert_eq!(c.get::<u64>("seed").unwrap(), None);
        assert!(c.get::<u64>("family").is_err());
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(ConfigFile::parse("colour = 3").is_err());
        assert!(ConfigFile::parse("k = 3\nk = 4").is_err());
        assert!(ConfigFile::parse("k 3").is_err());
    }
}
