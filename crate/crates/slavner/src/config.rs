//! Flat key-value configuration files: one `key = value` per line,
//! `#` comments, no sections. Duplicate keys are rejected so a typo
//! cannot silently shadow a setting.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fsio;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    map: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::invalid(format!(
                    "config line {}: expected `key = value`, got `{line}`",
                    i + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::invalid(format!("config line {}: empty key", i + 1)));
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::invalid(format!(
                    "config line {}: duplicate key `{key}`",
                    i + 1
                )));
            }
        }
        Ok(Self { map })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fsio::read_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::invalid(format!("config key `{key}` is missing")))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| Error::invalid(format!("config key `{key}`: cannot parse `{raw}`"))),
        }
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64> {
        self.parsed(key, default)
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize> {
        self.parsed(key, default)
    }

    pub fn get_f64(&self, key: &str, default: f64) -> Result<f64> {
        self.parsed(key, default)
    }

    pub fn get_bool(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(raw) => Err(Error::invalid(format!(
                "config key `{key}`: expected true or false, got `{raw}`"
            ))),
        }
    }

    pub fn get_string(&self, key: &str, default: &str) -> String {
        self.get(key).unwrap_or(default).to_string()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_comments_and_blanks() {
        let cfg = Config::parse("# run\nseed = 7\n\nname = desk run\n").unwrap();
        assert_eq!(cfg.get("seed"), Some("7"));
        assert_eq!(cfg.get("name"), Some("desk run"));
        assert_eq!(cfg.get_u64("seed", 0).unwrap(), 7);
    }

    #[test]
    fn missing_keys_fall_back_to_defaults() {
        let cfg = Config::parse("").unwrap();
        assert_eq!(cfg.get_usize("epochs", 200).unwrap(), 200);
        assert!(cfg.get_bool("crf_enabled", true).unwrap());
        assert!(cfg.require("seed").is_err());
    }

    #[test]
    fn rejects_duplicates_and_malformed_lines() {
        assert!(Config::parse("a = 1\na = 2\n").is_err());
        assert!(Config::parse("just words\n").is_err());
        assert!(Config::parse(" = 3\n").is_err());
    }

    #[test]
    fn rejects_unparseable_typed_values() {
        let cfg = Config::parse("epochs = soon\nflag = yes\n").unwrap();
        assert!(cfg.get_usize("epochs", 1).is_err());
        assert!(cfg.get_bool("flag", false).is_err());
    }

    #[test]
    fn values_may_contain_equals_signs() {
        let cfg = Config::parse("note = a = b\n").unwrap();
        assert_eq!(cfg.get("note"), Some("a = b"));
    }
}
