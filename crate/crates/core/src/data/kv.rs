//! Flat `key=value` text used by config files and model manifests.
//! Blank lines and lines starting with `#` are skipped.

use crate::{Error, Result};

pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Format(format!("line {}: expected key=value, got '{line}'", n + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Format(format!("line {}: empty key", n + 1)));
        }
        if out.iter().any(|(existing, _)| existing == k) {
            return Err(Error::Format(format!("line {}: duplicate key '{k}'", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Lookup helper over parsed pairs.
#[derive(Clone, Debug, Default)]
pub struct KvMap {
    pairs: Vec<(String, String)>,
}

impl KvMap {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self { pairs: parse_kv(text)? })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Format(format!("missing key '{key}'")))
    }

    pub fn parse_value<V: std::str::FromStr>(&self, key: &str) -> Result<V> {
        let raw = self.require(key)?;
        raw.parse().map_err(|_| Error::Format(format!("key '{key}': cannot parse '{raw}'")))
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }
}
