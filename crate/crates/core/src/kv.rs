//! Flat `key=value` text files used for case manifests, run manifests and
//! replay sidecars.
//!
//! Blank lines and lines starting with `#` are ignored. Keys and values are
//! trimmed. A key may appear at most once.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KvError {
    #[error("line {line}: expected `key=value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
}

/// Parsed key/value document. Iteration order is file order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KvDoc {
    entries: Vec<(String, String)>,
}

impl KvDoc {
    pub fn parse(text: &str) -> Result<Self, KvError> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(KvError::Malformed { line: idx + 1, text: raw.to_string() });
            };
            let key = key.trim();
            if key.is_empty() {
                return Err(KvError::Malformed { line: idx + 1, text: raw.to_string() });
            }
            if entries.iter().any(|(k, _)| k == key) {
                return Err(KvError::Duplicate { line: idx + 1, key: key.to_string() });
            }
            entries.push((key.to_string(), value.trim().to_string()));
        }
        Ok(KvDoc { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn to_map(&self) -> BTreeMap<String, String> {
        self.entries.iter().cloned().collect()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments_and_blanks() {
        let doc = KvDoc::parse("# header\n\nkernel_symbol = saxpy\ntolerance=1e-4\n").unwrap();
        assert_eq!(doc.get("kernel_symbol"), Some("saxpy"));
        assert_eq!(doc.get("tolerance"), Some("1e-4"));
        assert_eq!(doc.keys().count(), 2);
    }

    #[test]
    fn value_may_contain_equals() {
        let doc = KvDoc::parse("flags=-DFOO=1\n").unwrap();
        assert_eq!(doc.get("flags"), Some("-DFOO=1"));
    }

    #[test]
    fn rejects_malformed_and_duplicate() {
        assert!(matches!(KvDoc::parse("nokey\n"), Err(KvError::Malformed { line: 1, .. })));
        assert!(matches!(KvDoc::parse("a=1\na=2\n"), Err(KvError::Duplicate { line: 2, .. })));
    }

    #[test]
    fn render_round_trips() {
        let text = "a=1\nb=two words\n";
        assert_eq!(KvDoc::parse(text).unwrap().render(), text);
    }
}
