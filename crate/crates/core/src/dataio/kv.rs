//! Flat `key=value` text files: one pair per line, `#` comments, blank lines
//! ignored. Keys keep their file order.

use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KvEntry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KvFile {
    pub path: std::path::PathBuf,
    pub entries: Vec<KvEntry>,
}

impl KvFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut entries: Vec<KvEntry> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    column: 1,
                    message: format!("expected key=value, got '{line}'"),
                });
            };
            let key = k.trim().to_string();
            if entries.iter().any(|e| e.key == key) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    column: 1,
                    message: format!("duplicate key '{key}'"),
                });
            }
            entries.push(KvEntry {
                key,
                value: v.trim().to_string(),
                line: i + 1,
            });
        }
        Ok(KvFile {
            path: path.to_path_buf(),
            entries,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn entry(&self, key: &str) -> Option<&KvEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entry(key).map(|e| e.value.as_str())
    }

    fn error_at(&self, e: &KvEntry, message: String) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line: e.line,
            column: e.key.len() + 2,
            message,
        }
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse {
            path: self.path.clone(),
            line: 0,
            column: 0,
            message: format!("missing key '{key}'"),
        })
    }

    /// Parses the value under `key` if present.
    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entry(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|err| self.error_at(e, format!("bad value for '{key}': {err}"))),
        }
    }

    pub fn required<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.require(key)?;
        Ok(self.parsed(key)?.expect("presence checked"))
    }

    /// Comma-separated list of numbers.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(e) = self.entry(key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|err| {
                    self.error_at(e, format!("bad number '{}' in '{key}': {err}", t.trim()))
                })
            })
            .collect::<Result<Vec<f64>>>()
            .map(Some)
    }

    /// Keys not in `known`, for rejecting typos.
    pub fn unknown_keys<'a>(&'a self, known: &[&str]) -> Vec<&'a str> {
        self.entries
            .iter()
            .map(|e| e.key.as_str())
            .filter(|k| !known.contains(k))
            .collect()
    }
}

/// Formats a float so that parsing it back gives the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_lookup() {
        let kv = KvFile::parse("# c\n\na = 1\nb=2.5,3\n", Path::new("x")).unwrap();
        assert_eq!(kv.get("a"), Some("1"));
        assert_eq!(kv.required::<u32>("a").unwrap(), 1);
        assert_eq!(kv.list("b").unwrap(), Some(vec![2.5, 3.0]));
        assert!(kv.required::<f64>("zz").is_err());
        assert_eq!(kv.unknown_keys(&["a"]), vec!["b"]);
    }

    #[test]
    fn errors_carry_line() {
        let err = KvFile::parse("a=1\nnonsense\n", Path::new("f.cfg")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let kv = KvFile::parse("a=1\nb=x\n", Path::new("f.cfg")).unwrap();
        assert!(matches!(
            kv.parsed::<f64>("b"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(KvFile::parse("a=1\na=2\n", Path::new("f")).is_err());
    }

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, 6.954363016f64, -2.5e-300, 1e300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
