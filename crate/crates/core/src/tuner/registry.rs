use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{BbqpError, Result};

/// Highest objective observed per instance id, optionally backed by a
/// tab-separated file of `id<TAB>objective` lines. Updates are appended, so
/// an id may appear several times; the maximum wins.
#[derive(Debug, Clone, Default)]
pub struct BestKnownRegistry {
    path: Option<PathBuf>,
    values: BTreeMap<String, f64>,
}

impl BestKnownRegistry {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens the registry at `path`. A missing file is an empty registry and
    /// is created on the first update.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let values = match std::fs::read_to_string(&path) {
            Ok(text) => parse(&text, &path)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(BbqpError::io(&path, e)),
        };
        Ok(BestKnownRegistry {
            path: Some(path),
            values,
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.values.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Records `objective` for `id` if it beats the current record. For a
    /// file-backed registry the file is re-read under an exclusive lock first,
    /// so concurrent writers never lose an improvement.
    pub fn update(&mut self, id: &str, objective: f64) -> Result<bool> {
        if id.is_empty() || id.contains(['\t', '\n', '\r']) {
            return Err(BbqpError::InvalidArgument(format!("invalid instance id {id:?}")));
        }
        if !objective.is_finite() {
            return Err(BbqpError::InvalidArgument(format!("objective for {id} is not finite")));
        }
        let Some(path) = self.path.clone() else {
            return Ok(self.merge(id, objective));
        };
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(|e| BbqpError::io(&path, e))?;
        file.lock().map_err(|e| BbqpError::io(&path, e))?;
        let outcome = self.update_locked(&mut file, &path, id, objective);
        let unlocked = file.unlock().map_err(|e| BbqpError::io(&path, e));
        let improved = outcome?;
        unlocked?;
        Ok(improved)
    }

    fn update_locked(&mut self, file: &mut File, path: &Path, id: &str, objective: f64) -> Result<bool> {
        let mut text = String::new();
        file.seek(SeekFrom::Start(0)).map_err(|e| BbqpError::io(path, e))?;
        file.read_to_string(&mut text).map_err(|e| BbqpError::io(path, e))?;
        for (k, v) in parse(&text, path)? {
            self.merge(&k, v);
        }
        if !self.merge(id, objective) {
            return Ok(false);
        }
        let mut line = String::new();
        if !text.is_empty() && !text.ends_with('\n') {
            line.push('\n');
        }
        line.push_str(&format!("{id}\t{objective}\n"));
        file.write_all(line.as_bytes()).map_err(|e| BbqpError::io(path, e))?;
        file.flush().map_err(|e| BbqpError::io(path, e))?;
        Ok(true)
    }

    fn merge(&mut self, id: &str, objective: f64) -> bool {
        match self.values.get_mut(id) {
            Some(v) if *v >= objective => false,
            Some(v) => {
                *v = objective;
                true
            }
            None => {
                self.values.insert(id.to_string(), objective);
                true
            }
        }
    }
}

fn parse(text: &str, path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut values = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let (Some(id), Some(value), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(BbqpError::parse(path, k + 1, "expected `id<TAB>objective`"));
        };
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| BbqpError::parse(path, k + 1, format!("bad objective {value:?}")))?;
        if id.is_empty() || !value.is_finite() {
            return Err(BbqpError::parse(path, k + 1, "empty id or non-finite objective"));
        }
        let entry = values.entry(id.to_string()).or_insert(value);
        if value > *entry {
            *entry = value;
        }
    }
    Ok(values)
}

/// Stores `objective` as the record for `id` if it is strictly better;
/// returns whether the record changed.
pub fn best_known_update(registry: &mut BestKnownRegistry, id: &str, objective: f64) -> Result<bool> {
    registry.update(id, objective)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn in_memory_updates() {
        let mut r = BestKnownRegistry::in_memory();
        assert!(best_known_update(&mut r, "a", 5.0).unwrap());
        assert!(!best_known_update(&mut r, "a", 4.0).unwrap());
        assert!(!best_known_update(&mut r, "a", 5.0).unwrap());
        assert!(best_known_update(&mut r, "a", 6.5).unwrap());
        assert_eq!(r.get("a"), Some(6.5));
        assert!(r.update("bad\tid", 1.0).is_err());
        assert!(r.update("b", f64::NAN).is_err());
    }

    #[test]
    fn file_round_trip_keeps_maximum() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("best.tsv");
        let mut r = BestKnownRegistry::open(&path).unwrap();
        assert!(r.is_empty());
        assert!(r.update("x", 10.0).unwrap());
        assert!(r.update("y", -3.5).unwrap());
        assert!(!r.update("x", 9.0).unwrap());
        assert!(r.update("x", 12.25).unwrap());
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "x\t10\ny\t-3.5\nx\t12.25\n");
        let again = BestKnownRegistry::open(&path).unwrap();
        assert_eq!(again.get("x"), Some(12.25));
        assert_eq!(again.len(), 2);
    }

    #[test]
    fn concurrent_writer_is_respected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("best.tsv");
        let mut a = BestKnownRegistry::open(&path).unwrap();
        let mut b = BestKnownRegistry::open(&path).unwrap();
        assert!(a.update("x", 10.0).unwrap());
        // b has not seen a's record and must not regress it.
        assert!(!b.update("x", 8.0).unwrap());
        assert_eq!(b.get("x"), Some(10.0));
    }

    #[test]
    fn malformed_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("best.tsv");
        std::fs::write(&path, "ok\t1\nbroken line\n").unwrap();
        match BestKnownRegistry::open(&path) {
            Err(BbqpError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::write(&path, "x\tabc\n").unwrap();
        assert!(BestKnownRegistry::open(&path).is_err());
    }
}
