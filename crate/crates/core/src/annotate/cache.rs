//! On-disk annotation cache: one JSON record per line, keyed by the SHA-256
//! of the raw sentence text.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Annotator, Token};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct CacheRecord {
    key: String,
    annotator: String,
    text: String,
    tokens: Vec<Token>,
}

pub fn text_key(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Wraps an annotator with a persistent cache. Reads are concurrent; appends
/// to the cache file are serialized.
pub struct CachedAnnotator<A> {
    inner: A,
    path: PathBuf,
    entries: RwLock<HashMap<String, Vec<Token>>>,
    writer: Mutex<File>,
}

impl<A: Annotator> CachedAnnotator<A> {
    pub fn open(inner: A, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let id = inner.id();
        let mut entries = HashMap::new();
        if path.exists() {
            let file = File::open(&path).map_err(|e| Error::resource(&path, e))?;
            for (lineno, line) in BufReader::new(file).lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheRecord = serde_json::from_str(&line).map_err(|e| {
                    Error::Format(format!("{}:{}: {e}", path.display(), lineno + 1))
                })?;
                // records from another annotator version are ignored, not trusted
                if rec.annotator == id {
                    entries.insert(rec.key, rec.tokens);
                }
            }
        }
        let writer = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::resource(&path, e))?;
        Ok(CachedAnnotator {
            inner,
            path,
            entries: RwLock::new(entries),
            writer: Mutex::new(writer),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn cached(&self) -> usize {
        self.entries.read().map(|e| e.len()).unwrap_or(0)
    }
}

impl<A: Annotator> Annotator for CachedAnnotator<A> {
    fn id(&self) -> String {
        self.inner.id()
    }

    fn annotate_tokens(&self, raw_text: &str) -> Result<Vec<Token>> {
        let key = text_key(raw_text);
        if let Some(tokens) = self.entries.read().ok().and_then(|e| e.get(&key).cloned()) {
            return Ok(tokens);
        }
        let tokens = self.inner.annotate_tokens(raw_text)?;
        let record = CacheRecord {
            key: key.clone(),
            annotator: self.inner.id(),
            text: raw_text.to_string(),
            tokens: tokens.clone(),
        };
        let line = serde_json::to_string(&record)?;
        {
            let mut w = self
                .writer
                .lock()
                .map_err(|_| Error::Annotation("cache writer poisoned".into()))?;
            writeln!(w, "{line}")?;
            w.flush()?;
        }
        if let Ok(mut e) = self.entries.write() {
            e.insert(key, tokens.clone());
        }
        Ok(tokens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{annotate, RuleAnnotator};

    #[test]
    fn sha256_key_is_hex() {
        assert_eq!(
            text_key("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let text = "Selina left her hometown at the age of 18.";
        let first = {
            let c = CachedAnnotator::open(RuleAnnotator, &path).unwrap();
            let s = annotate(&c, text).unwrap();
            assert_eq!(c.cached(), 1);
            s
        };
        let c = CachedAnnotator::open(RuleAnnotator, &path).unwrap();
        assert_eq!(c.cached(), 1);
        assert_eq!(annotate(&c, text).unwrap(), first);
        let lines = std::fs::read_to_string(&path).unwrap();
        assert_eq!(lines.lines().count(), 1);
    }
}
