use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::{Params, Seq2SeqConfig};
use super::vocab::Vocab;
use super::Seq2Seq;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const CHECKPOINT_FORMAT: &str = "acsqg-seq2seq/1";

#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Real")]
struct Checkpoint<T> {
    format: String,
    scalar: String,
    config_hash: String,
    config: Seq2SeqConfig,
    vocab: Vocab,
    params: Params<T>,
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::resource(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::resource(dir, e))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).map_err(|e| Error::resource(path, e.error))?;
    Ok(())
}

impl<T: Real> Seq2Seq<T> {
    pub fn to_json(&self) -> Result<String> {
        let ck = Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            scalar: T::NAME.to_string(),
            config_hash: self.config.hash(),
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            params: self.params.clone(),
        };
        Ok(serde_json::to_string(&ck)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let head: serde_json::Value = serde_json::from_str(text)?;
        let field = |k: &str| head.get(k).and_then(|v| v.as_str()).unwrap_or("").to_string();
        if field("format") != CHECKPOINT_FORMAT {
            return Err(Error::Format(format!("not a seq2seq checkpoint (format {:?})", field("format"))));
        }
        if field("scalar") != T::NAME {
            return Err(Error::Model(format!(
                "checkpoint holds {} parameters, loader expects {}",
                field("scalar"),
                T::NAME
            )));
        }
        let ck: Checkpoint<T> = serde_json::from_value(head)?;
        if ck.config.hash() != ck.config_hash {
            return Err(Error::Format("checkpoint config hash mismatch".into()));
        }
        ck.config.validate()?;
        ck.params.check_shapes(&ck.config, ck.vocab.len())?;
        let model = Seq2Seq {
            config: ck.config,
            vocab: ck.vocab,
            params: ck.params,
        };
        if !crate::nn::Tensors::all_finite(&model.params) {
            return Err(Error::NonFinite("checkpoint parameters".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let path = if path.is_dir() { path.join("best.json") } else { path.to_path_buf() };
        let text = std::fs::read_to_string(&path).map_err(|e| Error::resource(&path, e))?;
        Self::from_json(&text)
    }
}
