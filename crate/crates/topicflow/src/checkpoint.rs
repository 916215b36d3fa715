//! Versioned JSON checkpoint envelope shared by every trainable model.
//!
//! Layout: `{format_version, kind, config, vocab_hash, tensors}` where each
//! tensor is a named flat array of decimal floats with an explicit shape.
//! f64 values round-trip exactly through serde_json, so save → load is
//! bit-exact on parameters.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Current checkpoint format version.
pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: String,
    /// Which model this is: `encoder`, `policy`, or `generator`.
    pub kind: String,
    /// The producing model's config, embedded verbatim.
    pub config: serde_json::Value,
    /// Hash of the vocabulary the model was trained against.
    pub vocab_hash: String,
    pub tensors: BTreeMap<String, Tensor>,
}

impl Checkpoint {
    pub fn new(kind: &str, config: serde_json::Value, vocab_hash: String) -> Self {
        Checkpoint {
            format_version: FORMAT_VERSION.to_string(),
            kind: kind.to_string(),
            config,
            vocab_hash,
            tensors: BTreeMap::new(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let json = serde_json::to_string(self)?;
        fs::write(path, json)?;
        Ok(())
    }

    /// Load and validate format version and (when given) the vocab hash.
    pub fn load(path: &Path, expect_kind: &str, expect_vocab_hash: Option<&str>) -> Result<Checkpoint> {
        let text = fs::read_to_string(path)?;
        let ckpt: Checkpoint = serde_json::from_str(&text)?;
        if ckpt.format_version != FORMAT_VERSION {
            return Err(Error::CheckpointVersion {
                found: ckpt.format_version,
                expected: FORMAT_VERSION.to_string(),
            });
        }
        if ckpt.kind != expect_kind {
            return Err(Error::InvalidInput(format!(
                "checkpoint at {} is a `{}` model, expected `{}`",
                path.display(),
                ckpt.kind,
                expect_kind
            )));
        }
        if let Some(expected) = expect_vocab_hash {
            if ckpt.vocab_hash != expected {
                return Err(Error::VocabHash {
                    found: ckpt.vocab_hash,
                    expected: expected.to_string(),
                });
            }
        }
        Ok(ckpt)
    }

    pub fn tensor(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::InvalidInput(format!("checkpoint missing tensor `{name}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        let mut ck = Checkpoint::new("encoder", serde_json::json!({"n": 4}), "abc".into());
        ck.tensors.insert(
            "emb".into(),
            Tensor::new(2, 3, vec![0.1, -0.2, 1.0 / 3.0, f64::MIN_POSITIVE, 1e300, -0.0]),
        );
        ck.save(&path).unwrap();
        let back = Checkpoint::load(&path, "encoder", Some("abc")).unwrap();
        assert_eq!(back.tensors["emb"], ck.tensors["emb"]);
    }

    #[test]
    fn wrong_vocab_hash_is_a_hard_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        let ck = Checkpoint::new("encoder", serde_json::json!({}), "aaaa".into());
        ck.save(&path).unwrap();
        let err = Checkpoint::load(&path, "encoder", Some("bbbb")).unwrap_err();
        assert!(matches!(err, Error::VocabHash { .. }));
    }

    #[test]
    fn unknown_version_names_both_versions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        let mut ck = Checkpoint::new("encoder", serde_json::json!({}), "aaaa".into());
        ck.format_version = "99".into();
        ck.save(&path).unwrap();
        let err = Checkpoint::load(&path, "encoder", None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("99") && msg.contains(FORMAT_VERSION));
    }
}
