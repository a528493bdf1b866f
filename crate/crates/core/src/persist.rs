//! Versioned, checksummed JSON model files.
//!
//! ```text
//! {"format_version": 1, "checksum": "<sha256 of body>", "model": <body>}
//! ```
//!
//! The body holds the model kind, master seed, a training-data fingerprint,
//! the fitted standardizer, the hyperparameters and the learned parameters.
//! Floats are written in shortest round-trip form, so a loaded model predicts
//! bit-identically to the one that was saved.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use sha2::{Digest, Sha256};

use crate::data::{to_csv_string, Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::model::{FittedModel, ModelKind, ModelSpec, Pipeline};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataFingerprint {
    pub rows: usize,
    pub sha256: String,
}

impl DataFingerprint {
    pub fn of(dataset: &Dataset) -> Self {
        DataFingerprint {
            rows: dataset.len(),
            sha256: sha256_hex(to_csv_string(dataset).as_bytes()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistedModel {
    pub model_kind: ModelKind,
    pub seed: u64,
    pub fingerprint: DataFingerprint,
    pub hyperparameters: ModelSpec,
    pub standardizer: Standardizer,
    pub params: FittedModel,
}

impl PersistedModel {
    pub fn new(spec: &ModelSpec, pipeline: Pipeline, train: &Dataset) -> Self {
        PersistedModel {
            model_kind: spec.kind,
            seed: spec.seed,
            fingerprint: DataFingerprint::of(train),
            hyperparameters: spec.clone(),
            standardizer: pipeline.standardizer,
            params: pipeline.model,
        }
    }

    pub fn pipeline(&self) -> Pipeline {
        Pipeline {
            standardizer: self.standardizer.clone(),
            model: self.params.clone(),
        }
    }

    pub fn predict_proba(&self, raw: &[f64]) -> Result<f64> {
        self.params
            .predict_proba(&self.standardizer.apply_row(raw)?)
    }

    pub fn predict_class(&self, raw: &[f64]) -> Result<u8> {
        self.params
            .predict_class(&self.standardizer.apply_row(raw)?)
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<'a> {
    format_version: u64,
    checksum: String,
    #[serde(borrow)]
    model: &'a RawValue,
}

fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn to_json(model: &PersistedModel) -> Result<String> {
    let body = serde_json::to_string(model)
        .map_err(|e| Error::Numeric(format!("model serialization ({e})")))?;
    // The reader shares serde_json's nesting limit; refuse to write a file it
    // could not read back.
    serde_json::from_str::<serde::de::IgnoredAny>(&body).map_err(|_| Error::Unsupported {
        model: model.model_kind.to_string(),
        message: "model is nested too deeply to persist (reduce tree depth)".into(),
    })?;
    let raw = RawValue::from_string(body).expect("serde_json output is valid JSON");
    let envelope = Envelope {
        format_version: FORMAT_VERSION,
        checksum: sha256_hex(raw.get().as_bytes()),
        model: &raw,
    };
    let mut text = serde_json::to_string(&envelope).expect("envelope serializes");
    text.push('\n');
    Ok(text)
}

pub fn from_json(text: &str) -> Result<PersistedModel> {
    let envelope: Envelope = serde_json::from_str(text)
        .map_err(|e| Error::Corrupt(format!("not a model file ({e})")))?;
    if envelope.format_version != FORMAT_VERSION {
        return Err(Error::Version {
            found: envelope.format_version,
            supported: FORMAT_VERSION,
        });
    }
    if sha256_hex(envelope.model.get().as_bytes()) != envelope.checksum {
        return Err(Error::Corrupt("checksum mismatch".into()));
    }
    let model: PersistedModel = serde_json::from_str(envelope.model.get())
        .map_err(|e| Error::Corrupt(format!("invalid model body ({e})")))?;
    if model.params.kind() != model.model_kind {
        return Err(Error::Corrupt(
            "model_kind does not match parameters".into(),
        ));
    }
    Ok(model)
}

pub fn save_model(model: &PersistedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PersistedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}
