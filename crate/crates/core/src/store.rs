//! Canonical JSON files for trained models and pipeline reports.
//!
//! Canonical means: object keys sorted, floats in shortest
//! round-trip decimal form, tree nodes in pre-order, pretty-printed
//! with a trailing newline. Saving the same value twice produces
//! byte-identical files, so output checksums are meaningful.
//!
//! Model files carry only model parameters and aggregate statistics
//! (counts, fractions, means, weights), never training rows.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::classifiers::{ModelBody, ModelMetadata, TrainedModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Version stamp written into every file this module saves.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
struct ModelFile<F> {
    format_version: u32,
    metadata: ModelMetadata,
    body: ModelBody<F>,
}

/// Serialize any value to canonical JSON text.
///
/// Round-tripping through `serde_json::Value` sorts object keys;
/// struct field order stops mattering.
pub(crate) fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value)
        .map_err(|e| Error::Integrity(format!("value not serializable: {e}")))?;
    let mut text = serde_json::to_string_pretty(&tree)
        .map_err(|e| Error::Integrity(format!("value not serializable: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn check_version(tree: &serde_json::Value, what: &str) -> Result<()> {
    let found = tree
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Integrity(format!("{what} carries no format_version")))?;
    if found != u64::from(FORMAT_VERSION) {
        return Err(Error::Version {
            found: found.try_into().unwrap_or(u32::MAX),
            supported: FORMAT_VERSION,
        });
    }
    Ok(())
}

fn parse_file(text: &str, what: &str) -> Result<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| Error::Integrity(format!("{what} is not valid JSON: {e}")))
}

/// The exact bytes `save_model` writes.
pub fn model_text<F: Scalar>(model: &TrainedModel<F>) -> Result<String> {
    model.body.validate()?;
    canonical_json(&ModelFile {
        format_version: FORMAT_VERSION,
        metadata: model.metadata.clone(),
        body: model.body.clone(),
    })
}

pub fn save_model<F: Scalar>(model: &TrainedModel<F>, path: &Path) -> Result<()> {
    let text = model_text(model)?;
    fs::write(path, text)?;
    Ok(())
}

/// Read a model file back, checking the format version, the
/// metadata/body family agreement, and every family invariant.
pub fn load_model<F: Scalar>(path: &Path) -> Result<TrainedModel<F>> {
    let text = fs::read_to_string(path)?;
    let tree = parse_file(&text, "model file")?;
    check_version(&tree, "model file")?;
    let file: ModelFile<F> = serde_json::from_value(tree)
        .map_err(|e| Error::Integrity(format!("malformed model file: {e}")))?;

    if file.metadata.family != file.body.family() {
        return Err(Error::Integrity(format!(
            "metadata family `{}` does not match body family `{}`",
            file.metadata.family,
            file.body.family()
        )));
    }
    if file.metadata.family != file.metadata.spec.family() {
        return Err(Error::Integrity(format!(
            "metadata family `{}` does not match its hyperparameter family `{}`",
            file.metadata.family,
            file.metadata.spec.family()
        )));
    }
    if file.metadata.training_rows == 0 {
        return Err(Error::Integrity("metadata claims zero training rows".into()));
    }
    let fp = &file.metadata.schema_fingerprint;
    if fp.len() != 64 || !fp.bytes().all(|b| b.is_ascii_hexdigit()) {
        return Err(Error::Integrity(
            "schema fingerprint is not a sha-256 hex digest".into(),
        ));
    }
    file.body.validate()?;
    Ok(TrainedModel {
        metadata: file.metadata,
        body: file.body,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ReportFile<T> {
    format_version: u32,
    report: T,
}

/// Save any serializable report in the same canonical envelope as
/// model files.
pub fn save_report<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    let text = canonical_json(&ReportFile {
        format_version: FORMAT_VERSION,
        report,
    })?;
    fs::write(path, text)?;
    Ok(())
}

pub fn load_report<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    let tree = parse_file(&text, "report file")?;
    check_version(&tree, "report file")?;
    let file: ReportFile<T> = serde_json::from_value(tree)
        .map_err(|e| Error::Integrity(format!("malformed report file: {e}")))?;
    Ok(file.report)
}
