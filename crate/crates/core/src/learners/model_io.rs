//! Versioned JSON model files. The training schema travels with the model
//! and is checked again whenever it scores a matrix.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainedModel;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    model: TrainedModel,
}

pub fn save_model(path: impl AsRef<Path>, model: &TrainedModel) -> Result<()> {
    let path = path.as_ref();
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    let text = serde_json::to_string(&file).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "{}: model format version {} is not supported (expected {MODEL_FORMAT_VERSION})",
            path.display(),
            file.format_version
        )));
    }
    Ok(file.model)
}
