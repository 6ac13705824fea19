//! JSON model documents.
//!
//! ```json
//! {"kind": "linear", "num_classes": 2, "input_length": 4, "input_channels": 1,
//!  "weights": [[...], [...]], "bias": [0.0, 0.0]}
//! ```
//!
//! `kind` is one of `linear` (`weights`, `bias`), `mlp` (`layers`, each
//! with `weights` and `bias`) or `bandpower` (`rules` with `class`,
//! `channel`, `bin_low`, `bin_high`, `threshold`, plus an optional `gain`).

use std::fs;
use std::path::Path;

use freqatt_core::ModelSpec;

use crate::error::{CliError, Result};

pub const MODEL_KINDS: [&str; 3] = ["linear", "mlp", "bandpower"];

pub fn parse_model(path: &Path, text: &str) -> Result<ModelSpec> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::format(path, e))?;
    let kind = value
        .get("kind")
        .and_then(serde_json::Value::as_str)
        .ok_or_else(|| CliError::format(path, "model document needs a string `kind`"))?;
    if !MODEL_KINDS.contains(&kind) {
        return Err(CliError::UnknownModelKind {
            path: path.to_path_buf(),
            kind: kind.to_string(),
        });
    }
    let spec: ModelSpec = serde_json::from_value(value).map_err(|e| CliError::format(path, e))?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_model(path: &Path) -> Result<ModelSpec> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_model(path, &text)
}

pub fn save_model(spec: &ModelSpec, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(spec).map_err(|e| CliError::format(path, e))?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}
